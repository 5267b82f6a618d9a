// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tsep/tensor.hpp"

namespace tsep {

// Mono time-domain signal.
struct Waveform {
  std::vector<double> samples;
  std::uint32_t sample_rate = 8000;
};

struct EncoderConfig {
  std::size_t filters = 256;
  std::size_t kernel = 16;
  std::size_t stride = 8;

  // Requires 1 <= stride <= kernel so analysis frames overlap or tile.
  void validate() const;
  // floor((T - kernel) / stride) + 1; throws InputTooShortError if T < kernel.
  std::size_t latent_length(std::size_t samples) const;
  std::size_t decoded_length(std::size_t latent_frames) const {
    return (latent_frames - 1) * stride + kernel;
  }
};

// ReLU(Conv1D(x)) without bias. wave: [T], kernels: [filters, 1, kernel]
// -> latent [T_lat, filters] (frames x channels).
template <typename T>
Tensor<T> encode(const Tensor<T>& wave, const Tensor<T>& kernels, const EncoderConfig& cfg);

// Conv1D^T(mask * latent) without bias. mask, latent: [T_lat, filters],
// kernels: [filters, 1, kernel] -> [(T_lat - 1) * stride + kernel].
template <typename T>
Tensor<T> decode(const Tensor<T>& mask, const Tensor<T>& latent, const Tensor<T>& kernels,
                 const EncoderConfig& cfg);

}  // namespace tsep

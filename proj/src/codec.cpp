// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/codec.hpp"

#include <string>

#include "tsep/ops.hpp"

namespace tsep {

void EncoderConfig::validate() const {
  if (filters == 0 || kernel == 0) throw ConfigError("encoder: filters and kernel must be positive");
  if (stride == 0 || stride > kernel) {
    throw ConfigError("encoder: stride " + std::to_string(stride) + " must lie in [1, kernel=" +
                      std::to_string(kernel) + "]");
  }
}

std::size_t EncoderConfig::latent_length(std::size_t samples) const {
  if (samples < kernel) {
    throw InputTooShortError("waveform has " + std::to_string(samples) + " samples; encoder needs at least " +
                             std::to_string(kernel));
  }
  return (samples - kernel) / stride + 1;
}

template <typename T>
Tensor<T> encode(const Tensor<T>& wave, const Tensor<T>& kernels, const EncoderConfig& cfg) {
  if (wave.rank() != 1) throw DimensionError("encode: waveform must be rank 1, got " + shape_str(wave.shape()));
  if (kernels.shape() != Shape{cfg.filters, 1, cfg.kernel}) {
    throw DimensionError("encode: kernels " + shape_str(kernels.shape()) + " do not match encoder config");
  }
  cfg.latent_length(wave.size());
  auto x = ops::reshape(wave, Shape{1, wave.size()});
  return ops::transpose(ops::relu(ops::conv1d(x, kernels, cfg.stride)));
}

template <typename T>
Tensor<T> decode(const Tensor<T>& mask, const Tensor<T>& latent, const Tensor<T>& kernels,
                 const EncoderConfig& cfg) {
  if (mask.shape() != latent.shape()) {
    throw DimensionError("decode: mask " + shape_str(mask.shape()) + " vs latent " + shape_str(latent.shape()));
  }
  if (latent.rank() != 2 || latent.extent(1) != cfg.filters) {
    throw DimensionError("decode: latent must be [T_lat, " + std::to_string(cfg.filters) + "]");
  }
  auto masked = ops::transpose(ops::mul(mask, latent));
  auto out = ops::conv1d_transposed(masked, kernels, cfg.stride);
  return ops::reshape(out, Shape{out.size()});
}

template Tensor<float> encode(const Tensor<float>&, const Tensor<float>&, const EncoderConfig&);
template Tensor<double> encode(const Tensor<double>&, const Tensor<double>&, const EncoderConfig&);
template Tensor<float> decode(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                              const EncoderConfig&);
template Tensor<double> decode(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                               const EncoderConfig&);

}  // namespace tsep

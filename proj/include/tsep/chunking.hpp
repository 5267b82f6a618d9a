// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <optional>

#include "tsep/tensor.hpp"

namespace tsep {

// Index bookkeeping for 50%-overlapped segmentation of a frame sequence.
struct ChunkLayout {
  std::size_t chunk = 0;  // S, even
  std::size_t hop = 0;    // S / 2
  std::size_t padded_length = 0;
  std::size_t num_chunks = 0;
  std::optional<std::size_t> original_length;

  // Smallest padded length >= max(length, S) whose excess over S is a
  // multiple of the hop. Throws ConfigError for odd or zero S.
  static ChunkLayout plan(std::size_t length, std::size_t chunk);

  // Number of chunks covering frame f of the padded sequence (1 or 2).
  std::size_t coverage(std::size_t frame) const;
};

template <typename T>
struct ChunkTensor {
  Tensor<T> data;  // [T_S, S, D]
  ChunkLayout layout;
};

// [T_lat, D] -> [T_S, S, D], right-padded with zeros.
template <typename T>
ChunkTensor<T> segment(const Tensor<T>& frames, std::size_t chunk);

// Inverse of segment: per-frame average of the chunk contributions, trimmed
// to the original length.
template <typename T>
Tensor<T> overlap_add(const ChunkTensor<T>& chunks);

}  // namespace tsep

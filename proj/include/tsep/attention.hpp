// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>

#include "tsep/tensor.hpp"

namespace tsep::ops {

template <typename T>
struct AttentionWeights {
  Tensor<T> wq, wk, wv, wo;  // each [D_a, D_a], applied as x * W
};

template <typename T>
struct AttentionOutput {
  Tensor<T> out;   // [B, T, D_a]
  Tensor<T> attn;  // [B, h, T, T], rows sum to 1; carries no gradient
};

// Multi-head scaled dot-product self-attention without masking or positional
// terms. Scores use 1/sqrt(D_a / heads).
template <typename T>
AttentionOutput<T> multi_head_attention(const Tensor<T>& x, const AttentionWeights<T>& w,
                                        std::size_t heads);

}  // namespace tsep::ops

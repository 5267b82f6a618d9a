// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tsep/attention.hpp"
#include "tsep/chunking.hpp"
#include "tsep/params.hpp"

namespace tsep {

// One Convolution-Attention layer. Channels [0, conv_channels) take the
// depthwise-separable convolution path, the remaining attn_channels take
// multi-head attention. Either path may be empty.
struct CAConfig {
  std::size_t width = 256;
  std::size_t conv_channels = 128;
  std::size_t attn_channels = 128;
  std::size_t heads = 8;
  std::size_t kernel = 51;
  std::size_t ffn_width = 1024;

  void validate() const;
};

template <typename T>
struct CALayerParams {
  // attention path
  ops::AttentionWeights<T> attn;
  Tensor<T> attn_norm_gamma, attn_norm_beta;
  // convolution path; pointwise_weight is [D_c, D_c] applied as x * W
  Tensor<T> depthwise, pointwise_weight, pointwise_bias;
  Tensor<T> conv_norm_gamma, conv_norm_beta;
  // fuse
  Tensor<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Tensor<T> out_norm_gamma, out_norm_beta;

  static CALayerParams create(const CAConfig& cfg, Initializer& init);
  // (suffix, tensor) pairs for every tensor that exists under cfg.
  std::vector<std::pair<std::string, Tensor<T>>> named() const;
};

// Collects attention maps during a forward pass when passed to the model.
template <typename T>
struct AttentionTrace {
  struct Entry {
    std::size_t block = 0;
    bool inter = false;
    std::size_t iteration = 0;
    Tensor<T> weights;  // [B, h, L, L]
  };
  std::vector<Entry> entries;
};

template <typename T>
std::pair<Tensor<T>, Tensor<T>> channel_split(const Tensor<T>& h, std::size_t conv_channels,
                                              std::size_t attn_channels);

// LayerNorm(MHA(Ha) + Ha). attn_out receives the attention maps if non-null.
template <typename T>
Tensor<T> attention_path(const Tensor<T>& ha, const CALayerParams<T>& p, std::size_t heads,
                         Tensor<T>* attn_out = nullptr);

// LayerNorm(Pointwise(Depthwise(Hc)) + Hc), convolving along axis 1 of [B, L, D_c].
template <typename T>
Tensor<T> conv_path(const Tensor<T>& hc, const CALayerParams<T>& p);

// Full layer on [B, L, D]; output has the input shape.
template <typename T>
Tensor<T> ca_layer(const Tensor<T>& h, const CALayerParams<T>& p, const CAConfig& cfg,
                   Tensor<T>* attn_out = nullptr);

// Parameter sets of one dual-path block. With sharing each vector holds a
// single layer that is applied on every iteration.
template <typename T>
struct DualBlockParams {
  std::vector<CALayerParams<T>> intra;
  std::vector<CALayerParams<T>> inter;
};

struct DualBlockShape {
  CAConfig intra;
  CAConfig inter;
  std::size_t intra_repeats = 1;
  std::size_t inter_repeats = 1;
  bool shared = false;
};

template <typename T>
DualBlockParams<T> create_dual_block(const DualBlockShape& shape, Initializer& init);

// IntraCA over the chunk-local axis (chunks batched), permute, InterCA over
// the chunk axis, permute back.
template <typename T>
ChunkTensor<T> dual_ca_block(const ChunkTensor<T>& hs, const DualBlockParams<T>& params,
                             const DualBlockShape& shape, AttentionTrace<T>* trace = nullptr,
                             std::size_t block_index = 0);

}  // namespace tsep

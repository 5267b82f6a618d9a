// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/ca_block.hpp"

#include <cmath>
#include <string>

#include "tsep/ops.hpp"

namespace tsep {

void CAConfig::validate() const {
  if (width == 0) throw ConfigError("ca: width must be positive");
  if (conv_channels + attn_channels != width) {
    throw ConfigError("ca: conv_channels + attn_channels = " + std::to_string(conv_channels + attn_channels) +
                      " differs from width " + std::to_string(width));
  }
  if (attn_channels > 0 && (heads == 0 || attn_channels % heads != 0)) {
    throw ConfigError("ca: " + std::to_string(heads) + " heads do not divide attn_channels " +
                      std::to_string(attn_channels));
  }
  if (conv_channels > 0 && kernel % 2 == 0) {
    throw ConfigError("ca: kernel " + std::to_string(kernel) + " must be odd");
  }
  if (ffn_width == 0) throw ConfigError("ca: ffn_width must be positive");
}

template <typename T>
CALayerParams<T> CALayerParams<T>::create(const CAConfig& cfg, Initializer& init) {
  cfg.validate();
  CALayerParams p;
  const std::size_t da = cfg.attn_channels, dc = cfg.conv_channels, d = cfg.width, df = cfg.ffn_width;
  if (da > 0) {
    const double b = std::sqrt(1.0 / static_cast<double>(da));
    p.attn.wq = init.uniform<T>({da, da}, b);
    p.attn.wk = init.uniform<T>({da, da}, b);
    p.attn.wv = init.uniform<T>({da, da}, b);
    p.attn.wo = init.uniform<T>({da, da}, b);
    p.attn_norm_gamma = init.constant<T>({da}, 1.0);
    p.attn_norm_beta = init.constant<T>({da}, 0.0);
  }
  if (dc > 0) {
    p.depthwise = init.uniform<T>({dc, cfg.kernel}, std::sqrt(1.0 / static_cast<double>(cfg.kernel)));
    p.pointwise_weight = init.uniform<T>({dc, dc}, std::sqrt(1.0 / static_cast<double>(dc)));
    p.pointwise_bias = init.constant<T>({dc}, 0.0);
    p.conv_norm_gamma = init.constant<T>({dc}, 1.0);
    p.conv_norm_beta = init.constant<T>({dc}, 0.0);
  }
  p.ffn_w1 = init.uniform<T>({d, df}, std::sqrt(1.0 / static_cast<double>(d)));
  p.ffn_b1 = init.constant<T>({df}, 0.0);
  p.ffn_w2 = init.uniform<T>({df, d}, std::sqrt(1.0 / static_cast<double>(df)));
  p.ffn_b2 = init.constant<T>({d}, 0.0);
  p.out_norm_gamma = init.constant<T>({d}, 1.0);
  p.out_norm_beta = init.constant<T>({d}, 0.0);
  return p;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>>> CALayerParams<T>::named() const {
  std::vector<std::pair<std::string, Tensor<T>>> out;
  if (attn.wq.defined()) {
    out.emplace_back("attn.wq", attn.wq);
    out.emplace_back("attn.wk", attn.wk);
    out.emplace_back("attn.wv", attn.wv);
    out.emplace_back("attn.wo", attn.wo);
    out.emplace_back("attn.norm.gamma", attn_norm_gamma);
    out.emplace_back("attn.norm.beta", attn_norm_beta);
  }
  if (depthwise.defined()) {
    out.emplace_back("conv.depthwise", depthwise);
    out.emplace_back("conv.pointwise.weight", pointwise_weight);
    out.emplace_back("conv.pointwise.bias", pointwise_bias);
    out.emplace_back("conv.norm.gamma", conv_norm_gamma);
    out.emplace_back("conv.norm.beta", conv_norm_beta);
  }
  out.emplace_back("ffn.w1", ffn_w1);
  out.emplace_back("ffn.b1", ffn_b1);
  out.emplace_back("ffn.w2", ffn_w2);
  out.emplace_back("ffn.b2", ffn_b2);
  out.emplace_back("norm.gamma", out_norm_gamma);
  out.emplace_back("norm.beta", out_norm_beta);
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> channel_split(const Tensor<T>& h, std::size_t conv_channels,
                                              std::size_t attn_channels) {
  if (h.rank() < 1) throw DimensionError("channel_split: scalar input");
  const std::size_t d = h.shape().back();
  if (conv_channels + attn_channels != d) {
    throw ConfigError("channel_split: " + std::to_string(conv_channels) + " + " + std::to_string(attn_channels) +
                      " != " + std::to_string(d));
  }
  const std::size_t axis = h.rank() - 1;
  return {ops::slice(h, axis, 0, conv_channels), ops::slice(h, axis, conv_channels, d)};
}

template <typename T>
Tensor<T> attention_path(const Tensor<T>& ha, const CALayerParams<T>& p, std::size_t heads, Tensor<T>* attn_out) {
  auto mha = ops::multi_head_attention(ha, p.attn, heads);
  if (attn_out) *attn_out = mha.attn;
  return ops::layer_norm(ops::add(mha.out, ha), p.attn_norm_gamma, p.attn_norm_beta);
}

template <typename T>
Tensor<T> conv_path(const Tensor<T>& hc, const CALayerParams<T>& p) {
  auto depth = ops::depthwise_conv_seq(hc, p.depthwise);
  auto point = ops::linear(depth, p.pointwise_weight, p.pointwise_bias);
  return ops::layer_norm(ops::add(point, hc), p.conv_norm_gamma, p.conv_norm_beta);
}

template <typename T>
Tensor<T> ca_layer(const Tensor<T>& h, const CALayerParams<T>& p, const CAConfig& cfg, Tensor<T>* attn_out) {
  if (h.rank() != 3 || h.extent(2) != cfg.width) {
    throw DimensionError("ca_layer: expects [B, L, " + std::to_string(cfg.width) + "], got " + shape_str(h.shape()));
  }
  Tensor<T> fused;
  if (cfg.conv_channels == 0) {
    fused = attention_path(h, p, cfg.heads, attn_out);
  } else if (cfg.attn_channels == 0) {
    fused = conv_path(h, p);
  } else {
    auto [hc, ha] = channel_split(h, cfg.conv_channels, cfg.attn_channels);
    fused = ops::concat(conv_path(hc, p), attention_path(ha, p, cfg.heads, attn_out), 2);
  }
  auto ffn = ops::linear(ops::relu(ops::linear(fused, p.ffn_w1, p.ffn_b1)), p.ffn_w2, p.ffn_b2);
  return ops::layer_norm(ops::add(ffn, fused), p.out_norm_gamma, p.out_norm_beta);
}

template <typename T>
DualBlockParams<T> create_dual_block(const DualBlockShape& shape, Initializer& init) {
  if (shape.intra_repeats == 0 || shape.inter_repeats == 0) throw ConfigError("dual block: repeats must be >= 1");
  if (shape.intra.width != shape.inter.width) throw ConfigError("dual block: intra/inter widths differ");
  DualBlockParams<T> p;
  const std::size_t n_intra = shape.shared ? 1 : shape.intra_repeats;
  const std::size_t n_inter = shape.shared ? 1 : shape.inter_repeats;
  for (std::size_t i = 0; i < n_intra; ++i) p.intra.push_back(CALayerParams<T>::create(shape.intra, init));
  for (std::size_t i = 0; i < n_inter; ++i) p.inter.push_back(CALayerParams<T>::create(shape.inter, init));
  return p;
}

template <typename T>
ChunkTensor<T> dual_ca_block(const ChunkTensor<T>& hs, const DualBlockParams<T>& params, const DualBlockShape& shape,
                             AttentionTrace<T>* trace, std::size_t block_index) {
  auto layer_for = [&shape](const std::vector<CALayerParams<T>>& set, std::size_t i) -> const CALayerParams<T>& {
    return set.at(shape.shared ? 0 : i);
  };
  Tensor<T> h = hs.data;
  for (std::size_t i = 0; i < shape.intra_repeats; ++i) {
    Tensor<T> attn;
    h = ca_layer(h, layer_for(params.intra, i), shape.intra, trace ? &attn : nullptr);
    if (trace && attn.defined()) trace->entries.push_back({block_index, false, i, attn});
  }
  h = ops::swap_leading(h);
  for (std::size_t i = 0; i < shape.inter_repeats; ++i) {
    Tensor<T> attn;
    h = ca_layer(h, layer_for(params.inter, i), shape.inter, trace ? &attn : nullptr);
    if (trace && attn.defined()) trace->entries.push_back({block_index, true, i, attn});
  }
  return {ops::swap_leading(h), hs.layout};
}

#define TSEP_INSTANTIATE_CA(T)                                                                                  \
  template struct CALayerParams<T>;                                                                           \
  template std::pair<Tensor<T>, Tensor<T>> channel_split(const Tensor<T>&, std::size_t, std::size_t);          \
  template Tensor<T> attention_path(const Tensor<T>&, const CALayerParams<T>&, std::size_t, Tensor<T>*);       \
  template Tensor<T> conv_path(const Tensor<T>&, const CALayerParams<T>&);                                    \
  template Tensor<T> ca_layer(const Tensor<T>&, const CALayerParams<T>&, const CAConfig&, Tensor<T>*);         \
  template DualBlockParams<T> create_dual_block(const DualBlockShape&, Initializer&);                          \
  template ChunkTensor<T> dual_ca_block(const ChunkTensor<T>&, const DualBlockParams<T>&, const DualBlockShape&, \
                                        AttentionTrace<T>*, std::size_t);

TSEP_INSTANTIATE_CA(float)
TSEP_INSTANTIATE_CA(double)

}  // namespace tsep

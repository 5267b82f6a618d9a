// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/model.hpp"

#include <algorithm>
#include <cmath>

#include "tsep/ops.hpp"

namespace tsep {

DualBlockShape ModelConfig::block_shape() const {
  return DualBlockShape{intra, inter, intra_repeats, inter_repeats, shared};
}

void ModelConfig::validate() const {
  encoder.validate();
  intra.validate();
  inter.validate();
  if (intra.width != width() || inter.width != width()) {
    throw ConfigError("model: CA width must equal encoder filters (" + std::to_string(width()) + ")");
  }
  if (speakers < 2) throw ConfigError("model: need at least 2 speakers");
  if (blocks == 0 || intra_repeats == 0 || inter_repeats == 0) {
    throw ConfigError("model: block and repeat counts must be >= 1");
  }
  if (chunk < 2 || chunk % 2 != 0) throw ConfigError("model: chunk size must be even and >= 2");
  if (sample_rate == 0) throw ConfigError("model: sample rate must be positive");
}

template <typename T>
Model<T>::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Initializer init(seed);
  const std::size_t d = cfg_.width(), k = cfg_.speakers, len = cfg_.encoder.kernel;
  const double inv_d = std::sqrt(1.0 / static_cast<double>(d));
  encoder_kernels_ = init.uniform<T>({d, 1, len}, std::sqrt(1.0 / static_cast<double>(len)));
  pre_norm_gamma_ = init.constant<T>({d}, 1.0);
  pre_norm_beta_ = init.constant<T>({d}, 0.0);
  pre_weight_ = init.uniform<T>({d, d}, inv_d);
  pre_bias_ = init.constant<T>({d}, 0.0);
  const DualBlockShape shape = cfg_.block_shape();
  for (std::size_t b = 0; b < cfg_.blocks; ++b) blocks_.push_back(create_dual_block<T>(shape, init));
  post_weight_ = init.uniform<T>({d, d * k}, inv_d);
  post_bias_ = init.constant<T>({d * k}, 0.0);
  post_slope_ = init.constant<T>({1}, 0.25);
  head_w1_ = init.uniform<T>({d, d}, inv_d);
  head_b1_ = init.constant<T>({d}, 0.0);
  head_w2_ = init.uniform<T>({d, d}, inv_d);
  head_b2_ = init.constant<T>({d}, 0.0);
  decoder_kernels_ = init.uniform<T>({d, 1, len}, std::sqrt(1.0 / static_cast<double>(d * len)));
  register_all();
}

template <typename T>
void Model<T>::register_all() {
  params_.add("encoder.kernels", encoder_kernels_);
  params_.add("pre.norm.gamma", pre_norm_gamma_);
  params_.add("pre.norm.beta", pre_norm_beta_);
  params_.add("pre.linear.weight", pre_weight_);
  params_.add("pre.linear.bias", pre_bias_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const std::string prefix = "mask.block[" + std::to_string(b) + "].";
    for (std::size_t i = 0; i < blocks_[b].intra.size(); ++i) {
      for (auto& [suffix, t] : blocks_[b].intra[i].named()) {
        params_.add(prefix + "intra[" + std::to_string(i) + "]." + suffix, t);
      }
    }
    for (std::size_t i = 0; i < blocks_[b].inter.size(); ++i) {
      for (auto& [suffix, t] : blocks_[b].inter[i].named()) {
        params_.add(prefix + "inter[" + std::to_string(i) + "]." + suffix, t);
      }
    }
  }
  params_.add("post.linear.weight", post_weight_);
  params_.add("post.linear.bias", post_bias_);
  params_.add("post.prelu.slope", post_slope_);
  params_.add("head.linear1.weight", head_w1_);
  params_.add("head.linear1.bias", head_b1_);
  params_.add("head.linear2.weight", head_w2_);
  params_.add("head.linear2.bias", head_b2_);
  params_.add("decoder.kernels", decoder_kernels_);
}

template <typename T>
Tensor<T> Model<T>::encode(const Tensor<T>& wave) const {
  return tsep::encode(wave, encoder_kernels_, cfg_.encoder);
}

template <typename T>
Tensor<T> Model<T>::preprocess(const Tensor<T>& latent) const {
  return ops::linear(ops::layer_norm(latent, pre_norm_gamma_, pre_norm_beta_), pre_weight_, pre_bias_);
}

template <typename T>
ChunkTensor<T> Model<T>::ca_stack(const ChunkTensor<T>& hs, AttentionTrace<T>* trace) const {
  const DualBlockShape shape = cfg_.block_shape();
  ChunkTensor<T> h = hs;
  for (std::size_t b = 0; b < blocks_.size(); ++b) h = dual_ca_block(h, blocks_[b], shape, trace, b);
  return h;
}

template <typename T>
ChunkTensor<T> Model<T>::postprocess(const ChunkTensor<T>& hca) const {
  return {ops::prelu(ops::linear(hca.data, post_weight_, post_bias_), post_slope_), hca.layout};
}

template <typename T>
std::vector<Tensor<T>> Model<T>::mask_head(const Tensor<T>& ho) const {
  const std::size_t d = cfg_.width(), k = cfg_.speakers;
  if (ho.rank() != 2 || ho.extent(1) % k != 0 || ho.extent(1) / k != d) {
    throw ContractError("mask_head: channel extent of " + shape_str(ho.shape()) + " is not " + std::to_string(k) +
                        " x " + std::to_string(d));
  }
  std::vector<Tensor<T>> masks;
  for (std::size_t s = 0; s < k; ++s) {
    auto hk = ops::slice(ho, 1, s * d, (s + 1) * d);
    auto hidden = ops::relu(ops::linear(hk, head_w1_, head_b1_));
    masks.push_back(ops::relu(ops::linear(hidden, head_w2_, head_b2_)));
  }
  return masks;
}

template <typename T>
Tensor<T> Model<T>::decode(const Tensor<T>& mask, const Tensor<T>& latent) const {
  return tsep::decode(mask, latent, decoder_kernels_, cfg_.encoder);
}

template <typename T>
Separation<T> Model<T>::separate(const Tensor<T>& wave, AttentionTrace<T>* trace) const {
  if (wave.rank() != 1) throw DimensionError("separate: waveform must be rank 1");
  const auto& enc = cfg_.encoder;
  const std::size_t n = wave.size();
  const std::size_t frames = enc.latent_length(n);
  std::size_t aligned = enc.decoded_length(frames);
  if (aligned < n) aligned += enc.stride;
  Tensor<T> padded = aligned == n ? wave : ops::fit_length(wave, aligned);

  Separation<T> out;
  out.latent = encode(padded);
  auto hd = preprocess(out.latent);
  auto hs = segment(hd, cfg_.chunk);
  auto hdk = postprocess(ca_stack(hs, trace));
  auto ho = overlap_add(hdk);
  out.masks = mask_head(ho);
  for (const auto& m : out.masks) out.estimates.push_back(ops::fit_length(decode(m, out.latent), n));
  return out;
}

template <typename T>
void Model<T>::assign(const std::string& name, std::span<const T> values) {
  const Parameter<T>* p = params_.find(name);
  if (!p) throw ContractError("unknown parameter: " + name);
  Tensor<T> t = p->tensor;
  if (t.size() != values.size()) {
    throw DimensionError("parameter " + name + " holds " + std::to_string(t.size()) + " values, given " +
                         std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), t.mutable_data().begin());
}

template class Model<float>;
template class Model<double>;

}  // namespace tsep

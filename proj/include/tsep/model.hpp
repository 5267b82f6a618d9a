// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tsep/ca_block.hpp"
#include "tsep/chunking.hpp"
#include "tsep/codec.hpp"
#include "tsep/params.hpp"

namespace tsep {

struct ModelConfig {
  EncoderConfig encoder;  // encoder.filters is the model width D
  std::size_t chunk = 250;
  std::size_t speakers = 2;
  std::size_t blocks = 2;  // N_mask
  std::size_t intra_repeats = 4;
  std::size_t inter_repeats = 4;
  CAConfig intra{256, 128, 128, 8, 51, 1024};
  CAConfig inter{256, 128, 128, 8, 11, 1024};
  bool shared = false;
  std::uint32_t sample_rate = 8000;

  std::size_t width() const { return encoder.filters; }
  DualBlockShape block_shape() const;
  void validate() const;
};

template <typename T>
struct Separation {
  std::vector<Tensor<T>> estimates;  // K x [T], input length
  std::vector<Tensor<T>> masks;      // K x [T_lat, D], non-negative
  Tensor<T> latent;                  // [T_lat, D]
};

// Encoder, masking network and decoder with their parameters. Not copyable:
// tensors are handles and a copy would alias the weights.
template <typename T>
class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return cfg_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }

  // Stages of the masking network, exposed for testing.
  Tensor<T> encode(const Tensor<T>& wave) const;
  Tensor<T> preprocess(const Tensor<T>& latent) const;
  ChunkTensor<T> ca_stack(const ChunkTensor<T>& hs, AttentionTrace<T>* trace = nullptr) const;
  ChunkTensor<T> postprocess(const ChunkTensor<T>& hca) const;
  std::vector<Tensor<T>> mask_head(const Tensor<T>& ho) const;
  Tensor<T> decode(const Tensor<T>& mask, const Tensor<T>& latent) const;

  // Full pipeline. The input is zero-padded so the encoder frames tile it
  // and every estimate is cut back to the input length.
  Separation<T> separate(const Tensor<T>& wave, AttentionTrace<T>* trace = nullptr) const;

  // Overwrites a parameter's values by name (checkpoint load, test setup).
  void assign(const std::string& name, std::span<const T> values);

  const std::vector<DualBlockParams<T>>& blocks() const { return blocks_; }

 private:
  void register_all();

  ModelConfig cfg_;
  ParameterSet<T> params_;
  Tensor<T> encoder_kernels_;
  Tensor<T> pre_norm_gamma_, pre_norm_beta_, pre_weight_, pre_bias_;
  std::vector<DualBlockParams<T>> blocks_;
  Tensor<T> post_weight_, post_bias_, post_slope_;
  Tensor<T> head_w1_, head_b1_, head_w2_, head_b2_;
  Tensor<T> decoder_kernels_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace tsep

// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsep/model.hpp"

namespace tsep {

// Bias-free per-block counts for attention and depthwise-separable
// convolution at width D with kernel size K:
//   mha = 4 D^2, sepconv = K D + D^2, serial = K D + 5 D^2,
//   parallel = 4 Da^2 + K Dc + Dc^2 (= K/2 D + 5/4 D^2 for Da = Dc = D/2).
struct Table1Counts {
  std::uint64_t mha = 0;
  std::uint64_t sepconv = 0;
  std::uint64_t serial = 0;
  std::uint64_t parallel = 0;
};

// Even split Da = Dc = D / 2; D must be even.
Table1Counts count_table1(std::uint64_t width, std::uint64_t kernel);
Table1Counts count_table1(std::uint64_t width, std::uint64_t kernel, std::uint64_t attn_channels,
                          std::uint64_t conv_channels);
// (5 D^2 + 2 K D) / 4 evaluated directly; throws ConfigError if not integral.
std::uint64_t parallel_closed_form(std::uint64_t width, std::uint64_t kernel);

// Everything one CA layer instantiates.
struct LayerCount {
  std::uint64_t attention = 0;       // Wq, Wk, Wv, Wo
  std::uint64_t attention_norm = 0;
  std::uint64_t conv = 0;            // depthwise + pointwise weights
  std::uint64_t conv_bias = 0;
  std::uint64_t conv_norm = 0;
  std::uint64_t ffn = 0;             // both linears with biases
  std::uint64_t out_norm = 0;

  std::uint64_t total() const {
    return attention + attention_norm + conv + conv_bias + conv_norm + ffn + out_norm;
  }
};

LayerCount count_layer(const CAConfig& cfg);

struct ParamReport {
  std::uint64_t encoder = 0;
  std::uint64_t preprocess = 0;
  LayerCount intra_layer;
  LayerCount inter_layer;
  std::uint64_t intra_sets_per_block = 0;  // unique IntraCA layer sets per block
  std::uint64_t inter_sets_per_block = 0;
  std::uint64_t masking_layers = 0;        // all CA parameters over all blocks
  std::uint64_t postprocess = 0;
  std::uint64_t mask_head = 0;
  std::uint64_t decoder = 0;
  std::uint64_t total_analytic = 0;
  std::uint64_t total_empirical = 0;       // 0 until count_empirical fills it
  Table1Counts table1_intra;
  Table1Counts table1_inter;
};

ParamReport count_model(const ModelConfig& cfg);

// Sum of extents over the unique parameter tensors of an instantiated model.
template <typename T>
std::uint64_t count_empirical(const Model<T>& model);

std::string report_text(const ParamReport& r);
std::string report_kv(const ParamReport& r);

// Model-size configurations at width 256: Sepformer-style pure attention
// baselines and the CA variants with and without sharing.
struct SizePreset {
  std::string name;
  ModelConfig config;
  double reported_millions;
};

ModelConfig sepformer_config(std::size_t blocks, std::size_t repeats);
ModelConfig tiny_config(std::size_t blocks, std::size_t repeats, bool shared);
std::vector<SizePreset> size_presets();

}  // namespace tsep

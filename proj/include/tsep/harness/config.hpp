// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "tsep/model.hpp"
#include "tsep/optim.hpp"

namespace tsep::harness {

enum class SourceKind { kSinusoid, kNoiseBand };
enum class Precision { kFloat, kDouble };

// Synthetic mixtures: source k lives in the k-th of `speakers` equal slices
// of [freq_min, freq_max].
struct DataSpec {
  std::size_t length = 512;
  SourceKind kind = SourceKind::kSinusoid;
  double freq_min = 100.0;
  double freq_max = 3800.0;
  double snr_min_db = 0.0;  // level of sources 2..K relative to source 1
  double snr_max_db = 0.0;
  std::size_t count = 32;   // mixtures in the pool
  std::uint64_t seed = 1;
  std::size_t max_length = 0;  // 0 = no cap
};

struct TrainSpec {
  std::size_t steps = 500;
  std::size_t batch = 4;
  AdamHyper adam;
  std::uint64_t seed = 1;  // model initialization
  Precision precision = Precision::kFloat;
  std::string output_dir = ".";
  std::string resume;  // checkpoint to continue from, empty for a fresh run
  std::size_t log_every = 50;
};

struct EvalSpec {
  std::size_t count = 32;
  std::uint64_t seed = 1001;
};

struct GradCheckSpec {
  std::size_t coordinates = 256;
  std::size_t length = 256;
  std::uint64_t seed = 7;
  double threshold = 1e-5;
  double step = 1e-6;   // relative to max(1, |theta|)
  double floor = 1e-3;  // denominator floor of the relative error
};

struct RunConfig {
  ModelConfig model;
  DataSpec data;
  TrainSpec train;
  EvalSpec eval;
  GradCheckSpec grad_check;
};

// Flat "section.key = value" text; '#' starts a comment. Unknown or repeated
// keys and malformed values throw ConfigError naming the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Canonical text with every key, in a fixed order. parse_config(to_text(c))
// reproduces c.
std::string to_text(const RunConfig& cfg);
std::string model_to_text(const ModelConfig& cfg);
ModelConfig parse_model(std::string_view text);

std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t config_hash(const RunConfig& cfg);
std::string hex64(std::uint64_t v);

}  // namespace tsep::harness

// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsep/harness/config.hpp"
#include "tsep/harness/synth.hpp"
#include "tsep/model.hpp"

namespace tsep::harness {

struct TrainReport {
  std::size_t start_step = 0;   // nonzero when resumed
  std::vector<double> losses;   // loss before the update at start_step + i
  double initial_si_snri = 0;   // train pool, before the first update of this run
  double final_si_snri = 0;     // train pool, after the last update
  double final_sdri = 0;
  double wall_seconds = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t loss_hash = 0;  // FNV-1a over the loss curve bytes
  std::uint64_t seed = 0;
  std::string checkpoint;
};

// Trains per cfg.train, then writes checkpoint.tsep, train_report.txt and
// train_report.kv into cfg.train.output_dir. A non-finite loss throws
// NumericError naming the step.
TrainReport train(const RunConfig& cfg, std::ostream* log = nullptr);
std::string report_text(const TrainReport& r);
std::string report_kv(const TrainReport& r);

struct EvalReport {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double si_snri_mean = 0, si_snri_std = 0;
  double sdri_mean = 0, sdri_std = 0;
};

using Separator = std::function<std::vector<std::vector<double>>(const std::vector<double>& mixture)>;

// uPIT-aligned SI-SNRi and SDRi over `count` mixtures of (spec, seed).
EvalReport evaluate(const Separator& separator, const DataSpec& spec, std::size_t speakers,
                    std::uint32_t sample_rate, std::uint64_t seed, std::size_t count);
template <typename T>
EvalReport evaluate(const Model<T>& model, const DataSpec& spec, std::uint64_t seed, std::size_t count);
// Loads the checkpoint and evaluates on cfg.eval; the held-out seed must
// differ from cfg.data.seed.
EvalReport evaluate_checkpoint(const std::string& checkpoint, const RunConfig& cfg);
std::string report_text(const EvalReport& r);
std::string report_kv(const EvalReport& r);

struct GradCheckReport {
  double max_error = 0;
  std::string worst;  // "name[index]"
  double worst_analytic = 0, worst_numeric = 0;
  std::size_t checked = 0;
  std::size_t retried = 0;     // stencil straddled a kink, re-measured with a 1000x smaller step
  std::size_t unresolved = 0;  // still straddling after the retry
  std::size_t groups_covered = 0, groups_total = 0;
  double threshold = 0;
  bool passed = false;
};

// Central differences on a random coordinate subsample. Every tensor gets at
// least one coordinate; the rest are drawn uniformly without replacement.
GradCheckReport check_gradients(const std::function<Tensor<double>()>& loss_fn, ParameterSet<double>& params,
                                const GradCheckSpec& spec);
// Double-precision model from cfg.model, uPIT loss on one synthetic mixture
// of grad_check.length samples.
GradCheckReport grad_check(const RunConfig& cfg);
std::string report_text(const GradCheckReport& r);
std::string report_kv(const GradCheckReport& r);

struct AttentionSelector {
  std::size_t block = 0;
  bool inter = false;
  std::size_t iteration = 0;
  std::size_t head = 0;
};

// "block:intra|inter:iteration:head", e.g. "0:inter:0:1".
AttentionSelector parse_selector(const std::string& text);
std::string selector_text(const AttentionSelector& s);

struct AttentionDump {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<double>> maps;  // one row-major rows x cols map per chunk (intra) or position (inter)
};

// IntraCA maps are S x S (one per chunk), InterCA maps T_S x T_S (one per
// position). Out-of-range selectors throw ContractError.
template <typename T>
AttentionDump extract_attention(const Model<T>& model, const std::vector<double>& wave, const AttentionSelector& sel);
// Writes attention_<selector>.txt into outdir and returns its path.
std::string write_attention(const std::string& outdir, const AttentionSelector& sel, const AttentionDump& dump);
std::string dump_attention(const std::string& checkpoint, const std::string& wav, const std::string& selector,
                           const std::string& outdir);

// Writes <stem>_s<k>.wav for k = 1..K and returns the paths. The input must
// be at the checkpoint's sample rate.
std::vector<std::string> separate_files(const std::string& checkpoint, const std::string& wav,
                                        const std::string& outdir);

}  // namespace tsep::harness

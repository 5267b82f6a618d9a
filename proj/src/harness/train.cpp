// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "tsep/harness/checkpoint.hpp"
#include "tsep/harness/run.hpp"
#include "tsep/metrics.hpp"
#include "tsep/ops.hpp"
#include "tsep/optim.hpp"

namespace tsep::harness {
namespace {

template <typename T>
Tensor<T> to_tensor(const std::vector<double>& v) {
  Tensor<T> t(Shape{v.size()});
  auto d = t.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = static_cast<T>(v[i]);
  return t;
}

template <typename T>
Separator model_separator(const Model<T>& model) {
  return [&model](const std::vector<double>& mixture) {
    NoGradGuard no_grad;
    auto sep = model.separate(to_tensor<T>(mixture));
    std::vector<std::vector<double>> out;
    for (const auto& e : sep.estimates) out.push_back(to_double(e));
    return out;
  };
}

struct PoolScore {
  double si_snri = 0, sdri = 0;
};

template <typename T>
PoolScore score_pool(const Model<T>& model, const std::vector<Mixture>& pool) {
  auto sep = model_separator(model);
  PoolScore s;
  for (const auto& m : pool) {
    auto imp = improvement(sep(m.mixture), m.sources, m.mixture);
    s.si_snri += imp.si_snri;
    s.sdri += imp.sdri;
  }
  s.si_snri /= static_cast<double>(pool.size());
  s.sdri /= static_cast<double>(pool.size());
  return s;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << body;
  if (!out) throw Error(path + ": write failed");
}

// Hash of the settings that determine the loss curve; output locations are
// left out so the same run in two directories hashes the same.
std::uint64_t run_hash(RunConfig cfg) {
  cfg.train.output_dir.clear();
  cfg.train.resume.clear();
  return config_hash(cfg);
}

template <typename T>
TrainReport train_impl(const RunConfig& cfg, std::ostream* log) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t speakers = cfg.model.speakers;
  const auto pool = gen_pool(cfg.data, speakers, cfg.model.sample_rate, cfg.data.seed, cfg.data.count);

  std::unique_ptr<Model<T>> model;
  Checkpoint resume;
  if (!cfg.train.resume.empty()) {
    resume = read_checkpoint(cfg.train.resume);
    if (model_to_text(resume.config) != model_to_text(cfg.model)) {
      throw ConfigError("resume: checkpoint model config differs from the run config");
    }
    if (!has_optimizer_state(resume)) throw FormatError(cfg.train.resume + ": no optimizer state to resume from");
    model = std::make_unique<Model<T>>(restore_model<T>(resume));
  } else {
    model = std::make_unique<Model<T>>(cfg.model, cfg.train.seed);
  }
  Adam<T> adam(model->params(), cfg.train.adam);
  if (!cfg.train.resume.empty()) restore_optimizer(resume, adam, model->params());

  TrainReport r;
  r.seed = cfg.train.seed;
  r.config_hash = run_hash(cfg);
  r.start_step = adam.steps();
  r.initial_si_snri = score_pool(*model, pool).si_snri;
  if (log) *log << "start step " << r.start_step << ", train SI-SNRi " << r.initial_si_snri << " dB\n";

  const std::size_t batch = cfg.train.batch;
  for (std::size_t step = r.start_step; step < cfg.train.steps; ++step) {
    double value = 0;
    try {
      model->params().zero_grad();
      Tensor<T> total;
      for (std::size_t j = 0; j < batch; ++j) {
        const Mixture& m = pool[(step * batch + j) % pool.size()];
        auto loss = upit_loss(model->separate(to_tensor<T>(m.mixture)).estimates, m.sources).loss;
        total = total.defined() ? ops::add(total, loss) : loss;
      }
      auto mean = ops::scale(total, 1.0 / static_cast<double>(batch));
      value = mean.item();
      if (!std::isfinite(value)) throw NumericError("loss is " + std::to_string(value));
      mean.backward();
      adam.step();
    } catch (const NumericError& e) {
      throw NumericError("training aborted at step " + std::to_string(step) + ": " + e.what());
    }
    r.losses.push_back(value);
    if (log && cfg.train.log_every && (step + 1) % cfg.train.log_every == 0) {
      *log << "step " << step + 1 << " loss " << value << "\n";
    }
  }

  const auto final_score = score_pool(*model, pool);
  r.final_si_snri = final_score.si_snri;
  r.final_sdri = final_score.sdri;
  std::string curve(reinterpret_cast<const char*>(r.losses.data()), r.losses.size() * sizeof(double));
  r.loss_hash = fnv1a(curve);

  std::filesystem::create_directories(cfg.train.output_dir);
  const std::filesystem::path dir(cfg.train.output_dir);
  r.checkpoint = (dir / "checkpoint.tsep").string();
  write_checkpoint(r.checkpoint, snapshot(*model, &adam));
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file((dir / "train_report.txt").string(), report_text(r));
  write_file((dir / "train_report.kv").string(), report_kv(r));
  if (log) *log << "final train SI-SNRi " << r.final_si_snri << " dB, checkpoint " << r.checkpoint << "\n";
  return r;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, double mean) {
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TrainReport train(const RunConfig& cfg, std::ostream* log) {
  return cfg.train.precision == Precision::kFloat ? train_impl<float>(cfg, log) : train_impl<double>(cfg, log);
}

std::string report_text(const TrainReport& r) {
  std::ostringstream os;
  os << "steps              " << r.start_step << " -> " << r.start_step + r.losses.size() << "\n";
  if (!r.losses.empty()) os << "loss               " << r.losses.front() << " -> " << r.losses.back() << "\n";
  os << "train SI-SNRi      " << r.initial_si_snri << " -> " << r.final_si_snri << " dB\n"
     << "train SDRi         " << r.final_sdri << " dB\n"
     << "wall time          " << r.wall_seconds << " s\n"
     << "seed               " << r.seed << "\n"
     << "config hash        " << hex64(r.config_hash) << "\n"
     << "loss hash          " << hex64(r.loss_hash) << "\n"
     << "checkpoint         " << r.checkpoint << "\n";
  return os.str();
}

std::string report_kv(const TrainReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "start_step = " << r.start_step << "\n"
     << "steps_run = " << r.losses.size() << "\n"
     << "initial_si_snri = " << r.initial_si_snri << "\n"
     << "final_si_snri = " << r.final_si_snri << "\n"
     << "final_sdri = " << r.final_sdri << "\n"
     << "wall_seconds = " << r.wall_seconds << "\n"
     << "seed = " << r.seed << "\n"
     << "config_hash = " << hex64(r.config_hash) << "\n"
     << "loss_hash = " << hex64(r.loss_hash) << "\n"
     << "checkpoint = " << r.checkpoint << "\n";
  for (std::size_t i = 0; i < r.losses.size(); ++i) os << "loss." << r.start_step + i << " = " << r.losses[i] << "\n";
  return os.str();
}

EvalReport evaluate(const Separator& separator, const DataSpec& spec, std::size_t speakers,
                    std::uint32_t sample_rate, std::uint64_t seed, std::size_t count) {
  std::vector<double> si, sd;
  for (std::size_t i = 0; i < count; ++i) {
    const Mixture m = gen_mixture(spec, speakers, sample_rate, seed, i);
    auto imp = improvement(separator(m.mixture), m.sources, m.mixture);
    si.push_back(imp.si_snri);
    sd.push_back(imp.sdri);
  }
  EvalReport r;
  r.count = count;
  r.seed = seed;
  r.si_snri_mean = mean_of(si);
  r.si_snri_std = std_of(si, r.si_snri_mean);
  r.sdri_mean = mean_of(sd);
  r.sdri_std = std_of(sd, r.sdri_mean);
  return r;
}

template <typename T>
EvalReport evaluate(const Model<T>& model, const DataSpec& spec, std::uint64_t seed, std::size_t count) {
  const auto& c = model.config();
  return evaluate(model_separator(model), spec, c.speakers, c.sample_rate, seed, count);
}

template EvalReport evaluate(const Model<float>&, const DataSpec&, std::uint64_t, std::size_t);
template EvalReport evaluate(const Model<double>&, const DataSpec&, std::uint64_t, std::size_t);

EvalReport evaluate_checkpoint(const std::string& checkpoint, const RunConfig& cfg) {
  if (cfg.eval.seed == cfg.data.seed) {
    throw ConfigError("eval.seed equals data.seed; evaluation needs held-out mixtures");
  }
  const auto model = restore_model<float>(read_checkpoint(checkpoint));
  return evaluate(model, cfg.data, cfg.eval.seed, cfg.eval.count);
}

std::string report_text(const EvalReport& r) {
  std::ostringstream os;
  os << "mixtures           " << r.count << " (seed " << r.seed << ")\n"
     << "SI-SNRi            " << r.si_snri_mean << " +- " << r.si_snri_std << " dB\n"
     << "SDRi               " << r.sdri_mean << " +- " << r.sdri_std << " dB\n";
  return os.str();
}

std::string report_kv(const EvalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "count = " << r.count << "\n"
     << "seed = " << r.seed << "\n"
     << "si_snri_mean = " << r.si_snri_mean << "\n"
     << "si_snri_std = " << r.si_snri_std << "\n"
     << "sdri_mean = " << r.sdri_mean << "\n"
     << "sdri_std = " << r.sdri_std << "\n";
  return os.str();
}

}  // namespace tsep::harness

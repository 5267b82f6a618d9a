// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "tsep/harness/config.hpp"
#include "tsep/harness/run.hpp"
#include "tsep/param_count.hpp"

namespace {

using namespace tsep;
using namespace tsep::harness;

void write_pair(const std::string& dir, const std::string& stem, const std::string& text, const std::string& kv) {
  std::filesystem::create_directories(dir);
  std::ofstream(std::filesystem::path(dir) / (stem + ".txt")) << text;
  std::ofstream(std::filesystem::path(dir) / (stem + ".kv")) << kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsep: convolution-attention speech separation at desk scale"};
  app.require_subcommand(1);

  std::string config, checkpoint, wav, outdir, selector, report_dir;

  auto* train_cmd = app.add_subcommand("train", "train a model; writes checkpoint and reports");
  train_cmd->add_option("config", config, "run config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--output-dir", outdir, "overrides train.output_dir");
  train_cmd->add_option("--resume", checkpoint, "overrides train.resume");

  auto* sep_cmd = app.add_subcommand("separate", "separate a mono 16-bit WAV into K files");
  sep_cmd->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  sep_cmd->add_option("input", wav)->required()->check(CLI::ExistingFile);
  sep_cmd->add_option("outdir", outdir)->required();

  auto* eval_cmd = app.add_subcommand("eval", "SI-SNRi and SDRi on held-out synthetic mixtures");
  eval_cmd->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("config", config)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--report-dir", report_dir, "also write eval_report.txt/.kv here");

  auto* grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient check in double precision");
  grad_cmd->add_option("config", config)->required()->check(CLI::ExistingFile);
  grad_cmd->add_option("--report-dir", report_dir, "also write grad_check.txt/.kv here");

  auto* count_cmd = app.add_subcommand("count-params", "analytic and instantiated parameter counts");
  count_cmd->add_option("config", config)->required()->check(CLI::ExistingFile);
  bool kv_format = false;
  count_cmd->add_flag("--kv", kv_format, "print key = value lines");

  auto* attn_cmd = app.add_subcommand("dump-attention", "write attention maps for one layer and head");
  attn_cmd->add_option("checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  attn_cmd->add_option("input", wav)->required()->check(CLI::ExistingFile);
  attn_cmd->add_option("selector", selector, "block:intra|inter:iteration:head")->required();
  attn_cmd->add_option("outdir", outdir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      RunConfig cfg = load_config(config);
      if (!outdir.empty()) cfg.train.output_dir = outdir;
      if (!checkpoint.empty()) cfg.train.resume = checkpoint;
      const auto r = train(cfg, &std::cout);
      std::cout << report_text(r);
    } else if (*sep_cmd) {
      for (const auto& p : separate_files(checkpoint, wav, outdir)) std::cout << p << "\n";
    } else if (*eval_cmd) {
      const auto r = evaluate_checkpoint(checkpoint, load_config(config));
      std::cout << report_text(r);
      if (!report_dir.empty()) write_pair(report_dir, "eval_report", report_text(r), report_kv(r));
    } else if (*grad_cmd) {
      const auto r = grad_check(load_config(config));
      std::cout << report_text(r);
      if (!report_dir.empty()) write_pair(report_dir, "grad_check", report_text(r), report_kv(r));
      if (!r.passed) {
        std::cerr << "grad-check failed: worst coordinate " << r.worst << " (relative error " << r.max_error
                  << ")\n";
        return 1;
      }
    } else if (*count_cmd) {
      const RunConfig cfg = load_config(config);
      ParamReport r = count_model(cfg.model);
      r.total_empirical = count_empirical(Model<float>(cfg.model, cfg.train.seed));
      std::cout << (kv_format ? tsep::report_kv(r) : tsep::report_text(r));
    } else if (*attn_cmd) {
      std::cout << dump_attention(checkpoint, wav, selector, outdir) << "\n";
    }
  } catch (const tsep::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

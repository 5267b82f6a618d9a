// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "tsep/harness/checkpoint.hpp"
#include "tsep/harness/run.hpp"
#include "tsep/harness/wav.hpp"
#include "tsep/metrics.hpp"

namespace tsep::harness {
namespace {

struct Probe {
  double central = 0;
  bool kink = false;
};

template <typename T>
Tensor<T> to_tensor(const std::vector<double>& v) {
  Tensor<T> t(Shape{v.size()});
  auto d = t.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = static_cast<T>(v[i]);
  return t;
}

Waveform read_matching(const std::string& wav, std::uint32_t sample_rate) {
  Waveform w = read_wav(wav);
  if (w.sample_rate != sample_rate) {
    throw FormatError(wav + ": sample_rate " + std::to_string(w.sample_rate) + " does not match the model's " +
                      std::to_string(sample_rate));
  }
  return w;
}

}  // namespace

GradCheckReport check_gradients(const std::function<Tensor<double>()>& loss_fn, ParameterSet<double>& params,
                                const GradCheckSpec& spec) {
  auto& items = params.items();
  params.zero_grad();
  const double f0 = loss_fn().item();
  loss_fn().backward();

  // One coordinate per tensor, then uniform draws over all scalars.
  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : items) {
    offsets.push_back(total);
    total += p.tensor.size();
  }
  std::set<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t g = 0; g < items.size(); ++g) {
    picks.insert({g, std::uniform_int_distribution<std::size_t>(0, items[g].tensor.size() - 1)(rng)});
  }
  const std::size_t target = std::min(std::max(spec.coordinates, items.size()), total);
  std::uniform_int_distribution<std::size_t> flat(0, total - 1);
  while (picks.size() < target) {
    const std::size_t f = flat(rng);
    const std::size_t g = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), f) - offsets.begin()) - 1;
    picks.insert({g, f - offsets[g]});
  }

  GradCheckReport r;
  r.threshold = spec.threshold;
  r.groups_total = items.size();
  std::vector<bool> covered(items.size(), false);
  NoGradGuard no_grad;
  for (const auto& [g, i] : picks) {
    auto data = items[g].tensor.mutable_data();
    const double analytic = items[g].tensor.grad()[i];
    auto probe = [&](double h) {
      const double orig = data[i];
      data[i] = orig + h;
      const double up = loss_fn().item();
      data[i] = orig - h;
      const double down = loss_fn().item();
      data[i] = orig;
      const double fwd = (up - f0) / h, bwd = (f0 - down) / h;
      const bool kink = std::abs(fwd - bwd) > 1e-2 * std::max({std::abs(fwd), std::abs(bwd), spec.floor});
      return Probe{(up - down) / (2 * h), kink};
    };
    const double h = spec.step * std::max(1.0, std::abs(data[i]));
    Probe p = probe(h);
    if (p.kink) {
      ++r.retried;
      p = probe(h * 1e-3);
      if (p.kink) {
        ++r.unresolved;
        continue;
      }
    }
    const double err =
        std::abs(analytic - p.central) / std::max({std::abs(analytic), std::abs(p.central), spec.floor});
    if (err >= r.max_error) {
      r.max_error = err;
      r.worst = items[g].name + "[" + std::to_string(i) + "]";
      r.worst_analytic = analytic;
      r.worst_numeric = p.central;
    }
    ++r.checked;
    covered[g] = true;
  }
  r.groups_covered = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), true));
  r.passed = r.checked > 0 && r.max_error < spec.threshold && r.unresolved == 0 && r.groups_covered == r.groups_total;
  return r;
}

GradCheckReport grad_check(const RunConfig& cfg) {
  Model<double> model(cfg.model, cfg.train.seed);
  DataSpec data = cfg.data;
  data.length = cfg.grad_check.length;
  data.max_length = 0;
  const Mixture m = gen_mixture(data, cfg.model.speakers, cfg.model.sample_rate, cfg.grad_check.seed, 0);
  const auto wave = to_tensor<double>(m.mixture);
  auto loss = [&] { return upit_loss(model.separate(wave).estimates, m.sources).loss; };
  return check_gradients(loss, model.params(), cfg.grad_check);
}

std::string report_text(const GradCheckReport& r) {
  std::ostringstream os;
  os << "coordinates        " << r.checked << " checked, " << r.retried << " re-measured at a kink, " << r.unresolved
     << " unresolved\n"
     << "parameter groups   " << r.groups_covered << " / " << r.groups_total << "\n"
     << "max rel error      " << r.max_error << " (threshold " << r.threshold << ")\n"
     << "worst coordinate   " << r.worst << " analytic " << r.worst_analytic << " numeric " << r.worst_numeric
     << "\n"
     << "result             " << (r.passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string report_kv(const GradCheckReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "checked = " << r.checked << "\n"
     << "retried = " << r.retried << "\n"
     << "unresolved = " << r.unresolved << "\n"
     << "groups_covered = " << r.groups_covered << "\n"
     << "groups_total = " << r.groups_total << "\n"
     << "max_error = " << r.max_error << "\n"
     << "threshold = " << r.threshold << "\n"
     << "worst = " << r.worst << "\n"
     << "worst_analytic = " << r.worst_analytic << "\n"
     << "worst_numeric = " << r.worst_numeric << "\n"
     << "passed = " << (r.passed ? "true" : "false") << "\n";
  return os.str();
}

AttentionSelector parse_selector(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto number = [&](const std::string& s, const char* what) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("selector '" + text + "': " + what + " must be a non-negative integer");
    }
    return static_cast<std::size_t>(std::stoull(s));
  };
  if (parts.size() != 4) throw ConfigError("selector '" + text + "': expected block:intra|inter:iteration:head");
  AttentionSelector s;
  s.block = number(parts[0], "block");
  if (parts[1] == "intra") s.inter = false;
  else if (parts[1] == "inter") s.inter = true;
  else throw ConfigError("selector '" + text + "': second field must be intra or inter");
  s.iteration = number(parts[2], "iteration");
  s.head = number(parts[3], "head");
  return s;
}

std::string selector_text(const AttentionSelector& s) {
  return std::to_string(s.block) + ":" + (s.inter ? "inter" : "intra") + ":" + std::to_string(s.iteration) + ":" +
         std::to_string(s.head);
}

template <typename T>
AttentionDump extract_attention(const Model<T>& model, const std::vector<double>& wave, const AttentionSelector& sel) {
  const auto& c = model.config();
  const CAConfig& ca = sel.inter ? c.inter : c.intra;
  const std::size_t repeats = sel.inter ? c.inter_repeats : c.intra_repeats;
  const std::string kind = sel.inter ? "inter" : "intra";
  if (sel.block >= c.blocks) {
    throw ContractError("selector block " + std::to_string(sel.block) + " out of range (blocks: " +
                        std::to_string(c.blocks) + ")");
  }
  if (sel.iteration >= repeats) {
    throw ContractError("selector iteration " + std::to_string(sel.iteration) + " out of range (" + kind +
                        " repeats: " + std::to_string(repeats) + ")");
  }
  if (ca.attn_channels == 0) throw ContractError("selector: the " + kind + " layers have no attention path");
  if (sel.head >= ca.heads) {
    throw ContractError("selector head " + std::to_string(sel.head) + " out of range (heads: " +
                        std::to_string(ca.heads) + ")");
  }

  NoGradGuard no_grad;
  AttentionTrace<T> trace;
  model.separate(to_tensor<T>(wave), &trace);
  for (const auto& e : trace.entries) {
    if (e.block != sel.block || e.inter != sel.inter || e.iteration != sel.iteration) continue;
    const auto& w = e.weights;  // [B, heads, T, T]
    AttentionDump d;
    d.rows = w.extent(2);
    d.cols = w.extent(3);
    const std::size_t map = d.rows * d.cols;
    for (std::size_t b = 0; b < w.extent(0); ++b) {
      const std::size_t base = (b * w.extent(1) + sel.head) * map;
      d.maps.emplace_back(w.data().begin() + static_cast<std::ptrdiff_t>(base),
                          w.data().begin() + static_cast<std::ptrdiff_t>(base + map));
    }
    return d;
  }
  throw ContractError("selector " + selector_text(sel) + " produced no attention trace");
}

template AttentionDump extract_attention(const Model<float>&, const std::vector<double>&, const AttentionSelector&);
template AttentionDump extract_attention(const Model<double>&, const std::vector<double>&, const AttentionSelector&);

std::string write_attention(const std::string& outdir, const AttentionSelector& sel, const AttentionDump& dump) {
  std::filesystem::create_directories(outdir);
  const std::string name = "attention_b" + std::to_string(sel.block) + "_" + (sel.inter ? "inter" : "intra") + "_i" +
                           std::to_string(sel.iteration) + "_h" + std::to_string(sel.head) + ".txt";
  const std::string path = (std::filesystem::path(outdir) / name).string();
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot open for writing");
  out << "# selector " << selector_text(sel) << "\n"
      << "# rows " << dump.rows << " cols " << dump.cols << " maps " << dump.maps.size() << "\n";
  char buf[32];
  for (std::size_t m = 0; m < dump.maps.size(); ++m) {
    out << "# map " << m << "\n";
    for (std::size_t r = 0; r < dump.rows; ++r) {
      for (std::size_t c = 0; c < dump.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.9g", dump.maps[m][r * dump.cols + c]);
        out << (c ? " " : "") << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw Error(path + ": write failed");
  return path;
}

std::string dump_attention(const std::string& checkpoint, const std::string& wav, const std::string& selector,
                           const std::string& outdir) {
  const auto sel = parse_selector(selector);
  const auto model = restore_model<float>(read_checkpoint(checkpoint));
  const Waveform w = read_matching(wav, model.config().sample_rate);
  return write_attention(outdir, sel, extract_attention(model, w.samples, sel));
}

std::vector<std::string> separate_files(const std::string& checkpoint, const std::string& wav,
                                        const std::string& outdir) {
  const auto model = restore_model<float>(read_checkpoint(checkpoint));
  const Waveform in = read_matching(wav, model.config().sample_rate);
  std::vector<Tensor<float>> estimates;
  {
    NoGradGuard no_grad;
    estimates = model.separate(to_tensor<float>(in.samples)).estimates;
  }
  std::filesystem::create_directories(outdir);
  const std::string stem = std::filesystem::path(wav).stem().string();
  std::vector<std::string> paths;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    const std::string path = (std::filesystem::path(outdir) / (stem + "_s" + std::to_string(k + 1) + ".wav")).string();
    write_wav(path, Waveform{to_double(estimates[k]), in.sample_rate});
    paths.push_back(path);
  }
  return paths;
}

}  // namespace tsep::harness

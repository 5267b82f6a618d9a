// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace tsep::harness {
namespace {

struct Binding {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename U>
U parse_integer(const std::string& v) {
  U out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected an unsigned integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& v) {
  double out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::string real_text(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename U>
Binding integer(std::string key, U& field) {
  return {std::move(key), [&field](const std::string& v) { field = parse_integer<U>(v); },
          [&field] { return std::to_string(field); }};
}

Binding real(std::string key, double& field) {
  return {std::move(key), [&field](const std::string& v) { field = parse_real(v); },
          [&field] { return real_text(field); }};
}

Binding flag(std::string key, bool& field) {
  return {std::move(key), [&field](const std::string& v) { field = parse_bool(v); },
          [&field] { return std::string(field ? "true" : "false"); }};
}

Binding text(std::string key, std::string& field) {
  return {std::move(key), [&field](const std::string& v) { field = v; }, [&field] { return field; }};
}

void add_ca(std::vector<Binding>& b, const std::string& prefix, CAConfig& ca) {
  b.push_back(integer(prefix + ".conv_channels", ca.conv_channels));
  b.push_back(integer(prefix + ".attn_channels", ca.attn_channels));
  b.push_back(integer(prefix + ".heads", ca.heads));
  b.push_back(integer(prefix + ".kernel", ca.kernel));
  b.push_back(integer(prefix + ".ffn", ca.ffn_width));
}

std::vector<Binding> model_bindings(ModelConfig& m) {
  std::vector<Binding> b;
  b.push_back(integer("model.filters", m.encoder.filters));
  b.push_back(integer("model.kernel", m.encoder.kernel));
  b.push_back(integer("model.stride", m.encoder.stride));
  b.push_back(integer("model.chunk", m.chunk));
  b.push_back(integer("model.speakers", m.speakers));
  b.push_back(integer("model.blocks", m.blocks));
  b.push_back(integer("model.intra_repeats", m.intra_repeats));
  b.push_back(integer("model.inter_repeats", m.inter_repeats));
  b.push_back(flag("model.shared", m.shared));
  b.push_back(integer("model.sample_rate", m.sample_rate));
  add_ca(b, "model.intra", m.intra);
  add_ca(b, "model.inter", m.inter);
  return b;
}

std::vector<Binding> run_bindings(RunConfig& c) {
  auto b = model_bindings(c.model);
  b.push_back({"data.kind",
               [&c](const std::string& v) {
                 if (v == "sinusoid") c.data.kind = SourceKind::kSinusoid;
                 else if (v == "noise_band") c.data.kind = SourceKind::kNoiseBand;
                 else throw ConfigError("data.kind must be sinusoid or noise_band, got '" + v + "'");
               },
               [&c] { return std::string(c.data.kind == SourceKind::kSinusoid ? "sinusoid" : "noise_band"); }});
  b.push_back(integer("data.length", c.data.length));
  b.push_back(real("data.freq_min", c.data.freq_min));
  b.push_back(real("data.freq_max", c.data.freq_max));
  b.push_back(real("data.snr_min_db", c.data.snr_min_db));
  b.push_back(real("data.snr_max_db", c.data.snr_max_db));
  b.push_back(integer("data.count", c.data.count));
  b.push_back(integer("data.seed", c.data.seed));
  b.push_back(integer("data.max_length", c.data.max_length));
  b.push_back(integer("train.steps", c.train.steps));
  b.push_back(integer("train.batch", c.train.batch));
  b.push_back(real("train.lr", c.train.adam.lr));
  b.push_back(real("train.beta1", c.train.adam.beta1));
  b.push_back(real("train.beta2", c.train.adam.beta2));
  b.push_back(real("train.adam_eps", c.train.adam.eps));
  b.push_back(integer("train.seed", c.train.seed));
  b.push_back({"train.precision",
               [&c](const std::string& v) {
                 if (v == "float") c.train.precision = Precision::kFloat;
                 else if (v == "double") c.train.precision = Precision::kDouble;
                 else throw ConfigError("train.precision must be float or double, got '" + v + "'");
               },
               [&c] { return std::string(c.train.precision == Precision::kFloat ? "float" : "double"); }});
  b.push_back(text("train.output_dir", c.train.output_dir));
  b.push_back(text("train.resume", c.train.resume));
  b.push_back(integer("train.log_every", c.train.log_every));
  b.push_back(integer("eval.count", c.eval.count));
  b.push_back(integer("eval.seed", c.eval.seed));
  b.push_back(integer("grad_check.coordinates", c.grad_check.coordinates));
  b.push_back(integer("grad_check.length", c.grad_check.length));
  b.push_back(integer("grad_check.seed", c.grad_check.seed));
  b.push_back(real("grad_check.threshold", c.grad_check.threshold));
  b.push_back(real("grad_check.step", c.grad_check.step));
  b.push_back(real("grad_check.floor", c.grad_check.floor));
  return b;
}

void apply(std::vector<Binding>& bindings, std::string_view input) {
  std::map<std::string, Binding*> index;
  for (auto& b : bindings) index[b.key] = &b;
  std::set<std::string> seen;
  std::istringstream in{std::string(input)};
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "config line " + std::to_string(n) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "repeated key '" + key + "'");
    try {
      it->second->set(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
}

std::string render(const std::vector<Binding>& bindings) {
  std::string out;
  for (const auto& b : bindings) out += b.key + " = " + b.get() + "\n";
  return out;
}

void validate(const RunConfig& c) {
  c.model.validate();
  const auto& d = c.data;
  if (d.length == 0 || d.count == 0) throw ConfigError("data.length and data.count must be positive");
  if (!(d.freq_min >= 0 && d.freq_min < d.freq_max && d.freq_max <= c.model.sample_rate / 2.0)) {
    throw ConfigError("data: need 0 <= freq_min < freq_max <= sample_rate / 2");
  }
  if (d.snr_min_db > d.snr_max_db) throw ConfigError("data.snr_min_db exceeds data.snr_max_db");
  if (c.train.batch == 0) throw ConfigError("train.batch must be positive");
  c.train.adam.validate();
  if (c.eval.count == 0) throw ConfigError("eval.count must be positive");
  if (c.grad_check.coordinates == 0 || c.grad_check.length == 0) {
    throw ConfigError("grad_check.coordinates and grad_check.length must be positive");
  }
  if (!(c.grad_check.step > 0) || !(c.grad_check.threshold > 0) || !(c.grad_check.floor >= 0)) {
    throw ConfigError("grad_check: step and threshold must be positive, floor non-negative");
  }
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  auto b = run_bindings(cfg);
  apply(b, text);
  cfg.model.intra.width = cfg.model.encoder.filters;
  cfg.model.inter.width = cfg.model.encoder.filters;
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& cfg) {
  RunConfig copy = cfg;
  return render(run_bindings(copy));
}

std::string model_to_text(const ModelConfig& cfg) {
  ModelConfig copy = cfg;
  return render(model_bindings(copy));
}

ModelConfig parse_model(std::string_view text) {
  ModelConfig cfg;
  auto b = model_bindings(cfg);
  apply(b, text);
  cfg.intra.width = cfg.encoder.filters;
  cfg.inter.width = cfg.encoder.filters;
  cfg.validate();
  return cfg;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(to_text(cfg)); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace tsep::harness

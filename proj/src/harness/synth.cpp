// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/harness/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tsep/error.hpp"

namespace tsep::harness {
namespace {

constexpr std::size_t kNoiseTones = 24;

void normalize_rms(std::vector<double>& s) {
  double e = 0;
  for (double v : s) e += v * v;
  const double rms = std::sqrt(e / static_cast<double>(s.size()));
  if (rms > 0) {
    for (auto& v : s) v /= rms;
  }
}

}  // namespace

std::vector<double> sinusoid(std::size_t length, double freq_hz, std::uint32_t sample_rate, double phase) {
  std::vector<double> s(length);
  const double w = 2 * std::numbers::pi * freq_hz / sample_rate;
  for (std::size_t i = 0; i < length; ++i) s[i] = std::sin(w * static_cast<double>(i) + phase);
  return s;
}

std::vector<double> mix(const std::vector<std::vector<double>>& sources) {
  if (sources.empty()) return {};
  std::vector<double> m(sources.front().size(), 0.0);
  for (const auto& s : sources) {
    if (s.size() != m.size()) throw ContractError("mix: sources differ in length");
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += s[i];
  }
  return m;
}

std::pair<double, double> band(const DataSpec& spec, std::size_t speakers, std::size_t k) {
  const double width = (spec.freq_max - spec.freq_min) / static_cast<double>(speakers);
  return {spec.freq_min + width * static_cast<double>(k), spec.freq_min + width * static_cast<double>(k + 1)};
}

Mixture gen_mixture(const DataSpec& spec, std::size_t speakers, std::uint32_t sample_rate, std::uint64_t seed,
                    std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t length = spec.max_length ? std::min(spec.length, spec.max_length) : spec.length;

  Mixture m;
  for (std::size_t k = 0; k < speakers; ++k) {
    const auto [lo, hi] = band(spec, speakers, k);
    // keep 10% of the slice free on either side so bands never touch
    const double guard = 0.1 * (hi - lo);
    auto draw_freq = [&] { return lo + guard + unit(rng) * (hi - lo - 2 * guard); };
    std::vector<double> s(length, 0.0);
    if (spec.kind == SourceKind::kSinusoid) {
      const double f = draw_freq();
      s = sinusoid(length, f, sample_rate, 2 * std::numbers::pi * unit(rng));
    } else {
      for (std::size_t t = 0; t < kNoiseTones; ++t) {
        const double f = draw_freq();
        const auto tone = sinusoid(length, f, sample_rate, 2 * std::numbers::pi * unit(rng));
        const double amp = unit(rng);
        for (std::size_t i = 0; i < length; ++i) s[i] += amp * tone[i];
      }
    }
    normalize_rms(s);
    if (k > 0) {
      const double snr = spec.snr_min_db + unit(rng) * (spec.snr_max_db - spec.snr_min_db);
      const double gain = std::pow(10.0, -snr / 20.0);
      for (auto& v : s) v *= gain;
    }
    m.sources.push_back(std::move(s));
  }
  m.mixture = mix(m.sources);
  return m;
}

std::vector<Mixture> gen_pool(const DataSpec& spec, std::size_t speakers, std::uint32_t sample_rate,
                              std::uint64_t seed, std::size_t count) {
  std::vector<Mixture> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pool.push_back(gen_mixture(spec, speakers, sample_rate, seed, i));
  return pool;
}

}  // namespace tsep::harness

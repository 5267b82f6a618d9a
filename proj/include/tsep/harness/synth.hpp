// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "tsep/harness/config.hpp"

namespace tsep::harness {

struct Mixture {
  std::vector<double> mixture;
  std::vector<std::vector<double>> sources;  // as mixed, after level scaling
};

std::vector<double> sinusoid(std::size_t length, double freq_hz, std::uint32_t sample_rate, double phase = 0.0);

// Sample-wise sum of equal-length sources.
std::vector<double> mix(const std::vector<std::vector<double>>& sources);

// [lo, hi) of source k's frequency slice.
std::pair<double, double> band(const DataSpec& spec, std::size_t speakers, std::size_t k);

// Mixture `index` of the pool described by (spec, seed). Each source is drawn
// in its own band, normalized to unit RMS, then sources 2..K are scaled by
// 10^(-snr/20) with snr uniform in [snr_min_db, snr_max_db]. Depends only on
// (seed, index).
Mixture gen_mixture(const DataSpec& spec, std::size_t speakers, std::uint32_t sample_rate, std::uint64_t seed,
                    std::size_t index);

std::vector<Mixture> gen_pool(const DataSpec& spec, std::size_t speakers, std::uint32_t sample_rate,
                              std::uint64_t seed, std::size_t count);

}  // namespace tsep::harness

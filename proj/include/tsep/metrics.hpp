// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tsep/tensor.hpp"

namespace tsep {

inline constexpr double kSiSnrEps = 1e-8;

// Scale-invariant SNR in dB:
//   s = <est, tgt> / (|tgt|^2 + eps) * tgt,  e = est - s,
//   10 log10((|s|^2 + eps) / (|e|^2 + eps)).
// Both signals are mean-subtracted first unless zero_mean is false.
double si_snr(std::span<const double> est, std::span<const double> target, double eps = kSiSnrEps,
              bool zero_mean = true);

// Plain SNR of the residual, 10 log10((|tgt|^2 + eps) / (|est - tgt|^2 + eps)).
// Stands in for BSS-eval SDR; not scale invariant.
double sdr(std::span<const double> est, std::span<const double> target, double eps = kSiSnrEps);

struct PitResult {
  double loss = 0;                           // -mean SI-SNR of the chosen assignment
  std::vector<std::size_t> permutation;      // estimate index -> target index
  std::vector<std::vector<double>> per_pair;  // [estimate][target] SI-SNR
};

// Utterance-level PIT by exhaustive search over all K! assignments (K <= 4).
// Ties resolve to the lexicographically first permutation.
PitResult upit(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets);

struct Improvement {
  double si_snri = 0;
  double sdri = 0;
  std::vector<std::size_t> permutation;
};

// Improvements of the uPIT-aligned estimates over the unprocessed mixture,
// averaged over speakers.
Improvement improvement(const std::vector<std::vector<double>>& estimates,
                        const std::vector<std::vector<double>>& targets, std::span<const double> mixture);
double si_snri(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets,
               std::span<const double> mixture);
double sdri(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets,
            std::span<const double> mixture);

// Differentiable SI-SNR (dB) of a rank-1 estimate against a constant target.
template <typename T>
Tensor<T> si_snr(const Tensor<T>& est, std::span<const double> target, double eps = kSiSnrEps);

template <typename T>
struct PitLoss {
  Tensor<T> loss;  // scalar, -mean SI-SNR under the best assignment
  PitResult result;
};

template <typename T>
PitLoss<T> upit_loss(const std::vector<Tensor<T>>& estimates, const std::vector<std::vector<double>>& targets);

template <typename T>
std::vector<double> to_double(const Tensor<T>& t) {
  return std::vector<double>(t.data().begin(), t.data().end());
}

}  // namespace tsep

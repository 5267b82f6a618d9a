// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tsep/ops.hpp"

namespace tsep {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ContractError(std::string(op) + ": length mismatch " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

std::vector<double> centered(std::span<const double> x, bool zero_mean) {
  std::vector<double> out(x.begin(), x.end());
  if (zero_mean && !out.empty()) {
    const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(out.size());
    for (auto& v : out) v -= mean;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void check_sets(const std::vector<std::vector<double>>& est, const std::vector<std::vector<double>>& tgt) {
  if (est.size() != tgt.size()) {
    throw ContractError("upit: " + std::to_string(est.size()) + " estimates vs " + std::to_string(tgt.size()) +
                        " targets");
  }
  if (est.empty()) throw ContractError("upit: no sources");
  if (est.size() > 4) throw ContractError("upit: exhaustive search limited to 4 sources");
}

}  // namespace

double si_snr(std::span<const double> est, std::span<const double> target, double eps, bool zero_mean) {
  check_lengths(est.size(), target.size(), "si_snr");
  const auto e = centered(est, zero_mean);
  const auto t = centered(target, zero_mean);
  const double tt = dot(t, t);
  const double alpha = dot(e, t) / (tt + eps);
  double ss = 0, nn = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double s = alpha * t[i];
    const double n = e[i] - s;
    ss += s * s;
    nn += n * n;
  }
  return 10.0 * std::log10((ss + eps) / (nn + eps));
}

double sdr(std::span<const double> est, std::span<const double> target, double eps) {
  check_lengths(est.size(), target.size(), "sdr");
  double tt = 0, rr = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    tt += target[i] * target[i];
    const double r = est[i] - target[i];
    rr += r * r;
  }
  return 10.0 * std::log10((tt + eps) / (rr + eps));
}

PitResult upit(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets) {
  check_sets(estimates, targets);
  const std::size_t k = estimates.size();
  PitResult r;
  r.per_pair.assign(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) r.per_pair[i][j] = si_snr(estimates[i], targets[j]);
  }
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (std::size_t i = 0; i < k; ++i) total += r.per_pair[i][perm[i]];
    const double mean = total / static_cast<double>(k);
    if (mean > best) {
      best = mean;
      r.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  r.loss = -best;
  return r;
}

Improvement improvement(const std::vector<std::vector<double>>& estimates,
                        const std::vector<std::vector<double>>& targets, std::span<const double> mixture) {
  const PitResult pit = upit(estimates, targets);
  Improvement out;
  out.permutation = pit.permutation;
  const double k = static_cast<double>(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& tgt = targets[pit.permutation[i]];
    out.si_snri += (pit.per_pair[i][pit.permutation[i]] - si_snr(mixture, tgt)) / k;
    out.sdri += (sdr(estimates[i], tgt) - sdr(mixture, tgt)) / k;
  }
  return out;
}

double si_snri(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets,
               std::span<const double> mixture) {
  return improvement(estimates, targets, mixture).si_snri;
}

double sdri(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& targets,
            std::span<const double> mixture) {
  return improvement(estimates, targets, mixture).sdri;
}

template <typename T>
Tensor<T> si_snr(const Tensor<T>& est, std::span<const double> target, double eps) {
  if (est.rank() != 1) throw DimensionError("si_snr: estimate must be rank 1");
  check_lengths(est.size(), target.size(), "si_snr");
  const std::size_t n = est.size();
  const auto e = centered(to_double(est), true);
  auto t = centered(target, true);
  const double tt = dot(t, t);
  const double et = dot(e, t);
  const double alpha = et / (tt + eps);
  std::vector<double> noise(n);
  double ss = alpha * alpha * tt, nn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    noise[i] = e[i] - alpha * t[i];
    nn += noise[i] * noise[i];
  }
  const double value = 10.0 * std::log10((ss + eps) / (nn + eps));

  // d|s|^2/de = 2 alpha tt t / (tt + eps);  d|n|^2/de = 2 (n - t <n,t> / (tt + eps)).
  const double nt = dot(noise, t);
  const double c = 10.0 / std::log(10.0);
  std::vector<double> g(n);
  double gmean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dss = 2.0 * alpha * tt * t[i] / (tt + eps);
    const double dnn = 2.0 * (noise[i] - t[i] * nt / (tt + eps));
    g[i] = c * (dss / (ss + eps) - dnn / (nn + eps));
    gmean += g[i];
  }
  gmean /= static_cast<double>(n);
  for (auto& v : g) v -= gmean;  // chain through the mean subtraction

  return Tensor<T>::make_result("si_snr", Shape{1}, std::vector<T>{static_cast<T>(value)}, {est},
                                [g = std::move(g)](TensorNode<T>& self) {
                                  auto& p = self.parents[0];
                                  if (!p->requires_grad) return;
                                  T* dx = p->grad_buffer().data();
                                  const double up = self.grad[0];
                                  for (std::size_t i = 0; i < g.size(); ++i) dx[i] += static_cast<T>(up * g[i]);
                                });
}

template <typename T>
PitLoss<T> upit_loss(const std::vector<Tensor<T>>& estimates, const std::vector<std::vector<double>>& targets) {
  std::vector<std::vector<double>> est_values;
  for (const auto& e : estimates) est_values.push_back(to_double(e));
  PitLoss<T> out;
  out.result = upit(est_values, targets);
  Tensor<T> total;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    auto term = si_snr(estimates[i], targets[out.result.permutation[i]]);
    total = total.defined() ? ops::add(total, term) : term;
  }
  out.loss = ops::scale(total, -1.0 / static_cast<double>(estimates.size()));
  return out;
}

template Tensor<float> si_snr(const Tensor<float>&, std::span<const double>, double);
template Tensor<double> si_snr(const Tensor<double>&, std::span<const double>, double);
template PitLoss<float> upit_loss(const std::vector<Tensor<float>>&, const std::vector<std::vector<double>>&);
template PitLoss<double> upit_loss(const std::vector<Tensor<double>>&, const std::vector<std::vector<double>>&);

}  // namespace tsep

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entlab/discriminator.hpp"
#include "entlab/error.hpp"

namespace entlab {

void PerturbationSpec::validate() const {
  if (!std::isfinite(magnitude)) {
    throw InvalidInput("perturbation magnitude must be finite");
  }
  if (std::fabs(magnitude) > magnitude_limit) {
    throw InvalidInput("perturbation magnitude " + std::to_string(magnitude) +
                       " exceeds limit " + std::to_string(magnitude_limit));
  }
}

double predict_dH_single(const ProbabilityDistribution& dist, std::size_t k,
                         double eps) {
  return -eps * discriminator_score(dist, k);
}

std::vector<double> grpo_logit_step(const ProbabilityDistribution& dist,
                                    std::size_t k, double alpha) {
  if (k >= dist.size()) {
    throw InvalidInput("token index " + std::to_string(k) + " out of range");
  }
  std::vector<double> dz(dist.size());
  for (std::size_t i = 0; i < dz.size(); ++i) {
    dz[i] = alpha * ((i == k ? 1.0 : 0.0) - dist.probs()[i]);
  }
  return dz;
}

double predict_dH_grpo(const ProbabilityDistribution& dist, std::size_t k,
                       double alpha) {
  return -alpha * centered_score(dist, k);
}

namespace {

long double entropy_extended(std::span<const double> z,
                             std::span<const double> dz) {
  std::vector<long double> shifted(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    shifted[i] = static_cast<long double>(z[i]) +
                 (dz.empty() ? 0.0L : static_cast<long double>(dz[i]));
  }
  const long double m = *std::max_element(shifted.begin(), shifted.end());
  long double norm = 0.0L;
  for (long double s : shifted) norm += std::exp(s - m);
  const long double log_norm = std::log(norm);
  long double h = 0.0L;
  for (long double s : shifted) {
    const long double lp = (s - m) - log_norm;
    h -= std::exp(lp) * lp;
  }
  return h;
}

}  // namespace

double exact_dH(const LogitVector& logits, std::span<const double> dz,
                Precision precision) {
  if (dz.size() != logits.size()) {
    throw InvalidInput("exact_dH: dz length mismatch");
  }
  for (double d : dz) {
    if (!std::isfinite(d)) throw InvalidInput("exact_dH: non-finite dz");
  }
  if (precision == Precision::extended) {
    return static_cast<double>(entropy_extended(logits.values(), dz) -
                               entropy_extended(logits.values(), {}));
  }
  std::vector<double> moved(logits.values().begin(), logits.values().end());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += dz[i];
  return softmax(LogitVector(std::move(moved))).entropy() -
         softmax(logits).entropy();
}

std::vector<double> perturbation_direction(const ProbabilityDistribution& dist,
                                           const PerturbationSpec& spec) {
  spec.validate();
  if (spec.kind == PerturbationKind::grpo_step) {
    return grpo_logit_step(dist, spec.token, spec.magnitude);
  }
  if (spec.token >= dist.size()) {
    throw InvalidInput("token index " + std::to_string(spec.token) +
                       " out of range");
  }
  std::vector<double> dz(dist.size(), 0.0);
  dz[spec.token] = spec.magnitude;
  return dz;
}

EntropyChangeReport entropy_change(const ProbabilityDistribution& dist,
                                   const PerturbationSpec& spec,
                                   Precision precision) {
  const auto dz = perturbation_direction(dist, spec);
  EntropyChangeReport report;
  report.predicted = spec.kind == PerturbationKind::grpo_step
                         ? predict_dH_grpo(dist, spec.token, spec.magnitude)
                         : predict_dH_single(dist, spec.token, spec.magnitude);
  const LogitVector logits(
      std::vector<double>(dist.log_probs().begin(), dist.log_probs().end()));
  report.exact = exact_dH(logits, dz, precision);
  report.residual = report.exact - report.predicted;
  report.beyond_first_order_regime =
      std::fabs(spec.magnitude) > kFirstOrderRegime;
  return report;
}

OrderEstimate convergence_order(const ProbabilityDistribution& dist,
                                PerturbationKind kind, std::size_t k,
                                std::span<const double> ladder,
                                Precision precision) {
  if (ladder.size() < 3) {
    throw InvalidInput("convergence_order: ladder needs at least 3 rungs");
  }
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || ladder[i] > kFirstOrderRegime) {
      throw InvalidInput("convergence_order: rungs must lie in (0, 1e-2]");
    }
    if (i > 0 && !(ladder[i] < ladder[i - 1])) {
      throw InvalidInput("convergence_order: ladder must strictly decrease");
    }
  }
  OrderEstimate est;
  std::vector<double> xs;
  std::vector<double> ys;
  for (double m : ladder) {
    PerturbationSpec spec{kind, k, m};
    const auto report = entropy_change(dist, spec, precision);
    est.residuals.push_back(report.residual);
    if (std::fabs(report.residual) < kResidualNoiseFloor) est.saturated = true;
    xs.push_back(std::log(m));
    ys.push_back(std::log(std::fabs(report.residual)));
  }
  if (est.saturated) return est;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  est.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return est;
}

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "entlab/softmax.hpp"

namespace entlab {

// First-order entropy-change predictions and the exact recomputation they
// are checked against.

enum class PerturbationKind {
  single_logit,  // dz = magnitude * e_k
  grpo_step,     // dz = magnitude * (e_k - p)
};

/// Predictors warn above this step size; the first-order terms dominate
/// comfortably below it.
inline constexpr double kFirstOrderRegime = 1e-2;

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::single_logit;
  std::size_t token = 0;
  double magnitude = 0.0;
  double magnitude_limit = 1.0;

  /// Throws InvalidInput if magnitude is non-finite or exceeds the limit.
  void validate() const;
};

enum class Precision { standard, extended };

struct EntropyChangeReport {
  double predicted = 0.0;
  double exact = 0.0;
  double residual = 0.0;  // exact - predicted
  bool beyond_first_order_regime = false;
};

/// Theorem for a single-logit nudge: dH ~= -eps * S_k.
double predict_dH_single(const ProbabilityDistribution& dist, std::size_t k,
                         double eps);

/// Logit direction of one policy-gradient step on token k: alpha (e_k - p).
std::vector<double> grpo_logit_step(const ProbabilityDistribution& dist,
                                    std::size_t k, double alpha);

/// dH ~= -alpha (S_k - E_{i~p}[S_i]) for the step above.
double predict_dH_grpo(const ProbabilityDistribution& dist, std::size_t k,
                       double alpha);

/// H(softmax(z + dz)) - H(softmax(z)). The extended path evaluates both
/// entropies in long double.
double exact_dH(const LogitVector& logits, std::span<const double> dz,
                Precision precision = Precision::standard);

/// Logit perturbation described by spec, applied to the given distribution.
std::vector<double> perturbation_direction(const ProbabilityDistribution& dist,
                                           const PerturbationSpec& spec);

/// Predicted vs recomputed entropy change for one perturbation; logits are the
/// distribution's log-probabilities.
EntropyChangeReport entropy_change(const ProbabilityDistribution& dist,
                                   const PerturbationSpec& spec,
                                   Precision precision = Precision::standard);

struct OrderEstimate {
  bool saturated = false;  // some residual fell below the noise floor
  double slope = 0.0;      // least-squares d log|res| / d log magnitude
  std::vector<double> residuals;
};

inline constexpr double kResidualNoiseFloor = 1e-14;

/// Fits the decay order of the first-order residual over a strictly
/// decreasing ladder of at least three magnitudes, each at most 1e-2.
OrderEstimate convergence_order(const ProbabilityDistribution& dist,
                                PerturbationKind kind, std::size_t k,
                                std::span<const double> ladder,
                                Precision precision = Precision::standard);

}  // namespace entlab

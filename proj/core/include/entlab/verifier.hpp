// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/grpo.hpp"
#include "entlab/softmax.hpp"
#include "entlab/toy_env.hpp"

namespace entlab {

/// Outcome of one executable identity check.
///
/// Deterministic checks pass when abs_error <= tolerance. Monte Carlo checks
/// (mc_std_error set) pass when |value - reference| <= z * mc_std_error.
struct IdentityReport {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
  std::optional<double> mc_std_error;
  double tolerance = 0.0;  // absolute tolerance, or z for Monte Carlo checks
  bool passed = false;
  std::string detail;

  std::string to_ndjson() const;
};

IdentityReport make_deterministic_report(std::string name, double value,
                                         double reference, double tolerance);
IdentityReport make_monte_carlo_report(std::string name, double mean,
                                       double std_error, double z);

/// Random softmax distribution over V tokens: logits N(0, s^2) with s drawn
/// from [0.5, 3], halving s until every probability is at least min_prob.
ProbabilityDistribution random_distribution(std::size_t vocab_size, Rng& rng,
                                            double min_prob = 1e-6);

/// E_{k~p}[S_k - E_{i~p}[S_i]] summed exactly over the vocabulary.
IdentityReport onpolicy_identity(const ProbabilityDistribution& dist,
                                 double tolerance = 1e-10);

/// sum_k p'_k (p_k / p'_k) (S_k - E_{i~p}[S_i]) with p current, p' behavior.
IdentityReport offpolicy_identity(const ProbabilityDistribution& current,
                                  const ProbabilityDistribution& behavior,
                                  double tolerance = 1e-10);

struct MonteCarloResult {
  IdentityReport report;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t num_tokens = 0;
};

/// Batch mean of S_c over num_tokens tokens, each drawn at a uniformly random
/// (context, position) state. With behavior == nullptr tokens are sampled
/// on-policy from `current`; otherwise they are drawn from `behavior` and
/// weighted by r = p_k / p'_k. Requires num_tokens >= 1000.
MonteCarloResult batch_mc_identity(const TabularPolicy& current,
                                   const TabularPolicy* behavior,
                                   const ModularSumTask& task,
                                   std::size_t num_tokens, std::uint64_t seed,
                                   double z = 5.0);

/// -eta * Cov_B(A, S_c), population covariance over the tokens. S_c is
/// replaced by r S_c when any ratio differs from 1. Throws InvalidInput for
/// fewer than two tokens.
double covariance_prediction(std::span<const TokenRecord> tokens, double eta);

struct BatchEntropyCheck {
  IdentityReport report;
  double measured = 0.0;   // mean exact per-token entropy change
  double predicted = 0.0;  // covariance form
  double relative_error = 0.0;
};

/// Applies one unmasked per-token-sum step to an isolated policy and compares
/// the measured mean entropy change with the covariance prediction. Passes at
/// relative error <= rel_tolerance, or absolute <= 1e-10 when the prediction
/// is below 1e-10. Throws InvalidInput for a shared policy.
BatchEntropyCheck batch_entropy_change_check(TabularPolicy& policy,
                                             TrainingBatch& batch, double eta,
                                             double rel_tolerance = 0.05);

/// Synthetic check of the sampling-covariance form at one state: every
/// vocabulary entry k carries a latent advantage A(k). Compares
/// sum_k p_k dH_exact(eta A(k) (e_k - p)) with -eta Cov_{k~p}(A, S_c).
struct LatentAdvantageResult {
  double expected_change = 0.0;
  double predicted = 0.0;
};
LatentAdvantageResult latent_advantage_check(const LogitVector& logits,
                                             std::span<const double> advantage,
                                             double eta);

/// Per-state results plus their unweighted mean.
struct LatentAdvantageSummary {
  std::vector<LatentAdvantageResult> per_state;
  double mean_expected_change = 0.0;
  double mean_predicted = 0.0;
};
LatentAdvantageSummary latent_advantage_positions(
    std::span<const LogitVector> states,
    const std::function<double(std::size_t state, std::size_t token)>& advantage,
    double eta);

}  // namespace entlab

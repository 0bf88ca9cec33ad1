// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/discriminator.hpp"

#include <cmath>
#include <string>

#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {
namespace {

void check_index(const ProbabilityDistribution& dist, std::size_t k) {
  if (k >= dist.size()) {
    throw InvalidInput("token index " + std::to_string(k) +
                       " out of range for vocabulary of size " +
                       std::to_string(dist.size()));
  }
}

// p_i ln p_i goes through the log-softmax value, so tiny p_i contribute an
// exact zero instead of 0 * -inf.
inline double score_at(const ProbabilityDistribution& dist, std::size_t i) {
  return dist.probs()[i] * (dist.entropy() + dist.log_probs()[i]);
}

}  // namespace

std::vector<double> discriminator_scores(const ProbabilityDistribution& dist) {
  std::vector<double> scores(dist.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = score_at(dist, i);
  return scores;
}

double discriminator_score(const ProbabilityDistribution& dist, std::size_t k) {
  check_index(dist, k);
  return score_at(dist, k);
}

double expected_score(const ProbabilityDistribution& dist) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    acc.add(dist.probs()[i] * score_at(dist, i));
  }
  return acc.value();
}

double centered_score(const ProbabilityDistribution& dist, std::size_t k) {
  return discriminator_score(dist, k) - expected_score(dist);
}

DiscriminatorReport chosen_and_centered(const ProbabilityDistribution& dist,
                                        std::size_t k, std::size_t score_cap) {
  check_index(dist, k);
  DiscriminatorReport report;
  if (dist.size() <= score_cap) report.scores = discriminator_scores(dist);
  report.chosen_score = score_at(dist, k);
  report.expected_score = expected_score(dist);
  report.centered_score = report.chosen_score - report.expected_score;
  report.sign_threshold = std::exp(-dist.entropy());
  return report;
}

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "entlab/softmax.hpp"

namespace entlab {

/// Widest vocabulary for which chosen_and_centered() materializes the full
/// score vector.
inline constexpr std::size_t kDefaultScoreCap = 65536;

/// Entropy-change discriminator values for one sampled token.
struct DiscriminatorReport {
  std::vector<double> scores;  // S_i = p_i (H + ln p_i); empty above the cap
  double chosen_score = 0.0;   // S_* = S_k
  double expected_score = 0.0; // E_{i~p}[S_i] = sum_i p_i S_i
  double centered_score = 0.0; // S_* - E_{i~p}[S_i]
  double sign_threshold = 0.0; // e^{-H}; sign(S_*) = sign(p_k - e^{-H})
};

/// S_i = p_i (H + ln p_i) for every vocabulary entry.
std::vector<double> discriminator_scores(const ProbabilityDistribution& dist);

/// S_k alone.
double discriminator_score(const ProbabilityDistribution& dist, std::size_t k);

/// sum_i p_i^2 (H + ln p_i), streamed without materializing the scores.
double expected_score(const ProbabilityDistribution& dist);

/// S_k - E_{i~p}[S_i]. Throws InvalidInput for k >= V.
double centered_score(const ProbabilityDistribution& dist, std::size_t k);

/// Full report for token k. Throws InvalidInput for k >= V.
DiscriminatorReport chosen_and_centered(const ProbabilityDistribution& dist,
                                        std::size_t k,
                                        std::size_t score_cap = kDefaultScoreCap);

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace entlab {

/// Finite logits over a vocabulary of size V >= 2.
class LogitVector {
 public:
  /// Throws InvalidInput for V < 2 or any non-finite entry.
  explicit LogitVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// Softmax output with its log-probabilities and entropy (nats) cached.
///
/// Log-probabilities come from the fused log-softmax path, so they stay
/// finite even when a probability underflows below 1e-300.
class ProbabilityDistribution {
 public:
  /// Builds a distribution from explicit probabilities. Every entry must be
  /// finite and strictly positive and the total within 1e-10 of one; the
  /// vector is renormalized to remove the residual.
  static ProbabilityDistribution from_probabilities(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  std::span<const double> log_probs() const { return log_probs_; }
  double entropy() const { return entropy_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  friend ProbabilityDistribution softmax(const LogitVector& logits);
  ProbabilityDistribution(std::vector<double> probs,
                          std::vector<double> log_probs);

  std::vector<double> probs_;
  std::vector<double> log_probs_;
  double entropy_ = 0.0;
};

/// Max-shifted softmax: p_i = exp(z_i - m) / sum_j exp(z_j - m).
ProbabilityDistribution softmax(const LogitVector& logits);

/// log p_i = (z_i - m) - log sum_j exp(z_j - m).
std::vector<double> log_softmax(std::span<const double> logits);

/// -sum p_i ln p_i, in nats.
double entropy(const ProbabilityDistribution& dist);

/// J dz with J = diag(p) - p p^T, i.e. dp_i = p_i (dz_i - sum_j p_j dz_j).
/// Throws InvalidInput when dz.size() != V.
std::vector<double> softmax_jvp(const ProbabilityDistribution& dist,
                                std::span<const double> dz);

}  // namespace entlab

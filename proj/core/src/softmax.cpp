// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

double population_stddev(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  CompensatedSum acc;
  for (double x : xs) acc.add((x - m) * (x - m));
  return std::sqrt(acc.value() / static_cast<double>(xs.size()));
}

double population_covariance(std::span<const double> xs,
                             std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidInput("covariance: length mismatch");
  }
  if (xs.empty()) return 0.0;
  const double mx = mean(xs);
  const double my = mean(ys);
  CompensatedSum acc;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc.add((xs[i] - mx) * (ys[i] - my));
  }
  return acc.value() / static_cast<double>(xs.size());
}

LogitVector::LogitVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() < 2) {
    throw InvalidInput("logit vector needs at least 2 entries, got " +
                       std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidInput("non-finite logit at index " + std::to_string(i));
    }
  }
}

namespace {

double entropy_from(std::span<const double> probs,
                    std::span<const double> log_probs) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc.add(-probs[i] * log_probs[i]);
  }
  return acc.value();
}

}  // namespace

ProbabilityDistribution::ProbabilityDistribution(std::vector<double> probs,
                                                 std::vector<double> log_probs)
    : probs_(std::move(probs)), log_probs_(std::move(log_probs)) {
  entropy_ = entropy_from(probs_, log_probs_);
}

ProbabilityDistribution ProbabilityDistribution::from_probabilities(
    std::vector<double> probs) {
  if (probs.size() < 2) {
    throw InvalidInput("distribution needs at least 2 entries");
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] <= 0.0) {
      throw InvalidInput("probability at index " + std::to_string(i) +
                         " must be finite and strictly positive");
    }
  }
  const double total = compensated_sum(probs);
  if (std::fabs(total - 1.0) > 1e-10) {
    throw InvalidInput("probabilities must sum to 1");
  }
  std::vector<double> log_probs(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] /= total;
    log_probs[i] = std::log(probs[i]);
  }
  return ProbabilityDistribution(std::move(probs), std::move(log_probs));
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  CompensatedSum acc;
  for (double z : logits) acc.add(std::exp(z - m));
  const double log_norm = std::log(acc.value());
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = (logits[i] - m) - log_norm;
  }
  return out;
}

ProbabilityDistribution softmax(const LogitVector& logits) {
  const auto z = logits.values();
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> probs(z.size());
  CompensatedSum acc;
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] = std::exp(z[i] - m);
    acc.add(probs[i]);
  }
  const double norm = acc.value();
  const double log_norm = std::log(norm);
  std::vector<double> log_probs(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    probs[i] /= norm;
    log_probs[i] = (z[i] - m) - log_norm;
  }
  return ProbabilityDistribution(std::move(probs), std::move(log_probs));
}

double entropy(const ProbabilityDistribution& dist) { return dist.entropy(); }

std::vector<double> softmax_jvp(const ProbabilityDistribution& dist,
                                std::span<const double> dz) {
  if (dz.size() != dist.size()) {
    throw InvalidInput("softmax_jvp: dz has length " +
                       std::to_string(dz.size()) + ", expected " +
                       std::to_string(dist.size()));
  }
  const auto p = dist.probs();
  CompensatedSum acc;
  for (std::size_t j = 0; j < p.size(); ++j) acc.add(p[j] * dz[j]);
  const double mean_dz = acc.value();
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] * (dz[i] - mean_dz);
  }
  return out;
}

}  // namespace entlab

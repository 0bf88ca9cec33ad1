// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/verifier.hpp"

#include <cmath>

#include <json.hpp>

#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {

std::string IdentityReport::to_ndjson() const {
  nlohmann::json j = {
      {"name", name},
      {"value", value},
      {"reference", reference},
      {"abs_error", abs_error},
      {"mc_std_error", mc_std_error ? nlohmann::json(*mc_std_error)
                                    : nlohmann::json(nullptr)},
      {"tolerance", tolerance},
      {"passed", passed},
  };
  if (!detail.empty()) j["detail"] = detail;
  return j.dump();
}

IdentityReport make_deterministic_report(std::string name, double value,
                                         double reference, double tolerance) {
  IdentityReport r;
  r.name = std::move(name);
  r.value = value;
  r.reference = reference;
  r.abs_error = std::fabs(value - reference);
  r.tolerance = tolerance;
  r.passed = r.abs_error <= tolerance;
  return r;
}

IdentityReport make_monte_carlo_report(std::string name, double mean,
                                       double std_error, double z) {
  IdentityReport r;
  r.name = std::move(name);
  r.value = mean;
  r.reference = 0.0;
  r.abs_error = std::fabs(mean);
  r.mc_std_error = std_error;
  r.tolerance = z;
  r.passed = r.abs_error <= z * std_error;
  return r;
}

ProbabilityDistribution random_distribution(std::size_t vocab_size, Rng& rng,
                                            double min_prob) {
  if (vocab_size < 2 || min_prob * static_cast<double>(vocab_size) >= 1.0) {
    throw InvalidInput("random_distribution: min_prob unattainable for V");
  }
  std::uniform_real_distribution<double> pick_scale(0.5, 3.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> base(vocab_size);
  for (double& b : base) b = normal(rng);
  for (double scale = pick_scale(rng);; scale *= 0.5) {
    std::vector<double> z(vocab_size);
    for (std::size_t i = 0; i < vocab_size; ++i) z[i] = scale * base[i];
    auto dist = softmax(LogitVector(std::move(z)));
    bool ok = true;
    for (double p : dist.probs()) ok = ok && p >= min_prob;
    if (ok) return dist;
  }
}

IdentityReport onpolicy_identity(const ProbabilityDistribution& dist,
                                 double tolerance) {
  const double baseline = expected_score(dist);
  CompensatedSum acc;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    acc.add(dist.probs()[k] * (discriminator_score(dist, k) - baseline));
  }
  return make_deterministic_report("onpolicy_identity", acc.value(), 0.0,
                                   tolerance);
}

IdentityReport offpolicy_identity(const ProbabilityDistribution& current,
                                  const ProbabilityDistribution& behavior,
                                  double tolerance) {
  if (current.size() != behavior.size()) {
    throw InvalidInput("offpolicy_identity: vocabulary sizes differ");
  }
  const double baseline = expected_score(current);
  CompensatedSum acc;
  for (std::size_t k = 0; k < current.size(); ++k) {
    const double ratio = current.probs()[k] / behavior.probs()[k];
    acc.add(behavior.probs()[k] * ratio *
            (discriminator_score(current, k) - baseline));
  }
  return make_deterministic_report("offpolicy_identity", acc.value(), 0.0,
                                   tolerance);
}

MonteCarloResult batch_mc_identity(const TabularPolicy& current,
                                   const TabularPolicy* behavior,
                                   const ModularSumTask& task,
                                   std::size_t num_tokens, std::uint64_t seed,
                                   double z) {
  task.validate();
  if (num_tokens < 1000) {
    throw InvalidInput("batch_mc_identity: need at least 1000 tokens");
  }
  if (behavior != nullptr && behavior->vocab_size() != current.vocab_size()) {
    throw InvalidInput("batch_mc_identity: vocabulary sizes differ");
  }
  const std::size_t num_states =
      static_cast<std::size_t>(task.num_contexts) * task.seq_len;

  // Per-state quantities are cached; the tabular state space is small.
  struct StateCache {
    ProbabilityDistribution current;
    ProbabilityDistribution sampling;
    double baseline;
  };
  std::vector<std::optional<StateCache>> cache(num_states);

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick_state(0, num_states - 1);
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (std::size_t n = 0; n < num_tokens; ++n) {
    const std::size_t s = pick_state(rng);
    if (!cache[s]) {
      const auto key = current.key(static_cast<std::uint32_t>(s / task.seq_len),
                                   static_cast<std::uint32_t>(s % task.seq_len));
      auto cur = current.distribution(key);
      auto smp = behavior ? behavior->distribution(key) : cur;
      const double base = expected_score(cur);
      cache[s].emplace(StateCache{std::move(cur), std::move(smp), base});
    }
    const auto& c = *cache[s];
    const std::size_t k = sample_index(c.sampling, rng);
    const double ratio =
        behavior ? std::exp(c.current.log_probs()[k] - c.sampling.log_probs()[k])
                 : 1.0;
    const double v = ratio * (discriminator_score(c.current, k) - c.baseline);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double n = static_cast<double>(num_tokens);
  const double m = sum.value() / n;
  const double var = std::max(0.0, sum_sq.value() / n - m * m);
  MonteCarloResult out;
  out.mean = m;
  out.std_error = std::sqrt(var / n);
  out.num_tokens = num_tokens;
  out.report = make_monte_carlo_report(
      behavior ? "batch_mc_identity_offpolicy" : "batch_mc_identity", m,
      out.std_error, z);
  return out;
}

double covariance_prediction(std::span<const TokenRecord> tokens, double eta) {
  if (tokens.size() < 2) {
    throw InvalidInput("covariance_prediction: need at least 2 tokens");
  }
  bool off_policy = false;
  for (const auto& t : tokens) off_policy = off_policy || t.ratio != 1.0;
  std::vector<double> adv(tokens.size());
  std::vector<double> factor(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    adv[i] = tokens[i].advantage;
    factor[i] = off_policy ? tokens[i].ratio * tokens[i].centered_score
                           : tokens[i].centered_score;
  }
  return -eta * population_covariance(adv, factor);
}

BatchEntropyCheck batch_entropy_change_check(TabularPolicy& policy,
                                             TrainingBatch& batch, double eta,
                                             double rel_tolerance) {
  if (policy.mode() != PolicyMode::isolated) {
    throw InvalidInput(
        "batch_entropy_change_check: requires an isolated-state policy");
  }
  for (auto& t : batch.tokens) {
    t.ppo_mask = 1;
    t.entropy_mask = 1;
  }
  token_step_sizes(batch.tokens, eta, Aggregation::per_token_sum);

  BatchEntropyCheck out;
  out.predicted = covariance_prediction(batch.tokens, eta);
  const auto step = apply_grpo_step(policy, batch.tokens);
  CompensatedSum acc;
  for (const auto& s : step.states) acc.add(s.entropy_after - s.entropy_before);
  out.measured = acc.value() / static_cast<double>(batch.tokens.size());

  const double abs_err = std::fabs(out.measured - out.predicted);
  if (std::fabs(out.predicted) < 1e-10) {
    out.relative_error = 0.0;
    out.report = make_deterministic_report("batch_entropy_change", out.measured,
                                           out.predicted, 1e-10);
  } else {
    out.relative_error = abs_err / std::fabs(out.predicted);
    out.report = make_deterministic_report(
        "batch_entropy_change", out.measured, out.predicted,
        rel_tolerance * std::fabs(out.predicted));
  }
  return out;
}

LatentAdvantageResult latent_advantage_check(const LogitVector& logits,
                                             std::span<const double> advantage,
                                             double eta) {
  const auto dist = softmax(logits);
  if (advantage.size() != dist.size()) {
    throw InvalidInput("latent_advantage_check: advantage length mismatch");
  }
  const double baseline = expected_score(dist);
  CompensatedSum expected;
  CompensatedSum mean_a;
  CompensatedSum mean_c;
  CompensatedSum mean_ac;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    const double pk = dist.probs()[k];
    const auto dz = grpo_logit_step(dist, k, eta * advantage[k]);
    expected.add(pk * exact_dH(logits, dz, Precision::extended));
    const double c = discriminator_score(dist, k) - baseline;
    mean_a.add(pk * advantage[k]);
    mean_c.add(pk * c);
    mean_ac.add(pk * advantage[k] * c);
  }
  const double cov = mean_ac.value() - mean_a.value() * mean_c.value();
  return {expected.value(), -eta * cov};
}

LatentAdvantageSummary latent_advantage_positions(
    std::span<const LogitVector> states,
    const std::function<double(std::size_t, std::size_t)>& advantage,
    double eta) {
  LatentAdvantageSummary out;
  CompensatedSum e;
  CompensatedSum p;
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<double> adv(states[s].size());
    for (std::size_t k = 0; k < adv.size(); ++k) adv[k] = advantage(s, k);
    out.per_state.push_back(latent_advantage_check(states[s], adv, eta));
    e.add(out.per_state.back().expected_change);
    p.add(out.per_state.back().predicted);
  }
  if (!states.empty()) {
    out.mean_expected_change = e.value() / static_cast<double>(states.size());
    out.mean_predicted = p.value() / static_cast<double>(states.size());
  }
  return out;
}

}  // namespace entlab

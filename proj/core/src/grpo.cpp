// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/grpo.hpp"

#include <cmath>
#include <map>
#include <string>

#include "entlab/discriminator.hpp"
#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {

void GaeConfig::validate(std::size_t seq_len) const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidInput("gae: gamma must lie in [0, 1]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidInput("gae: lambda must lie in [0, 1]");
  }
  if (!values.empty() && values.size() != seq_len &&
      values.size() != seq_len + 1) {
    throw InvalidInput("gae: expected " + std::to_string(seq_len + 1) +
                       " state values, got " + std::to_string(values.size()));
  }
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw InvalidInput("group_advantages: need at least 2 rewards");
  }
  const double m = mean(rewards);
  const double sd = population_stddev(rewards);
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < 1e-12) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = (rewards[i] - m) / sd;
  }
  return adv;
}

std::vector<double> gae_advantages(std::span<const double> rewards,
                                   const GaeConfig& cfg) {
  const std::size_t n = rewards.size();
  cfg.validate(n);
  auto value = [&](std::size_t t) {
    return t < cfg.values.size() ? cfg.values[t] : 0.0;
  };
  std::vector<double> adv(n, 0.0);
  double next = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double delta = rewards[i] + cfg.gamma * value(i + 1) - value(i);
    next = delta + cfg.gamma * cfg.lambda * next;
    adv[i] = next;
  }
  return adv;
}

int ppo_clip_mask(double ratio, double advantage, double eps_low,
                  double eps_high) {
  if (advantage > 0.0 && ratio <= 1.0 + eps_high) return 1;
  if (advantage < 0.0 && ratio >= 1.0 - eps_low) return 1;
  return 0;
}

TrainingBatch sample_batch(const TabularPolicy& behavior,
                           const ModularSumTask& task,
                           std::span<const int> contexts, int group_size,
                           std::uint64_t stream_seed, AdvantageSource source,
                           const GaeConfig& gae) {
  if (group_size < 2) throw InvalidInput("sample_batch: group size must be >= 2");
  TrainingBatch batch;
  batch.groups.reserve(contexts.size());
  for (std::size_t g = 0; g < contexts.size(); ++g) {
    GroupBatch group;
    group.context = contexts[g];
    group.group = static_cast<std::uint32_t>(g);
    for (int i = 0; i < group_size; ++i) {
      Rng rng(mix_seeds(mix_seeds(stream_seed, g), static_cast<std::uint64_t>(i)));
      group.rollouts.push_back(sample_rollout(behavior, task, contexts[g],
                                              group.group,
                                              static_cast<std::uint32_t>(i), rng));
      group.rewards.push_back(group.rollouts.back().reward);
    }
    group.advantages = group_advantages(group.rewards);
    group.degenerate = population_stddev(group.rewards) < 1e-12;

    for (const auto& ro : group.rollouts) {
      std::vector<double> token_adv(ro.tokens.size(),
                                    group.advantages[ro.rollout]);
      if (source == AdvantageSource::gae) {
        std::vector<double> per_token(ro.tokens.size(), 0.0);
        per_token.back() = ro.reward;
        token_adv = gae_advantages(per_token, gae);
      }
      for (std::size_t t = 0; t < ro.tokens.size(); ++t) {
        TokenRecord rec;
        rec.group = group.group;
        rec.rollout = ro.rollout;
        rec.position = static_cast<std::uint32_t>(t);
        rec.state = ro.states[t];
        rec.token = ro.tokens[t];
        rec.behavior_log_prob = ro.log_probs[t];
        rec.advantage = token_adv[t];
        batch.tokens.push_back(rec);
      }
    }
    batch.groups.push_back(std::move(group));
  }
  refresh_tokens(batch.tokens, behavior);
  return batch;
}

void refresh_tokens(std::span<TokenRecord> tokens,
                    const TabularPolicy& current) {
  for (auto& rec : tokens) {
    const auto dist = current.distribution(rec.state);
    const auto k = static_cast<std::size_t>(rec.token);
    rec.current_log_prob = dist.log_probs()[k];
    rec.ratio = std::exp(rec.current_log_prob - rec.behavior_log_prob);
    rec.entropy = dist.entropy();
    rec.chosen_score = discriminator_score(dist, k);
    rec.expected_score = expected_score(dist);
    rec.centered_score = rec.chosen_score - rec.expected_score;
  }
}

void apply_ppo_masks(std::span<TokenRecord> tokens, double eps_low,
                     double eps_high) {
  if (!(eps_low >= 0.0) || !(eps_high >= 0.0)) {
    throw InvalidInput("ppo clip: eps_low and eps_high must be >= 0");
  }
  for (auto& rec : tokens) {
    rec.ppo_mask = ppo_clip_mask(rec.ratio, rec.advantage, eps_low, eps_high);
  }
}

void token_step_sizes(std::span<TokenRecord> tokens, double eta,
                      Aggregation aggregation) {
  // length_mean divides by the token count of each token's own group.
  std::map<std::uint32_t, std::size_t> group_tokens;
  for (const auto& rec : tokens) ++group_tokens[rec.group];
  for (auto& rec : tokens) {
    const double scale =
        aggregation == Aggregation::length_mean
            ? 1.0 / static_cast<double>(group_tokens.at(rec.group))
            : 1.0;
    rec.alpha = (rec.ppo_mask == 0 || rec.entropy_mask == 0)
                    ? 0.0
                    : eta * rec.ratio * rec.advantage * scale;
  }
}

StepReport apply_grpo_step(TabularPolicy& policy,
                           std::span<const TokenRecord> tokens) {
  const std::size_t vocab = policy.vocab_size();
  std::map<StateKey, StateUpdate> updates;
  std::map<StateKey, ProbabilityDistribution> before;
  for (const auto& rec : tokens) {
    auto [it, inserted] = updates.try_emplace(rec.state);
    auto& upd = it->second;
    if (inserted) {
      upd.state = rec.state;
      upd.delta_logits.assign(vocab, 0.0);
      before.emplace(rec.state, policy.distribution(rec.state));
    } else if (policy.mode() == PolicyMode::isolated) {
      throw InvalidInput("isolated policy: two tokens share one state");
    }
    ++upd.token_count;
    if (rec.alpha == 0.0) continue;
    const auto& p = before.at(rec.state).probs();
    for (std::size_t i = 0; i < vocab; ++i) {
      upd.delta_logits[i] +=
          rec.alpha * ((i == static_cast<std::size_t>(rec.token) ? 1.0 : 0.0) - p[i]);
    }
  }

  for (const auto& [key, upd] : updates) {
    const auto z = policy.logits(key);
    for (std::size_t i = 0; i < vocab; ++i) {
      if (!std::isfinite(upd.delta_logits[i]) ||
          !std::isfinite(z[i] + upd.delta_logits[i])) {
        throw RunAborted("non-finite logit update at state (" +
                         std::to_string(key.context) + "," +
                         std::to_string(key.position) + "," +
                         std::to_string(key.rollout) + "," +
                         std::to_string(key.group) + ")");
      }
    }
  }

  StepReport report;
  report.states.reserve(updates.size());
  for (auto& [key, upd] : updates) {
    upd.entropy_before = before.at(key).entropy();
    bool moved = false;
    for (double d : upd.delta_logits) moved = moved || d != 0.0;
    if (moved) policy.add_to_logits(key, upd.delta_logits);
    upd.entropy_after = moved ? policy.distribution(key).entropy()
                              : upd.entropy_before;
    report.states.push_back(std::move(upd));
  }
  return report;
}

}  // namespace entlab

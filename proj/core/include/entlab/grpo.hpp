// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "entlab/toy_env.hpp"

namespace entlab {

/// Everything known about one sampled token in a training batch.
struct TokenRecord {
  std::uint32_t group = 0;
  std::uint32_t rollout = 0;
  std::uint32_t position = 0;
  StateKey state;
  int token = 0;

  double behavior_log_prob = 0.0;
  double current_log_prob = 0.0;
  double ratio = 1.0;
  double advantage = 0.0;

  // Evaluated under the current policy at this token's state.
  double entropy = 0.0;
  double chosen_score = 0.0;    // S_*
  double expected_score = 0.0;  // E_{i~p}[S_i]
  double centered_score = 0.0;  // S_* - E_{i~p}[S_i]

  double alpha = 0.0;  // effective step size eta * r * A * loss_scale
  int ppo_mask = 1;
  int entropy_mask = 1;
};

struct GroupBatch {
  int context = 0;
  std::uint32_t group = 0;
  std::vector<Rollout> rollouts;
  std::vector<double> rewards;
  std::vector<double> advantages;  // per rollout; GAE advantages live per token
  bool degenerate = false;         // reward std below 1e-12
};

/// All groups sampled for one optimization step plus their flattened tokens.
struct TrainingBatch {
  std::vector<GroupBatch> groups;
  std::vector<TokenRecord> tokens;
};

enum class AdvantageSource { group, gae };

struct GaeConfig {
  double gamma = 1.0;
  double lambda = 1.0;
  /// State values V_0..V_T. Empty means all zero; a length-T vector gets a
  /// terminal value of 0 appended.
  std::vector<double> values;

  void validate(std::size_t seq_len) const;
};

enum class Aggregation {
  per_token_sum,  // alpha = eta r A
  length_mean,    // alpha = eta r A / (tokens in the same group)
};

/// (R_i - mean) / std with population std; all zeros when std < 1e-12.
/// Throws InvalidInput for fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards);

/// delta_t = r_t + gamma V_{t+1} - V_t;  A_t = delta_t + gamma lambda A_{t+1}.
std::vector<double> gae_advantages(std::span<const double> rewards,
                                   const GaeConfig& cfg);

/// PPO clip expressed as a gradient mask:
///   1{A > 0, r <= 1 + eps_high} + 1{A < 0, r >= 1 - eps_low}.
/// A = 0 yields 0.
int ppo_clip_mask(double ratio, double advantage, double eps_low,
                  double eps_high);

/// Samples one group per entry of contexts from the frozen behavior policy.
/// Rollout (g, i) draws from its own stream derived from (stream_seed, g, i),
/// so results do not depend on evaluation order.
TrainingBatch sample_batch(const TabularPolicy& behavior,
                           const ModularSumTask& task,
                           std::span<const int> contexts, int group_size,
                           std::uint64_t stream_seed,
                           AdvantageSource source = AdvantageSource::group,
                           const GaeConfig& gae = {});

/// Recomputes current log-probs, ratios and discriminator values against
/// the given policy. Ratios are exactly 1 when it equals the behavior policy.
void refresh_tokens(std::span<TokenRecord> tokens, const TabularPolicy& current);

void apply_ppo_masks(std::span<TokenRecord> tokens, double eps_low,
                     double eps_high);

/// Sets alpha for every token; masked tokens get alpha = 0.
void token_step_sizes(std::span<TokenRecord> tokens, double eta,
                      Aggregation aggregation);

struct StateUpdate {
  StateKey state;
  std::vector<double> delta_logits;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  std::size_t token_count = 0;
};

struct StepReport {
  std::vector<StateUpdate> states;  // key order
};

/// logits[s] += sum over tokens t at s of alpha_t (e_{k_t} - p_s), with p_s
/// the distribution before the step. Throws InvalidInput when an isolated
/// policy sees two tokens at one state, RunAborted when an update is not
/// finite (the policy is left unchanged).
StepReport apply_grpo_step(TabularPolicy& policy,
                           std::span<const TokenRecord> tokens);

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "entlab/softmax.hpp"

namespace entlab {

using Rng = std::mt19937_64;

/// Binary verifiable-reward task: a response of T tokens from a vocabulary
/// of V is correct when its token sum is congruent to the context id mod V.
struct ModularSumTask {
  int vocab_size = 10;
  int seq_len = 4;
  int num_contexts = 10;

  void validate() const;

  /// 1 if (sum tokens) mod V == context mod V, else 0. Throws InvalidInput
  /// for a wrong-length sequence or a token outside [0, V).
  double reward(int context, std::span<const int> tokens) const;
};

enum class PolicyMode {
  shared,    // one logit vector per (context, position)
  isolated,  // one per (context, position, rollout, group)
};

struct StateKey {
  std::uint32_t context = 0;
  std::uint32_t position = 0;
  std::uint32_t rollout = 0;
  std::uint32_t group = 0;

  auto operator<=>(const StateKey&) const = default;
};

struct InitPattern {
  enum class Kind { uniform, peaked, random };
  Kind kind = Kind::uniform;
  double gap = 2.0;          // peaked: logit of token 0, the rest 0
  double scale = 1.0;        // random: standard deviation
  std::uint64_t seed = 0;    // random: base seed, mixed with the state key
};

/// Initial logits for a state. The random pattern draws i.i.d. N(0, scale^2)
/// from a stream keyed by (seed, salt), so lazily created states do not depend
/// on visitation order.
LogitVector initial_logits(const InitPattern& pattern, std::size_t vocab_size,
                           std::uint64_t salt = 0);

std::uint64_t state_salt(const StateKey& key);

/// Tabular softmax policy with lazily materialized states.
class TabularPolicy {
 public:
  TabularPolicy(PolicyMode mode, std::size_t vocab_size, InitPattern init);

  PolicyMode mode() const { return mode_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const InitPattern& init() const { return init_; }

  /// Canonical key; shared mode drops the rollout and group ids.
  StateKey key(std::uint32_t context, std::uint32_t position,
               std::uint32_t rollout = 0, std::uint32_t group = 0) const;

  /// Stored logits, or the initial pattern for a state never updated.
  LogitVector logits(const StateKey& key) const;
  ProbabilityDistribution distribution(const StateKey& key) const;

  /// logits[key] += dz. Throws InvalidInput for wrong length or a result
  /// that is not finite; the state is left untouched in that case.
  void add_to_logits(const StateKey& key, std::span<const double> dz);

  /// Overwrites a state (checkpoint restore).
  void set_logits(const StateKey& key, LogitVector logits);

  const std::map<StateKey, LogitVector>& table() const { return table_; }

 private:
  PolicyMode mode_;
  std::size_t vocab_size_;
  InitPattern init_;
  std::map<StateKey, LogitVector> table_;
};

struct Rollout {
  int context = 0;
  std::uint32_t group = 0;
  std::uint32_t rollout = 0;
  std::vector<int> tokens;
  std::vector<double> log_probs;  // behavior policy, at sampling time
  std::vector<StateKey> states;
  double reward = 0.0;
};

/// Draws one index from dist by inverse CDF.
std::size_t sample_index(const ProbabilityDistribution& dist, Rng& rng);

/// Samples T tokens sequentially at temperature 1 from a frozen policy.
Rollout sample_rollout(const TabularPolicy& policy, const ModularSumTask& task,
                       int context, std::uint32_t group, std::uint32_t rollout,
                       Rng& rng);

}  // namespace entlab

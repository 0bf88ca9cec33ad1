// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/toy_env.hpp"

#include <cmath>
#include <string>

#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {

void ModularSumTask::validate() const {
  if (vocab_size < 2) throw InvalidInput("task: vocab_size must be >= 2");
  if (seq_len < 1) throw InvalidInput("task: seq_len must be >= 1");
  if (num_contexts < 1) throw InvalidInput("task: num_contexts must be >= 1");
}

double ModularSumTask::reward(int context, std::span<const int> tokens) const {
  if (tokens.size() != static_cast<std::size_t>(seq_len)) {
    throw InvalidInput("reward: expected " + std::to_string(seq_len) +
                       " tokens, got " + std::to_string(tokens.size()));
  }
  long long sum = 0;
  for (int t : tokens) {
    if (t < 0 || t >= vocab_size) {
      throw InvalidInput("reward: token " + std::to_string(t) +
                         " outside vocabulary");
    }
    sum += t;
  }
  const long long target = ((context % vocab_size) + vocab_size) % vocab_size;
  return sum % vocab_size == target ? 1.0 : 0.0;
}

std::uint64_t state_salt(const StateKey& key) {
  std::uint64_t h = mix64(key.context);
  h = mix_seeds(h, key.position);
  h = mix_seeds(h, key.rollout);
  return mix_seeds(h, key.group);
}

LogitVector initial_logits(const InitPattern& pattern, std::size_t vocab_size,
                           std::uint64_t salt) {
  std::vector<double> z(vocab_size, 0.0);
  switch (pattern.kind) {
    case InitPattern::Kind::uniform:
      break;
    case InitPattern::Kind::peaked:
      if (!std::isfinite(pattern.gap)) {
        throw InvalidInput("peaked init: gap must be finite");
      }
      z[0] = pattern.gap;
      break;
    case InitPattern::Kind::random: {
      if (!(pattern.scale >= 0.0) || !std::isfinite(pattern.scale)) {
        throw InvalidInput("random init: scale must be finite and >= 0");
      }
      Rng rng(mix_seeds(pattern.seed, salt));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : z) v = pattern.scale * normal(rng);
      break;
    }
  }
  return LogitVector(std::move(z));
}

TabularPolicy::TabularPolicy(PolicyMode mode, std::size_t vocab_size,
                             InitPattern init)
    : mode_(mode), vocab_size_(vocab_size), init_(init) {
  if (vocab_size < 2) throw InvalidInput("policy: vocab_size must be >= 2");
}

StateKey TabularPolicy::key(std::uint32_t context, std::uint32_t position,
                            std::uint32_t rollout, std::uint32_t group) const {
  if (mode_ == PolicyMode::shared) return StateKey{context, position, 0, 0};
  return StateKey{context, position, rollout, group};
}

LogitVector TabularPolicy::logits(const StateKey& key) const {
  if (auto it = table_.find(key); it != table_.end()) return it->second;
  return initial_logits(init_, vocab_size_, state_salt(key));
}

ProbabilityDistribution TabularPolicy::distribution(const StateKey& key) const {
  return softmax(logits(key));
}

void TabularPolicy::add_to_logits(const StateKey& key,
                                  std::span<const double> dz) {
  if (dz.size() != vocab_size_) {
    throw InvalidInput("policy update: dz length mismatch");
  }
  std::vector<double> z(vocab_size_);
  const auto current = logits(key);
  for (std::size_t i = 0; i < vocab_size_; ++i) z[i] = current[i] + dz[i];
  // LogitVector rejects non-finite entries before anything is stored.
  LogitVector updated(std::move(z));
  table_.insert_or_assign(key, std::move(updated));
}

void TabularPolicy::set_logits(const StateKey& key, LogitVector logits) {
  if (logits.size() != vocab_size_) {
    throw InvalidInput("policy: logits length mismatch");
  }
  table_.insert_or_assign(key, std::move(logits));
}

std::size_t sample_index(const ProbabilityDistribution& dist, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double cdf = 0.0;
  const auto p = dist.probs();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    cdf += p[i];
    if (u < cdf) return i;
  }
  return p.size() - 1;
}

Rollout sample_rollout(const TabularPolicy& policy, const ModularSumTask& task,
                       int context, std::uint32_t group, std::uint32_t rollout,
                       Rng& rng) {
  Rollout out;
  out.context = context;
  out.group = group;
  out.rollout = rollout;
  out.tokens.reserve(task.seq_len);
  for (int t = 0; t < task.seq_len; ++t) {
    const StateKey key =
        policy.key(static_cast<std::uint32_t>(context),
                   static_cast<std::uint32_t>(t), rollout, group);
    const auto dist = policy.distribution(key);
    const std::size_t k = sample_index(dist, rng);
    out.tokens.push_back(static_cast<int>(k));
    out.log_probs.push_back(dist.log_probs()[k]);
    out.states.push_back(key);
  }
  out.reward = task.reward(context, out.tokens);
  return out;
}

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "entlab/grpo.hpp"

namespace entlab {

// Entropy-discriminator gradient masks.
//
// Batch statistics are always taken over every token handed in; the mask is
// then applied only to tokens whose advantage sign matches `applies_to`.
// Out-of-scope tokens keep mask 1.

enum class ClipRule { none, clip_b, clip_v, sign_rule };
enum class AdvantageScope { positive, negative, both };
enum class SignRule { retain_S_pos, retain_S_neg, mask_S_pos, mask_S_neg };

struct ClipConfig {
  ClipRule rule = ClipRule::none;
  double mu_plus = 2.0;
  double mu_minus = 2.0;
  AdvantageScope applies_to = AdvantageScope::both;
  std::optional<SignRule> sign_rule;  // present iff rule == sign_rule

  void validate() const;
};

struct ClipStats {
  double batch_mean_S = 0.0;        // mean of S_* over all tokens
  double batch_std_S = 0.0;         // population std of S_*
  double batch_std_centered = 0.0;  // population std of S_c
  double clip_fraction = 0.0;       // masked / in scope
  std::size_t in_scope = 0;
  std::size_t masked = 0;
  bool degenerate = false;  // the relevant std fell below 1e-15
};

struct MaskResult {
  std::vector<int> masks;
  ClipStats stats;
};

inline constexpr double kDegenerateStd = 1e-15;

bool in_scope(AdvantageScope scope, double advantage);

/// Clip_B: keep -mu_minus sigma <= S_* - mean(S_*) <= mu_plus sigma.
MaskResult clip_b_mask(std::span<const TokenRecord> tokens,
                       const ClipConfig& cfg);

/// Clip_V: keep -mu_minus sigma' <= S_c <= mu_plus sigma', sigma' the batch
/// std of the centered scores.
MaskResult clip_v_mask(std::span<const TokenRecord> tokens,
                       const ClipConfig& cfg);

/// Keeps or drops tokens by the sign of S_*. S_* = 0 counts as non-positive,
/// so it falls on the S_* < 0 side of every rule. retain_* rules also drop
/// every token outside applies_to; mask_* rules keep those tokens.
MaskResult sign_rule_mask(std::span<const TokenRecord> tokens,
                          const ClipConfig& cfg);

/// Dispatches on cfg.rule; rule none keeps every token.
MaskResult entropy_mask(std::span<const TokenRecord> tokens,
                        const ClipConfig& cfg);

inline int compose_masks(int ppo_mask, int entropy_mask) {
  return (ppo_mask != 0 && entropy_mask != 0) ? 1 : 0;
}

std::string to_string(ClipRule rule);
std::string to_string(AdvantageScope scope);
std::string to_string(SignRule rule);
ClipRule parse_clip_rule(const std::string& s);
AdvantageScope parse_scope(const std::string& s);
SignRule parse_sign_rule(const std::string& s);

}  // namespace entlab

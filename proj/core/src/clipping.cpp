// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/clipping.hpp"

#include <cmath>

#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

namespace entlab {

void ClipConfig::validate() const {
  if (!std::isfinite(mu_plus) || !std::isfinite(mu_minus) || mu_plus < 0.0 ||
      mu_minus < 0.0) {
    throw InvalidInput("clip config: mu thresholds must be finite and >= 0");
  }
  if ((rule == ClipRule::sign_rule) != sign_rule.has_value()) {
    throw InvalidInput(
        "clip config: sign_rule detail is required for rule=sign_rule and "
        "forbidden otherwise");
  }
}

bool in_scope(AdvantageScope scope, double advantage) {
  switch (scope) {
    case AdvantageScope::positive: return advantage > 0.0;
    case AdvantageScope::negative: return advantage < 0.0;
    case AdvantageScope::both: return true;
  }
  return true;
}

namespace {

ClipStats batch_stats(std::span<const TokenRecord> tokens) {
  std::vector<double> s(tokens.size());
  std::vector<double> c(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    s[i] = tokens[i].chosen_score;
    c[i] = tokens[i].centered_score;
  }
  ClipStats stats;
  stats.batch_mean_S = mean(s);
  stats.batch_std_S = population_stddev(s);
  stats.batch_std_centered = population_stddev(c);
  return stats;
}

template <typename Keep>
MaskResult mask_in_scope(std::span<const TokenRecord> tokens,
                         AdvantageScope scope, ClipStats stats, Keep keep) {
  MaskResult out;
  out.masks.assign(tokens.size(), 1);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!in_scope(scope, tokens[i].advantage)) continue;
    ++stats.in_scope;
    if (!keep(tokens[i])) {
      out.masks[i] = 0;
      ++stats.masked;
    }
  }
  stats.clip_fraction =
      stats.in_scope == 0
          ? 0.0
          : static_cast<double>(stats.masked) / static_cast<double>(stats.in_scope);
  out.stats = stats;
  return out;
}

void require_rule(const ClipConfig& cfg, ClipRule rule, const char* name) {
  cfg.validate();
  if (cfg.rule != rule) {
    throw InvalidInput(std::string(name) + ": config rule is " +
                       to_string(cfg.rule));
  }
}

}  // namespace

MaskResult clip_b_mask(std::span<const TokenRecord> tokens,
                       const ClipConfig& cfg) {
  require_rule(cfg, ClipRule::clip_b, "clip_b_mask");
  if (tokens.empty()) throw InvalidInput("clip_b_mask: empty token list");
  ClipStats stats = batch_stats(tokens);
  if (stats.batch_std_S < kDegenerateStd) {
    stats.degenerate = true;
    return mask_in_scope(tokens, cfg.applies_to, stats,
                         [](const TokenRecord&) { return true; });
  }
  const double lo = -cfg.mu_minus * stats.batch_std_S;
  const double hi = cfg.mu_plus * stats.batch_std_S;
  const double centre = stats.batch_mean_S;
  return mask_in_scope(tokens, cfg.applies_to, stats,
                       [&](const TokenRecord& t) {
                         const double d = t.chosen_score - centre;
                         return lo <= d && d <= hi;
                       });
}

MaskResult clip_v_mask(std::span<const TokenRecord> tokens,
                       const ClipConfig& cfg) {
  require_rule(cfg, ClipRule::clip_v, "clip_v_mask");
  if (tokens.empty()) throw InvalidInput("clip_v_mask: empty token list");
  ClipStats stats = batch_stats(tokens);
  if (stats.batch_std_centered < kDegenerateStd) {
    stats.degenerate = true;
    return mask_in_scope(tokens, cfg.applies_to, stats,
                         [](const TokenRecord&) { return true; });
  }
  const double lo = -cfg.mu_minus * stats.batch_std_centered;
  const double hi = cfg.mu_plus * stats.batch_std_centered;
  return mask_in_scope(tokens, cfg.applies_to, stats,
                       [&](const TokenRecord& t) {
                         return lo <= t.centered_score && t.centered_score <= hi;
                       });
}

MaskResult sign_rule_mask(std::span<const TokenRecord> tokens,
                          const ClipConfig& cfg) {
  require_rule(cfg, ClipRule::sign_rule, "sign_rule_mask");
  const SignRule rule = *cfg.sign_rule;
  auto out = mask_in_scope(tokens, cfg.applies_to, batch_stats(tokens),
                           [rule](const TokenRecord& t) {
                             const bool positive = t.chosen_score > 0.0;
                             switch (rule) {
                               case SignRule::retain_S_pos: return positive;
                               case SignRule::retain_S_neg: return !positive;
                               case SignRule::mask_S_pos: return !positive;
                               case SignRule::mask_S_neg: return positive;
                             }
                             return true;
                           });
  // A retain rule updates only the retained tokens of the scoped samples, so
  // tokens outside the scope are dropped too. Mask rules leave them alone.
  if (rule == SignRule::retain_S_pos || rule == SignRule::retain_S_neg) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!in_scope(cfg.applies_to, tokens[i].advantage)) out.masks[i] = 0;
    }
  }
  return out;
}

MaskResult entropy_mask(std::span<const TokenRecord> tokens,
                        const ClipConfig& cfg) {
  switch (cfg.rule) {
    case ClipRule::clip_b: return clip_b_mask(tokens, cfg);
    case ClipRule::clip_v: return clip_v_mask(tokens, cfg);
    case ClipRule::sign_rule: return sign_rule_mask(tokens, cfg);
    case ClipRule::none: break;
  }
  cfg.validate();
  MaskResult out;
  out.masks.assign(tokens.size(), 1);
  out.stats = batch_stats(tokens);
  for (const auto& t : tokens) {
    if (in_scope(cfg.applies_to, t.advantage)) ++out.stats.in_scope;
  }
  return out;
}

std::string to_string(ClipRule rule) {
  switch (rule) {
    case ClipRule::none: return "none";
    case ClipRule::clip_b: return "clip_b";
    case ClipRule::clip_v: return "clip_v";
    case ClipRule::sign_rule: return "sign_rule";
  }
  return "none";
}

std::string to_string(AdvantageScope scope) {
  switch (scope) {
    case AdvantageScope::positive: return "positive";
    case AdvantageScope::negative: return "negative";
    case AdvantageScope::both: return "both";
  }
  return "both";
}

std::string to_string(SignRule rule) {
  switch (rule) {
    case SignRule::retain_S_pos: return "retain_S_pos";
    case SignRule::retain_S_neg: return "retain_S_neg";
    case SignRule::mask_S_pos: return "mask_S_pos";
    case SignRule::mask_S_neg: return "mask_S_neg";
  }
  return "retain_S_pos";
}

ClipRule parse_clip_rule(const std::string& s) {
  if (s == "none") return ClipRule::none;
  if (s == "clip_b") return ClipRule::clip_b;
  if (s == "clip_v") return ClipRule::clip_v;
  if (s == "sign_rule") return ClipRule::sign_rule;
  throw InvalidInput("unknown clip rule '" + s + "'");
}

AdvantageScope parse_scope(const std::string& s) {
  if (s == "positive") return AdvantageScope::positive;
  if (s == "negative") return AdvantageScope::negative;
  if (s == "both") return AdvantageScope::both;
  throw InvalidInput("unknown advantage scope '" + s + "'");
}

SignRule parse_sign_rule(const std::string& s) {
  if (s == "retain_S_pos") return SignRule::retain_S_pos;
  if (s == "retain_S_neg") return SignRule::retain_S_neg;
  if (s == "mask_S_pos") return SignRule::mask_S_pos;
  if (s == "mask_S_neg") return SignRule::mask_S_neg;
  throw InvalidInput("unknown sign rule '" + s + "'");
}

}  // namespace entlab

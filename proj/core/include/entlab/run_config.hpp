// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "entlab/clipping.hpp"
#include "entlab/grpo.hpp"
#include "entlab/toy_env.hpp"

namespace entlab {

enum class ContextSchedule {
  random,       // each group draws its context uniformly
  round_robin,  // group g of step s gets context ((s-1) * groups + g) mod C
};

/// One training run. Text form is flat `key = value` lines; `#` starts a
/// comment. Unknown keys are rejected.
struct RunConfig {
  ModularSumTask task;
  InitPattern init;
  PolicyMode mode = PolicyMode::shared;
  int group_size = 8;
  int groups_per_step = 8;
  int steps = 200;
  double eta = 1e-3;
  Aggregation aggregation = Aggregation::per_token_sum;
  ClipConfig clip;
  int epochs = 1;  // > 1 re-uses each batch, making ratios and PPO clip live
  double eps_low = 0.2;
  double eps_high = 0.2;
  AdvantageSource advantage = AdvantageSource::group;
  GaeConfig gae;
  ContextSchedule schedule = ContextSchedule::random;
  int eval_rollouts = 16;
  std::uint64_t seed = 1;
  std::string resume_from;  // checkpoint path, empty for a fresh run
  std::string output_dir = "run";

  /// Throws InvalidInput when a field is outside its documented range.
  void validate() const;

  /// Sets one field from its text form. Throws InvalidInput for an unknown
  /// key or an unparseable value.
  void set(const std::string& key, const std::string& value);

  /// Canonical text, one `key=value` per line in a fixed order. With
  /// include_output=false the output directory is left out, which is the
  /// form hashed into the manifest.
  std::string to_text(bool include_output = true) const;

  std::vector<std::pair<std::string, std::string>> entries(
      bool include_output = true) const;

  static RunConfig parse(std::istream& in);
  static RunConfig parse_text(const std::string& text);
  static RunConfig load(const std::string& path);
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Round-trip formatting used for every float the tool writes.
std::string format_double(double v);

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "entlab/run_config.hpp"
#include "entlab/verifier.hpp"

namespace entlab {

/// One row of metrics.csv. Column order is fixed by kMetricsHeader.
struct RunMetrics {
  int step = 0;
  double mean_token_entropy = 0.0;
  double mean_reward = 0.0;
  double pass_rate = 0.0;
  double clip_fraction = 0.0;
  double mean_S_star = 0.0;
  double mean_S_centered = 0.0;
  double cov_term = 0.0;            // -eta Cov_B(A, S_c)
  double predicted_dH_batch = 0.0;  // mean over tokens of -alpha_t S_c
  std::optional<double> measured_dH_batch;  // isolated mode only
  // Entropy-mask statistics of the first epoch.
  double batch_mean_S = 0.0;
  double batch_std_S = 0.0;
  double batch_std_centered = 0.0;

  bool finite() const;
  std::string to_csv_row() const;
};

inline constexpr const char* kMetricsHeader =
    "step,mean_token_entropy,mean_reward,pass_rate,clip_fraction,mean_S_star,"
    "mean_S_centered,cov_term,predicted_dH_batch,measured_dH_batch,batch_mean_S,"
    "batch_std_S,batch_std_centered";

/// Environment variable naming the root for relative output directories.
inline constexpr const char* kOutputRootEnv = "ENTLAB_OUTPUT_ROOT";

std::filesystem::path resolve_output_dir(const std::string& dir);

struct RunResult {
  std::vector<RunMetrics> metrics;
  std::filesystem::path output_dir;
  std::string config_hash;
  std::string metrics_hash;
  std::string manifest_hash;  // over the manifest minus wall time
  std::vector<double> final_pass_rates;  // per context
  double extreme_pass_fraction = 0.0;    // contexts at pass rate 0 or 1
  bool aborted = false;
  std::string diagnostic;
};

/// In-memory training loop; writes nothing.
///
/// Per step: sample groups_per_step groups of group_size rollouts from the
/// current policy, compute advantages and discriminator values, apply PPO and
/// entropy masks, set step sizes and update. Every random draw is keyed by
/// (seed, step, group, rollout), so a resumed run reproduces the tail of an
/// uninterrupted one. A non-finite update or metric stops the run with
/// aborted = true and the policy restored to its last good state.
struct TrainingState {
  TabularPolicy policy;
  int step = 0;
};
RunResult train(const RunConfig& cfg, TrainingState& state);

/// train() plus files in the resolved output directory: metrics.csv,
/// checkpoint.ndjson, pass_rates.csv, manifest.json and, after an abort,
/// diagnostic.txt. Throws RunAborted after writing when the run aborted.
RunResult run_training(const RunConfig& cfg);

TrainingState initial_state(const RunConfig& cfg);

struct SweepPoint {
  double mu = 0.0;
  double mean_clip_fraction = 0.0;
  double final_entropy = 0.0;
  double initial_entropy = 0.0;
  std::filesystem::path run_dir;
};

/// One run per mu (mu_plus = mu_minus = mu) sharing the base seed; writes
/// <output>/mu_<i>/ per run and <output>/sweep.csv. Requires >= 2 values.
std::vector<SweepPoint> run_mu_sweep(const RunConfig& base,
                                     const std::vector<double>& mus,
                                     bool write_files = true);

/// Verification suites behind `entlab verify`.
enum class VerifySuite { identities, order, covariance, montecarlo, all };
VerifySuite parse_verify_suite(const std::string& s);
std::vector<IdentityReport> run_verify(VerifySuite suite, std::uint64_t seed = 7);

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "entlab/checkpoint.hpp"
#include "entlab/error.hpp"
#include "entlab/numeric.hpp"

#ifndef ENTLAB_VERSION
#define ENTLAB_VERSION "unknown"
#endif

namespace entlab {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kContextStream = 0xC0'17E7ULL;
constexpr std::uint64_t kRolloutStream = 0x5A'3B1EULL;
constexpr std::uint64_t kEvalStream = 0xE7'A1ULL;

std::string csv_value(double v) { return format_double(v); }

std::vector<int> step_contexts(const RunConfig& cfg, int step) {
  std::vector<int> contexts(static_cast<std::size_t>(cfg.groups_per_step));
  const int c = cfg.task.num_contexts;
  if (cfg.schedule == ContextSchedule::round_robin) {
    for (int g = 0; g < cfg.groups_per_step; ++g) {
      contexts[g] = static_cast<int>(
          (static_cast<long long>(step - 1) * cfg.groups_per_step + g) % c);
    }
    return contexts;
  }
  Rng rng(mix_seeds(mix_seeds(cfg.seed, kContextStream),
                    static_cast<std::uint64_t>(step)));
  std::uniform_int_distribution<int> pick(0, c - 1);
  for (auto& ctx : contexts) ctx = pick(rng);
  return contexts;
}

double token_mean(const std::vector<TokenRecord>& tokens,
                  double TokenRecord::*field) {
  CompensatedSum acc;
  for (const auto& t : tokens) acc.add(t.*field);
  return tokens.empty() ? 0.0 : acc.value() / static_cast<double>(tokens.size());
}

// One optimization step; fills `row` progressively so a failure leaves the
// values computed so far (the rest NaN) for the diagnostic row.
void do_step(const RunConfig& cfg, TabularPolicy& policy, int step,
             RunMetrics& row) {
  const double nan = std::nan("");
  row = RunMetrics{};
  row.step = step;
  row.clip_fraction = row.predicted_dH_batch = nan;
  row.batch_mean_S = row.batch_std_S = row.batch_std_centered = nan;

  const auto contexts = step_contexts(cfg, step);
  const std::uint64_t stream =
      mix_seeds(mix_seeds(cfg.seed, kRolloutStream), static_cast<std::uint64_t>(step));
  TrainingBatch batch = sample_batch(policy, cfg.task, contexts, cfg.group_size,
                                     stream, cfg.advantage, cfg.gae);

  std::size_t passes = 0;
  CompensatedSum reward_sum;
  std::size_t rollouts = 0;
  for (const auto& g : batch.groups) {
    for (double r : g.rewards) {
      reward_sum.add(r);
      passes += r == 1.0 ? 1 : 0;
      ++rollouts;
    }
  }
  row.mean_reward = reward_sum.value() / static_cast<double>(rollouts);
  row.pass_rate = static_cast<double>(passes) / static_cast<double>(rollouts);
  row.mean_token_entropy = token_mean(batch.tokens, &TokenRecord::entropy);
  row.mean_S_star = token_mean(batch.tokens, &TokenRecord::chosen_score);
  row.mean_S_centered = token_mean(batch.tokens, &TokenRecord::centered_score);
  row.cov_term = covariance_prediction(batch.tokens, cfg.eta);

  CompensatedSum clip_sum;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (epoch > 1) refresh_tokens(batch.tokens, policy);
    apply_ppo_masks(batch.tokens, cfg.eps_low, cfg.eps_high);
    const auto masks = entropy_mask(batch.tokens, cfg.clip);
    for (std::size_t i = 0; i < batch.tokens.size(); ++i) {
      batch.tokens[i].entropy_mask = masks.masks[i];
    }
    clip_sum.add(masks.stats.clip_fraction);
    token_step_sizes(batch.tokens, cfg.eta, cfg.aggregation);

    if (epoch == 1) {
      row.batch_mean_S = masks.stats.batch_mean_S;
      row.batch_std_S = masks.stats.batch_std_S;
      row.batch_std_centered = masks.stats.batch_std_centered;
      CompensatedSum pred;
      for (const auto& t : batch.tokens) pred.add(-t.alpha * t.centered_score);
      row.predicted_dH_batch =
          pred.value() / static_cast<double>(batch.tokens.size());
    }
    const auto report = apply_grpo_step(policy, batch.tokens);
    if (epoch == 1 && cfg.mode == PolicyMode::isolated) {
      CompensatedSum measured;
      for (const auto& s : report.states) {
        measured.add(s.entropy_after - s.entropy_before);
      }
      row.measured_dH_batch =
          measured.value() / static_cast<double>(batch.tokens.size());
    }
  }
  row.clip_fraction = clip_sum.value() / static_cast<double>(cfg.epochs);
}

std::vector<double> evaluate_pass_rates(const RunConfig& cfg,
                                        const TabularPolicy& policy) {
  std::vector<double> rates(static_cast<std::size_t>(cfg.task.num_contexts));
  for (int c = 0; c < cfg.task.num_contexts; ++c) {
    int wins = 0;
    for (int r = 0; r < cfg.eval_rollouts; ++r) {
      Rng rng(mix_seeds(mix_seeds(mix_seeds(cfg.seed, kEvalStream),
                                  static_cast<std::uint64_t>(c)),
                        static_cast<std::uint64_t>(r)));
      const auto ro = sample_rollout(policy, cfg.task, c, 0,
                                     static_cast<std::uint32_t>(r % cfg.group_size),
                                     rng);
      wins += ro.reward == 1.0 ? 1 : 0;
    }
    rates[c] = static_cast<double>(wins) / cfg.eval_rollouts;
  }
  return rates;
}

std::string metrics_csv(const std::vector<RunMetrics>& rows) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.to_csv_row();
    out += '\n';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
}

}  // namespace

bool RunMetrics::finite() const {
  const double vals[] = {mean_token_entropy, mean_reward,     pass_rate,
                         clip_fraction,      mean_S_star,     mean_S_centered,
                         cov_term,           predicted_dH_batch,
                         batch_mean_S,       batch_std_S,     batch_std_centered};
  for (double v : vals) {
    if (!std::isfinite(v)) return false;
  }
  return !measured_dH_batch || std::isfinite(*measured_dH_batch);
}

std::string RunMetrics::to_csv_row() const {
  std::string out = std::to_string(step);
  for (double v : {mean_token_entropy, mean_reward, pass_rate, clip_fraction,
                   mean_S_star, mean_S_centered, cov_term, predicted_dH_batch}) {
    out += ',';
    out += csv_value(v);
  }
  out += ',';
  if (measured_dH_batch) out += csv_value(*measured_dH_batch);
  for (double v : {batch_mean_S, batch_std_S, batch_std_centered}) {
    out += ',';
    out += csv_value(v);
  }
  return out;
}

fs::path resolve_output_dir(const std::string& dir) {
  fs::path p(dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
    return fs::path(root) / p;
  }
  return p;
}

TrainingState initial_state(const RunConfig& cfg) {
  if (!cfg.resume_from.empty()) {
    auto ckpt = read_checkpoint_file(cfg.resume_from);
    if (ckpt.policy.vocab_size() != static_cast<std::size_t>(cfg.task.vocab_size) ||
        ckpt.policy.mode() != cfg.mode) {
      throw InvalidInput("resume: checkpoint does not match config vocab/mode");
    }
    return TrainingState{std::move(ckpt.policy), ckpt.step};
  }
  return TrainingState{
      TabularPolicy(cfg.mode, static_cast<std::size_t>(cfg.task.vocab_size),
                    cfg.init),
      0};
}

RunResult train(const RunConfig& cfg, TrainingState& state) {
  cfg.validate();
  RunResult result;
  for (int step = state.step + 1; step <= cfg.steps; ++step) {
    TabularPolicy last_good = state.policy;
    RunMetrics row;
    try {
      do_step(cfg, state.policy, step, row);
    } catch (const RunAborted& e) {
      result.diagnostic = e.what();
    }
    if (result.diagnostic.empty() && !row.finite()) {
      result.diagnostic = "non-finite metric at step " + std::to_string(step);
    }
    if (!result.diagnostic.empty()) {
      state.policy = std::move(last_good);
      result.metrics.push_back(row);
      result.aborted = true;
      result.diagnostic = "step " + std::to_string(step) + ": " + result.diagnostic;
      break;
    }
    result.metrics.push_back(row);
    state.step = step;
  }
  result.final_pass_rates = evaluate_pass_rates(cfg, state.policy);
  std::size_t extreme = 0;
  for (double r : result.final_pass_rates) extreme += (r == 0.0 || r == 1.0) ? 1 : 0;
  result.extreme_pass_fraction =
      static_cast<double>(extreme) /
      static_cast<double>(result.final_pass_rates.size());
  result.config_hash = fnv1a_hex(cfg.to_text(false));
  result.metrics_hash = fnv1a_hex(metrics_csv(result.metrics));
  return result;
}

RunResult run_training(const RunConfig& cfg) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  TrainingState state = initial_state(cfg);
  RunResult result = train(cfg, state);

  result.output_dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(result.output_dir);
  write_text(result.output_dir / "metrics.csv", metrics_csv(result.metrics));
  write_checkpoint_file((result.output_dir / "checkpoint.ndjson").string(),
                        state.policy, state.step);

  std::string rates = "context,pass_rate\n";
  for (std::size_t c = 0; c < result.final_pass_rates.size(); ++c) {
    rates += std::to_string(c) + ',' + csv_value(result.final_pass_rates[c]) + '\n';
  }
  write_text(result.output_dir / "pass_rates.csv", rates);

  std::map<int, int> histogram;
  for (double r : result.final_pass_rates) {
    ++histogram[static_cast<int>(std::lround(r * cfg.eval_rollouts))];
  }
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [wins, count] : histogram) hist[std::to_string(wins)] = count;

  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries(false)) config[k] = v;
  nlohmann::json manifest = {
      {"tool", "entlab"},
      {"code_version", ENTLAB_VERSION},
      {"config", config},
      {"config_hash", result.config_hash},
      {"seed", cfg.seed},
      {"theory",
       {{"eta", cfg.eta},
        {"group_size", cfg.group_size},
        {"mu_plus", cfg.clip.mu_plus},
        {"mu_minus", cfg.clip.mu_minus},
        {"aggregation", config["aggregation"]},
        {"mode", config["mode"]}}},
      {"steps_completed", state.step},
      {"status", result.aborted ? "aborted" : "completed"},
      {"metrics_hash", result.metrics_hash},
      {"final_pass_rate_histogram", hist},
      {"extreme_pass_fraction", result.extreme_pass_fraction},
  };
  if (result.aborted) manifest["diagnostic"] = result.diagnostic;
  result.manifest_hash = fnv1a_hex(manifest.dump());
  manifest["manifest_hash"] = result.manifest_hash;
  manifest["output_dir"] = result.output_dir.string();
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  write_text(result.output_dir / "manifest.json", manifest.dump(2) + "\n");

  if (result.aborted) {
    write_text(result.output_dir / "diagnostic.txt", result.diagnostic + "\n");
    throw RunAborted(result.diagnostic);
  }
  return result;
}

std::vector<SweepPoint> run_mu_sweep(const RunConfig& base,
                                     const std::vector<double>& mus,
                                     bool write_files) {
  if (mus.size() < 2) throw InvalidInput("sweep: need at least 2 mu values");
  if (base.clip.rule != ClipRule::clip_b && base.clip.rule != ClipRule::clip_v) {
    throw InvalidInput("sweep: clip_rule must be clip_b or clip_v");
  }
  std::vector<SweepPoint> points;
  const fs::path root = resolve_output_dir(base.output_dir);
  for (std::size_t i = 0; i < mus.size(); ++i) {
    RunConfig cfg = base;
    cfg.clip.mu_plus = cfg.clip.mu_minus = mus[i];
    SweepPoint pt;
    pt.mu = mus[i];
    RunResult res;
    if (write_files) {
      pt.run_dir = root / ("mu_" + std::to_string(i));
      cfg.output_dir = pt.run_dir.string();
      res = run_training(cfg);
    } else {
      TrainingState state = initial_state(cfg);
      res = train(cfg, state);
      if (res.aborted) throw RunAborted(res.diagnostic);
    }
    CompensatedSum clip;
    for (const auto& m : res.metrics) clip.add(m.clip_fraction);
    pt.mean_clip_fraction =
        res.metrics.empty() ? 0.0 : clip.value() / static_cast<double>(res.metrics.size());
    pt.initial_entropy = res.metrics.empty() ? 0.0 : res.metrics.front().mean_token_entropy;
    pt.final_entropy = res.metrics.empty() ? 0.0 : res.metrics.back().mean_token_entropy;
    points.push_back(pt);
  }
  if (write_files) {
    std::string csv =
        "mu,clip_rule,mean_clip_fraction,initial_mean_token_entropy,"
        "final_mean_token_entropy,run_dir\n";
    for (const auto& p : points) {
      csv += csv_value(p.mu) + ',' + to_string(base.clip.rule) + ',' +
             csv_value(p.mean_clip_fraction) + ',' + csv_value(p.initial_entropy) +
             ',' + csv_value(p.final_entropy) + ',' + p.run_dir.filename().string() +
             '\n';
    }
    fs::create_directories(root);
    write_text(root / "sweep.csv", csv);
  }
  return points;
}

}  // namespace entlab

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

// entlab command-line driver: train, sweep, verify, predict, plot.
// Exit codes: 0 success, 1 failed check or aborted run, 2 bad input.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/error.hpp"
#include "entlab/experiment.hpp"
#include "entlab/plot.hpp"

namespace {

using namespace entlab;

constexpr int kExitFail = 1;
constexpr int kExitBadInput = 2;

RunConfig build_config(const std::string& path,
                       const std::vector<std::string>& overrides) {
  RunConfig cfg = path.empty() ? RunConfig{} : RunConfig::load(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidInput("override must be key=value: '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

int cmd_train(const std::string& config, const std::vector<std::string>& overrides) {
  const RunConfig cfg = build_config(config, overrides);
  try {
    const auto res = run_training(cfg);
    const auto& last = res.metrics.back();
    std::fprintf(stderr, "train: %zu steps -> %s\n", res.metrics.size(),
                 res.output_dir.string().c_str());
    std::fprintf(stderr, "  entropy %s -> %s, pass_rate %s\n",
                 format_double(res.metrics.front().mean_token_entropy).c_str(),
                 format_double(last.mean_token_entropy).c_str(),
                 format_double(last.pass_rate).c_str());
    std::cout << res.manifest_hash << '\n';
    return 0;
  } catch (const RunAborted& e) {
    std::fprintf(stderr, "train: aborted: %s\n", e.what());
    return kExitFail;
  }
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& overrides,
              const std::vector<double>& mus) {
  const RunConfig cfg = build_config(config, overrides);
  try {
    const auto points = run_mu_sweep(cfg, mus);
    std::fprintf(stderr, "%-10s %-18s %-14s\n", "mu", "mean_clip_fraction",
                 "final_entropy");
    for (const auto& p : points) {
      std::fprintf(stderr, "%-10g %-18.6f %-14.6f\n", p.mu, p.mean_clip_fraction,
                   p.final_entropy);
    }
    std::cout << (resolve_output_dir(cfg.output_dir) / "sweep.csv").string() << '\n';
    return 0;
  } catch (const RunAborted& e) {
    std::fprintf(stderr, "sweep: aborted: %s\n", e.what());
    return kExitFail;
  }
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  const auto reports = run_verify(parse_verify_suite(suite), seed);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.to_ndjson() << '\n';
    ok = ok && r.passed;
  }
  std::fprintf(stderr, "%-40s %-6s %-12s %-12s\n", "check", "result", "error",
               "tolerance");
  for (const auto& r : reports) {
    std::fprintf(stderr, "%-40s %-6s %-12.3e %-12.3e\n", r.name.c_str(),
                 r.passed ? "PASS" : "FAIL", r.abs_error, r.tolerance);
  }
  return ok ? 0 : kExitFail;
}

std::vector<double> parse_logits(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidInput("logits: cannot parse '" + cell + "'");
    }
  }
  return out;
}

int cmd_predict(const std::string& logits_text, std::size_t token, double eps,
                double alpha) {
  const LogitVector logits(parse_logits(logits_text));
  const auto dist = softmax(logits);
  if (token >= dist.size()) {
    throw InvalidInput("token index " + std::to_string(token) +
                       " out of range for vocab " + std::to_string(dist.size()));
  }
  const auto disc = chosen_and_centered(dist, token);
  nlohmann::json out = {
      {"vocab_size", dist.size()},
      {"token", token},
      {"entropy", dist.entropy()},
      {"p_token", dist.probs()[token]},
      {"S_star", disc.chosen_score},
      {"expected_S", disc.expected_score},
      {"S_centered", disc.centered_score},
      {"sign_threshold", disc.sign_threshold},
  };
  auto add = [&](const char* name, PerturbationKind kind, double magnitude) {
    PerturbationSpec spec{kind, token, magnitude};
    spec.validate();
    const auto rep = entropy_change(dist, spec, Precision::extended);
    out[name] = {{"magnitude", magnitude},
                 {"predicted_dH", rep.predicted},
                 {"exact_dH", rep.exact},
                 {"residual", rep.residual},
                 {"beyond_first_order_regime", rep.beyond_first_order_regime}};
    if (rep.beyond_first_order_regime) {
      std::fprintf(stderr,
                   "warning: %s magnitude %g exceeds %g; the first-order "
                   "prediction may be inaccurate\n",
                   name, magnitude, kFirstOrderRegime);
    }
  };
  add("single_logit", PerturbationKind::single_logit, eps);
  add("grpo_step", PerturbationKind::grpo_step, alpha);
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs,
             const std::vector<std::string>& labels, const PlotSpec& spec,
             const std::string& out) {
  emit_plot(inputs, labels, spec, out);
  std::cout << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entlab: entropy-dynamics experiments on a tabular softmax policy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ENTLAB_VERSION);

  std::string config;
  std::vector<std::string> overrides;

  auto* train = app.add_subcommand("train", "run one training experiment");
  train->add_option("-c,--config", config, "key=value config file");
  train->add_option("overrides", overrides, "key=value overrides");

  std::vector<double> mus;
  auto* sweep = app.add_subcommand("sweep", "one run per mu value, shared seed");
  sweep->add_option("-c,--config", config, "key=value config file");
  sweep->add_option("--mu", mus, "mu values (mu_plus = mu_minus)")
      ->required()
      ->expected(2, -1);
  sweep->add_option("overrides", overrides, "key=value overrides");

  std::string suite = "all";
  std::uint64_t verify_seed = 7;
  auto* verify = app.add_subcommand("verify", "run identity and dynamics checks");
  verify->add_option("suite", suite, "identities|order|covariance|montecarlo|all");
  verify->add_option("--seed", verify_seed, "seed for sampled cases");

  std::string logits;
  std::size_t token = 0;
  double eps = 1e-3;
  double alpha = 1e-3;
  auto* predict = app.add_subcommand("predict", "entropy-change report for one logit vector");
  predict->add_option("--logits", logits, "comma-separated logits")->required();
  predict->add_option("--token", token, "sampled token index")->required();
  predict->add_option("--eps", eps, "single-logit nudge size");
  predict->add_option("--alpha", alpha, "GRPO step size eta*r*A");

  std::vector<std::string> inputs;
  std::vector<std::string> labels;
  PlotSpec pspec;
  std::string plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG line chart");
  plot->add_option("inputs", inputs, "CSV files")->required();
  plot->add_option("-x,--x", pspec.x_column, "x column");
  plot->add_option("-y,--y", pspec.y_column, "y column");
  plot->add_option("--label", labels, "series labels, one per input");
  plot->add_option("--title", pspec.title, "chart title");
  plot->add_option("--window", pspec.window, "trailing window mean over y")
      ->check(CLI::PositiveNumber);
  plot->add_option("-o,--output", plot_out, "output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitBadInput;
  }

  try {
    if (*train) return cmd_train(config, overrides);
    if (*sweep) return cmd_sweep(config, overrides, mus);
    if (*verify) return cmd_verify(suite, verify_seed);
    if (*predict) return cmd_predict(logits, token, eps, alpha);
    if (*plot) return cmd_plot(inputs, labels, pspec, plot_out);
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return kExitBadInput;
}

// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has a wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "entlab/clipping.hpp"
#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/experiment.hpp"
#include "entlab/grpo.hpp"
#include "entlab/numeric.hpp"
#include "entlab/softmax.hpp"
#include "entlab/verifier.hpp"
#include "oracle.hpp"

namespace {

using namespace entlab;
namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::size_t log_uniform_vocab(Rng& rng, std::size_t max_vocab) {
  std::uniform_real_distribution<double> u(std::log(2.0), std::log(static_cast<double>(max_vocab)));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::exp(u(rng)))), 2,
                                 max_vocab);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
    sxx += std::log(x[i]) * std::log(x[i]);
    sxy += std::log(x[i]) * std::log(y[i]);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

fs::path out_root() {
  const fs::path root = resolve_output_dir("acceptance");
  fs::create_directories(root);
  return root;
}

// 1. Single-logit JVP against the closed form and a 50-digit finite difference.
Outcome jvp_exactness() {
  Rng rng(101);
  std::uniform_real_distribution<double> log_eps(std::log(1e-6), std::log(1e-3));
  double worst_closed = 0.0;
  double min_factor = INFINITY, max_factor = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t v = log_uniform_vocab(rng, 256);
    const auto p = random_distribution(v, rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    const double eps = std::exp(log_eps(rng));
    std::vector<double> dz(v, 0.0);
    dz[k] = eps;
    const auto jvp = softmax_jvp(p, dz);
    const double pk = p[k];
    for (std::size_t i = 0; i < v; ++i) {
      const double closed = i == k ? eps * pk * (1 - pk) : -eps * p[i] * pk;
      worst_closed = std::max(worst_closed, std::fabs(jvp[i] - closed));
    }
    // residual of the linearization, eps and eps/2, from high-precision
    // recomputation of softmax(z + eps e_k)
    const auto z = oracle::to_real(std::vector<double>(p.log_probs().begin(), p.log_probs().end()));
    const auto p0 = oracle::softmax(z);
    auto residual = [&](double e) {
      auto moved = z;
      moved[k] += e;
      const auto p1 = oracle::softmax(moved);
      oracle::Real worst = 0;
      for (std::size_t i = 0; i < v; ++i) {
        const oracle::Real lin = i == k ? e * p0[k] * (1 - p0[k]) : -e * p0[i] * p0[k];
        worst = std::max(worst, oracle::Real(abs(p1[i] - p0[i] - lin)));
      }
      return static_cast<double>(worst);
    };
    const double factor = residual(eps) / residual(eps / 2);
    min_factor = std::min(min_factor, factor);
    max_factor = std::max(max_factor, factor);
  }
  const bool ok = worst_closed <= 1e-14 && min_factor >= 3 && max_factor <= 5;
  return {ok, "max closed-form error " + num(worst_closed) + ", halving factor in [" +
                  num(min_factor) + ", " + num(max_factor) + "] over 1000 cases"};
}

// 2 and 3. First-order entropy prediction bound and convergence order.
Outcome first_order(PerturbationKind kind, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<double> eps_set{1e-2, 1e-3, 1e-4};
  std::vector<double> pooled(eps_set.size(), 0.0);
  double worst_ratio = 0.0;
  std::size_t cases = 0;
  for (std::size_t v : {2u, 10u, 1000u}) {
    for (int n = 0; n < 100; ++n, ++cases) {
      const auto p = random_distribution(v, rng, 1e-6);
      const std::size_t k = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
      for (std::size_t e = 0; e < eps_set.size(); ++e) {
        for (double sgn : {1.0, -1.0}) {
          const double eps = sgn * eps_set[e];
          const auto dz = perturbation_direction(p, {kind, k, eps});
          const LogitVector z(std::vector<double>(p.log_probs().begin(), p.log_probs().end()));
          const double exact = exact_dH(z, dz, Precision::extended);
          // prediction from the definitions: -eps S_* or -alpha (S_* - E[S])
          const double h = p.entropy();
          double pred = -eps * p[k] * (h + p.log_probs()[k]);
          if (kind == PerturbationKind::grpo_step) {
            double es = 0.0;
            for (std::size_t i = 0; i < v; ++i) es += p[i] * p[i] * (h + p.log_probs()[i]);
            pred = -eps * (p[k] * (h + p.log_probs()[k]) - es);
          }
          worst_ratio = std::max(worst_ratio, std::fabs(exact - pred) / (eps * eps));
          if (sgn > 0) pooled[e] += std::fabs(exact - pred);
        }
      }
    }
  }
  const double order = fit_slope(eps_set, pooled);
  const bool ok = worst_ratio <= 5.0 && order >= 1.8 && order <= 2.2;
  return {ok, "max |residual|/eps^2 = " + num(worst_ratio) + " over " + std::to_string(cases) +
                  " cases, fitted order " + num(order)};
}

// 4. Discriminator scores sum to zero.
Outcome zero_sum() {
  Rng rng(404);
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const auto p = random_distribution(log_uniform_vocab(rng, 4096), rng);
    worst = std::max(worst, std::fabs(compensated_sum(discriminator_scores(p))));
  }
  return {worst <= 1e-10, "max |sum_i S_i| = " + num(worst) + " over 1000 dists, V <= 4096"};
}

// 5. On- and off-policy expectation identities as vocabulary sums.
Outcome expectation_identities() {
  Rng rng(505);
  double on = 0.0, off = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t v = log_uniform_vocab(rng, 4096);
    const auto p = random_distribution(v, rng);
    const auto q = random_distribution(v, rng);
    on = std::max(on, onpolicy_identity(p).abs_error);
    off = std::max(off, offpolicy_identity(p, q).abs_error);
  }
  return {on <= 1e-10 && off <= 1e-10,
          "max on-policy " + num(on) + ", off-policy " + num(off) + " over 1000 pairs"};
}

// 6. Monte Carlo batch means of S_c (and r S_c off-policy).
Outcome monte_carlo() {
  const ModularSumTask task;
  const TabularPolicy policy(PolicyMode::shared, 10,
                             InitPattern{InitPattern::Kind::random, 2.0, 1.5, 606});
  std::vector<double> ns{1e4, 1e5, 1e6};
  std::vector<double> ses;
  MonteCarloResult last;
  for (double n : ns) {
    last = batch_mc_identity(policy, nullptr, task, static_cast<std::size_t>(n),
                             mix_seeds(606, static_cast<std::uint64_t>(n)));
    ses.push_back(last.std_error);
  }
  const double slope = fit_slope(ns, ses);

  TabularPolicy current = policy;
  Rng noise(607);
  std::normal_distribution<double> normal(0.0, 0.5);
  for (int c = 0; c < task.num_contexts; ++c) {
    for (int t = 0; t < task.seq_len; ++t) {
      std::vector<double> dz(10);
      for (auto& d : dz) d = normal(noise);
      current.add_to_logits(current.key(c, t), dz);
    }
  }
  const auto off = batch_mc_identity(current, &policy, task, 1000000, 608);
  const bool ok = last.report.passed && off.report.passed && slope >= -0.6 && slope <= -0.4;
  return {ok, "on-policy |mean|/se = " + num(std::fabs(last.mean) / last.std_error) +
                  ", off-policy |mean|/se = " + num(std::fabs(off.mean) / off.std_error) +
                  ", se slope " + num(slope)};
}

// 7. Isolated-mode batch entropy change against -eta Cov_B(A, S_c).
Outcome batch_covariance() {
  const ModularSumTask task;  // V=10, T=4
  const InitPattern init{InitPattern::Kind::random, 2.0, 1.0, 707};
  const std::vector<int> contexts{0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> errors;
  double rel_at_1e4 = 0.0;
  for (double eta : {1e-3, 1e-4, 1e-5}) {
    TabularPolicy policy(PolicyMode::isolated, 10, init);
    auto batch = sample_batch(policy, task, contexts, 8, 708);
    // oracle for the prediction: population covariance from the token fields
    std::vector<double> a, c;
    for (const auto& t : batch.tokens) {
      a.push_back(t.advantage);
      c.push_back(t.centered_score);
    }
    const double predicted = -eta * oracle::population_cov(a, c);
    const auto check = batch_entropy_change_check(policy, batch, eta);
    errors.push_back(std::fabs(check.measured - predicted));
    if (eta == 1e-4) rel_at_1e4 = std::fabs(check.measured - predicted) / std::fabs(predicted);
  }
  const double shrink = std::max(errors[1] / errors[0], errors[2] / errors[1]);
  return {rel_at_1e4 <= 0.05 && shrink <= 0.1,
          "relative error at eta=1e-4 " + num(rel_at_1e4) + ", worst error ratio per decade " +
              num(shrink)};
}

RunConfig sign_rule_config(AdvantageScope scope, SignRule rule) {
  RunConfig cfg;
  cfg.init = InitPattern{InitPattern::Kind::random, 2.0, 1.0, 1};
  cfg.eta = 0.05;
  cfg.clip.rule = ClipRule::sign_rule;
  cfg.clip.sign_rule = rule;
  cfg.clip.applies_to = scope;
  return cfg;
}

// 8. Retaining S_* > 0 or S_* < 0 updates on positive or negative samples.
Outcome sign_rule_dynamics() {
  struct Case {
    AdvantageScope scope;
    SignRule rule;
    int expected_sign;
    const char* name;
  };
  const Case cases[] = {
      {AdvantageScope::positive, SignRule::retain_S_pos, -1, "pos/retain_S>0"},
      {AdvantageScope::positive, SignRule::retain_S_neg, +1, "pos/retain_S<0"},
      {AdvantageScope::negative, SignRule::retain_S_pos, +1, "neg/retain_S>0"},
      {AdvantageScope::negative, SignRule::retain_S_neg, -1, "neg/retain_S<0"},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    RunConfig cfg = sign_rule_config(c.scope, c.rule);
    cfg.output_dir = (out_root() / (std::string("sign_") + to_string(c.scope) + "_" +
                                    to_string(c.rule)))
                         .string();
    const auto res = run_training(cfg);
    const double d = res.metrics.back().mean_token_entropy - res.metrics.front().mean_token_entropy;
    const int sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
    ok = ok && sign == c.expected_sign && res.metrics.size() == 200;
    detail += std::string(detail.empty() ? "" : ", ") + c.name + " dH=" + num(d);
  }
  return {ok, detail};
}

// 9. mu sweeps for Clip_B and Clip_V on negative samples.
Outcome mu_sweeps() {
  RunConfig base;
  base.init = InitPattern{InitPattern::Kind::random, 2.0, 4.0, 1};
  base.eta = 0.05;
  base.clip.applies_to = AdvantageScope::negative;

  RunConfig plain = base;
  plain.output_dir = (out_root() / "sweep_baseline").string();
  const double baseline = run_training(plain).metrics.back().mean_token_entropy;

  bool ok = true;
  std::string detail = "baseline final entropy " + num(baseline);
  const std::vector<double> mus{0.5, 1.0, 2.0, 4.0};
  for (auto rule : {ClipRule::clip_b, ClipRule::clip_v}) {
    RunConfig cfg = base;
    cfg.clip.rule = rule;
    cfg.output_dir = (out_root() / ("sweep_" + to_string(rule))).string();
    const auto pts = run_mu_sweep(cfg, mus);
    std::string fracs;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0 && pts[i].mean_clip_fraction > pts[i - 1].mean_clip_fraction) ok = false;
      fracs += (i ? "/" : "") + num(pts[i].mean_clip_fraction);
    }
    const double at2 = pts[2].final_entropy;
    ok = ok && at2 > baseline;
    detail += "; " + to_string(rule) + " clip fraction " + fracs + ", final entropy at mu=2 " +
              num(at2);
  }
  return {ok, detail};
}

// 10. PPO clip mask against the indicator definition.
Outcome ppo_truth_table() {
  int mismatches = 0, cells = 0;
  for (double a : {1.0, -1.0}) {
    for (double r : {0.5, 0.9, 1.0, 1.1, 1.3}) {
      const int expected = (a > 0 && r <= 1.2) || (a < 0 && r >= 0.8) ? 1 : 0;
      mismatches += ppo_clip_mask(r, a, 0.2, 0.2) != expected;
      ++cells;
    }
  }
  return {mismatches == 0, std::to_string(cells) + " cells, " + std::to_string(mismatches) +
                               " mismatches"};
}

// 11. GAE recursion against the unrolled sum A_t = sum_l (gamma lambda)^l delta_{t+l}.
Outcome gae_oracle() {
  Rng rng(1111);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const std::size_t t_len = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    GaeConfig cfg{unit(rng), unit(rng), {}};
    std::vector<double> rewards(t_len);
    for (auto& r : rewards) r = normal(rng);
    cfg.values.resize(t_len + 1);
    for (auto& v : cfg.values) v = normal(rng);
    if (n % 4 == 0) cfg.values.back() = 0.0;
    const auto got = gae_advantages(rewards, cfg);
    for (std::size_t t = 0; t < t_len; ++t) {
      oracle::Real sum = 0, w = 1;
      for (std::size_t l = t; l < t_len; ++l) {
        const oracle::Real delta = oracle::Real(rewards[l]) +
                                   oracle::Real(cfg.gamma) * cfg.values[l + 1] - cfg.values[l];
        sum += w * delta;
        w *= oracle::Real(cfg.gamma) * cfg.lambda;
      }
      worst = std::max(worst, std::fabs(got[t] - static_cast<double>(sum)));
    }
  }
  return {worst <= 1e-12, "max error " + num(worst) + " over 100 instances, T <= 8"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 12. Two identical training runs give identical bytes.
Outcome determinism() {
  RunConfig cfg;
  cfg.init = InitPattern{InitPattern::Kind::random, 2.0, 1.0, 3};
  cfg.eta = 0.05;
  cfg.clip.rule = ClipRule::clip_b;
  cfg.clip.applies_to = AdvantageScope::negative;
  RunConfig again = cfg;
  cfg.output_dir = (out_root() / "determinism_a").string();
  again.output_dir = (out_root() / "determinism_b").string();
  const auto a = run_training(cfg);
  const auto b = run_training(again);
  const bool csv_same = slurp(a.output_dir / "metrics.csv") == slurp(b.output_dir / "metrics.csv");
  const bool ckpt_same =
      slurp(a.output_dir / "checkpoint.ndjson") == slurp(b.output_dir / "checkpoint.ndjson");
  const bool ok = csv_same && ckpt_same && a.manifest_hash == b.manifest_hash &&
                  a.config_hash == b.config_hash;
  return {ok, std::string("metrics.csv ") + (csv_same ? "identical" : "differs") +
                  ", checkpoint " + (ckpt_same ? "identical" : "differs") +
                  ", manifest hash " + a.manifest_hash + " / " + b.manifest_hash};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "softmax JVP closed form and quadratic FD residual", 5, jvp_exactness},
      {2, "single-logit entropy change first-order bound",
       10, [] { return first_order(PerturbationKind::single_logit, 202); }},
      {3, "policy-gradient step entropy change first-order bound",
       10, [] { return first_order(PerturbationKind::grpo_step, 303); }},
      {4, "discriminator zero-sum", 5, zero_sum},
      {5, "on/off-policy expected centered score", 5, expectation_identities},
      {6, "Monte Carlo batch mean of centered score", 60, monte_carlo},
      {7, "isolated batch entropy change vs covariance", 30, batch_covariance},
      {8, "sign-rule entropy directions", 60, sign_rule_dynamics},
      {9, "mu sweep clip fraction and negative-sample clipping", 120, mu_sweeps},
      {10, "PPO clip mask truth table", 1, ppo_truth_table},
      {11, "GAE recursion", 1, gae_oracle},
      {12, "training determinism", 30, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = secs < c.budget_seconds;
    const bool passed = out.passed && in_budget;
    failures += passed ? 0 : 1;
    std::printf("%s criterion %2d: %s (%.2fs, budget %gs%s); %s\n", passed ? "PASS" : "FAIL", c.id,
                c.name, secs, c.budget_seconds, in_budget ? "" : ", over budget",
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}

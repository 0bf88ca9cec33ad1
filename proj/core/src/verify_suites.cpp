// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/error.hpp"
#include "entlab/experiment.hpp"
#include "entlab/numeric.hpp"

namespace entlab {
namespace {

std::size_t random_vocab(Rng& rng, std::size_t max_vocab) {
  // Log-uniform over [2, max_vocab] so small vocabularies are well covered.
  std::uniform_real_distribution<double> u(std::log(2.0),
                                           std::log(static_cast<double>(max_vocab)));
  return std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(std::exp(u(rng)))), 2, max_vocab);
}

IdentityReport worst_of(std::string name, double worst, double tolerance,
                        std::size_t cases) {
  auto r = make_deterministic_report(std::move(name), worst, 0.0, tolerance);
  r.detail = "max over " + std::to_string(cases) + " cases";
  return r;
}

std::vector<IdentityReport> identities_suite(std::uint64_t seed) {
  constexpr std::size_t kCases = 1000;
  Rng rng(mix_seeds(seed, 1));
  double zero_sum = 0.0, onpolicy = 0.0, offpolicy = 0.0, lemma = 0.0;
  std::uniform_real_distribution<double> pick_eps(-1e-3, 1e-3);
  for (std::size_t n = 0; n < kCases; ++n) {
    const std::size_t v = random_vocab(rng, 4096);
    const auto p = random_distribution(v, rng);
    const auto q = random_distribution(v, rng);
    zero_sum = std::max(zero_sum, std::fabs(compensated_sum(discriminator_scores(p))));
    onpolicy = std::max(onpolicy, onpolicy_identity(p).abs_error);
    offpolicy = std::max(offpolicy, offpolicy_identity(p, q).abs_error);

    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    const double eps = pick_eps(rng);
    std::vector<double> dz(v, 0.0);
    dz[k] = eps;
    const auto jvp = softmax_jvp(p, dz);
    const double pk = p.probs()[k];
    for (std::size_t i = 0; i < v; ++i) {
      const double closed = i == k ? eps * pk * (1.0 - pk) : -eps * p.probs()[i] * pk;
      lemma = std::max(lemma, std::fabs(jvp[i] - closed));
    }
  }
  return {
      worst_of("softmax_jvp_single_logit_closed_form", lemma, 1e-14, kCases),
      worst_of("discriminator_zero_sum", zero_sum, 1e-10, kCases),
      worst_of("onpolicy_identity", onpolicy, 1e-10, kCases),
      worst_of("offpolicy_identity", offpolicy, 1e-10, kCases),
  };
}

std::vector<IdentityReport> order_suite(std::uint64_t seed) {
  std::vector<IdentityReport> out;
  const double ladder[] = {1e-2, 5e-3, 2.5e-3};
  const double bound_eps[] = {1e-2, 1e-3, 1e-4};
  for (auto kind : {PerturbationKind::single_logit, PerturbationKind::grpo_step}) {
    const std::string tag =
        kind == PerturbationKind::single_logit ? "single_logit" : "grpo_step";
    Rng rng(mix_seeds(seed, kind == PerturbationKind::single_logit ? 2 : 3));
    double worst_ratio = 0.0;
    std::vector<double> pooled(std::size(ladder), 0.0);
    std::size_t cases = 0;
    for (std::size_t v : {2, 10, 1000}) {
      for (int n = 0; n < 100; ++n, ++cases) {
        const auto p = random_distribution(v, rng);
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
        for (double eps : bound_eps) {
          for (double sgn : {1.0, -1.0}) {
            const auto r = entropy_change(p, {kind, k, sgn * eps}, Precision::extended);
            worst_ratio = std::max(worst_ratio, std::fabs(r.residual) / (eps * eps));
          }
        }
        for (std::size_t i = 0; i < std::size(ladder); ++i) {
          const auto r = entropy_change(p, {kind, k, ladder[i]}, Precision::extended);
          pooled[i] += std::fabs(r.residual);
        }
      }
    }
    auto bound = make_deterministic_report("first_order_bound_" + tag, worst_ratio,
                                           0.0, 5.0);
    bound.detail = "max |exact - predicted| / eps^2 over " + std::to_string(cases) +
                   " cases, eps in {1e-2,1e-3,1e-4}";
    out.push_back(bound);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(std::size(ladder));
    for (std::size_t i = 0; i < std::size(ladder); ++i) {
      const double x = std::log(ladder[i]);
      const double y = std::log(pooled[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    auto order = make_deterministic_report("convergence_order_" + tag, slope, 2.0, 0.2);
    order.detail = "pooled residual slope over ladder (1e-2, 5e-3, 2.5e-3)";
    out.push_back(order);
  }
  return out;
}

TrainingBatch isolated_batch(const RunConfig& cfg, const TabularPolicy& policy,
                             std::uint64_t stream) {
  std::vector<int> contexts(static_cast<std::size_t>(cfg.groups_per_step));
  for (int g = 0; g < cfg.groups_per_step; ++g) contexts[g] = g % cfg.task.num_contexts;
  return sample_batch(policy, cfg.task, contexts, cfg.group_size, stream);
}

std::vector<IdentityReport> covariance_suite(std::uint64_t seed) {
  RunConfig cfg;
  cfg.mode = PolicyMode::isolated;
  cfg.init.kind = InitPattern::Kind::random;
  cfg.init.scale = 1.0;
  cfg.init.seed = seed;
  cfg.group_size = 8;
  cfg.groups_per_step = 8;

  std::vector<IdentityReport> out;
  std::vector<double> errors;
  for (double eta : {1e-3, 1e-4, 1e-5}) {
    TabularPolicy policy(cfg.mode, 10, cfg.init);
    TrainingBatch batch = isolated_batch(cfg, policy, mix_seeds(seed, 4));
    auto check = batch_entropy_change_check(policy, batch, eta);
    errors.push_back(std::fabs(check.measured - check.predicted));
    if (eta == 1e-4) {
      check.report.name = "batch_covariance_eta_1e-4";
      check.report.detail = "relative error " + format_double(check.relative_error);
      out.push_back(check.report);
    }
  }
  // At least linear: the absolute error falls 10x or more per decade of eta.
  const double worst_shrink =
      std::max(errors[1] / errors[0], errors[2] / errors[1]);
  auto shrink = make_deterministic_report("batch_covariance_error_shrink",
                                          worst_shrink, 0.0, 0.1);
  shrink.detail = "worst ratio of absolute errors per 10x eta reduction";
  out.push_back(shrink);
  return out;
}

std::vector<IdentityReport> montecarlo_suite(std::uint64_t seed) {
  ModularSumTask task;
  InitPattern init;
  init.kind = InitPattern::Kind::random;
  init.scale = 1.5;
  init.seed = seed;
  TabularPolicy current(PolicyMode::shared, 10, init);

  std::vector<IdentityReport> out;
  std::vector<double> ses;
  const std::size_t sizes[] = {10000, 100000, 1000000};
  for (std::size_t n : sizes) {
    auto r = batch_mc_identity(current, nullptr, task, n, mix_seeds(seed, n));
    ses.push_back(r.std_error);
    if (n == 1000000) out.push_back(r.report);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = std::log(static_cast<double>(sizes[i]));
    const double y = std::log(ses[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  auto scaling = make_deterministic_report("batch_mc_std_error_slope", slope, -0.5, 0.1);
  scaling.detail = "d log se / d log N over N in {1e4, 1e5, 1e6}";
  out.push_back(scaling);

  // Stale behavior snapshot: current is the behavior policy moved by fresh
  // random logit noise at every state.
  TabularPolicy behavior = current;
  Rng noise(mix_seeds(seed, 5));
  std::normal_distribution<double> normal(0.0, 0.5);
  for (int c = 0; c < task.num_contexts; ++c) {
    for (int t = 0; t < task.seq_len; ++t) {
      std::vector<double> dz(10);
      for (double& d : dz) d = normal(noise);
      current.add_to_logits(current.key(c, t), dz);
    }
  }
  out.push_back(
      batch_mc_identity(current, &behavior, task, 1000000, mix_seeds(seed, 6)).report);
  return out;
}

}  // namespace

VerifySuite parse_verify_suite(const std::string& s) {
  if (s == "identities") return VerifySuite::identities;
  if (s == "order") return VerifySuite::order;
  if (s == "covariance") return VerifySuite::covariance;
  if (s == "montecarlo") return VerifySuite::montecarlo;
  if (s == "all") return VerifySuite::all;
  throw InvalidInput("unknown verify suite '" + s + "'");
}

std::vector<IdentityReport> run_verify(VerifySuite suite, std::uint64_t seed) {
  std::vector<IdentityReport> out;
  auto append = [&out](std::vector<IdentityReport> more) {
    out.insert(out.end(), more.begin(), more.end());
  };
  if (suite == VerifySuite::identities || suite == VerifySuite::all) {
    append(identities_suite(seed));
  }
  if (suite == VerifySuite::order || suite == VerifySuite::all) {
    append(order_suite(seed));
  }
  if (suite == VerifySuite::covariance || suite == VerifySuite::all) {
    append(covariance_suite(seed));
  }
  if (suite == VerifySuite::montecarlo || suite == VerifySuite::all) {
    append(montecarlo_suite(seed));
  }
  return out;
}

}  // namespace entlab

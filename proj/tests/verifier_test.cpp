// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/verifier.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/error.hpp"
#include "oracle.hpp"

namespace {

using namespace entlab;

TEST(Reports, PassRules) {
  const auto d = make_deterministic_report("x", 1.0 + 1e-11, 1.0, 1e-10);
  EXPECT_TRUE(d.passed);
  EXPECT_FALSE(make_deterministic_report("x", 1.1, 1.0, 1e-10).passed);
  EXPECT_TRUE(make_monte_carlo_report("m", 0.4, 0.1, 5).passed);
  EXPECT_FALSE(make_monte_carlo_report("m", -0.6, 0.1, 5).passed);
  const auto j = nlohmann::json::parse(make_monte_carlo_report("m", 0.4, 0.1, 5).to_ndjson());
  EXPECT_EQ(j.at("name"), "m");
  EXPECT_DOUBLE_EQ(j.at("mc_std_error").get<double>(), 0.1);
  EXPECT_TRUE(nlohmann::json::parse(d.to_ndjson()).at("mc_std_error").is_null());
}

TEST(RandomDistribution, RespectsFloor) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto d = random_distribution(1000, rng);
    for (double p : d.probs()) EXPECT_GE(p, 1e-6);
  }
  EXPECT_THROW(random_distribution(10, rng, 0.2), InvalidInput);
}

TEST(OnPolicyIdentity, Examples) {
  const auto u = softmax(LogitVector(std::vector<double>(100, 0.0)));
  EXPECT_EQ(onpolicy_identity(u).value, 0.0);
  const auto two = ProbabilityDistribution::from_probabilities({0.9, 0.1});
  const auto r = onpolicy_identity(two);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(0.9 * centered_score(two, 0) + 0.1 * centered_score(two, 1), 0.0, 1e-16);
  Rng rng(2);
  EXPECT_TRUE(onpolicy_identity(random_distribution(4096, rng)).passed);
}

TEST(OffPolicyIdentity, Examples) {
  const auto cur = ProbabilityDistribution::from_probabilities({0.9, 0.1});
  const auto beh = ProbabilityDistribution::from_probabilities({0.5, 0.5});
  EXPECT_LE(std::fabs(offpolicy_identity(cur, beh).value), 1e-12);
  EXPECT_NEAR(offpolicy_identity(cur, cur).value, onpolicy_identity(cur).value, 1e-16);
  const auto three = ProbabilityDistribution::from_probabilities({0.2, 0.3, 0.5});
  EXPECT_THROW(offpolicy_identity(cur, three), InvalidInput);
}

TEST(BatchMonteCarlo, UniformIsExactlyZero) {
  const ModularSumTask task;
  const TabularPolicy policy(PolicyMode::shared, 10, InitPattern{});
  const auto r = batch_mc_identity(policy, nullptr, task, 10000, 3);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_TRUE(r.report.passed);
  EXPECT_THROW(batch_mc_identity(policy, nullptr, task, 999, 3), InvalidInput);
}

TEST(BatchMonteCarlo, PeakedPolicyWithinFiveSe) {
  const ModularSumTask task;
  const TabularPolicy policy(PolicyMode::shared, 10,
                             InitPattern{InitPattern::Kind::random, 2.0, 1.5, 4});
  const auto r = batch_mc_identity(policy, nullptr, task, 100000, 5);
  EXPECT_TRUE(r.report.passed) << r.report.to_ndjson();
  EXPECT_GT(r.std_error, 0.0);

  TabularPolicy stale = policy;
  TabularPolicy current = policy;
  current.add_to_logits(current.key(0, 0), std::vector<double>{0.5, 0, 0, 0, 0, 0, 0, 0, 0, -0.5});
  const auto off = batch_mc_identity(current, &stale, task, 100000, 6);
  EXPECT_TRUE(off.report.passed) << off.report.to_ndjson();
  EXPECT_EQ(off.report.name, "batch_mc_identity_offpolicy");
}

std::vector<TokenRecord> cov_tokens(const std::vector<double>& a, const std::vector<double>& c) {
  std::vector<TokenRecord> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    t[i].advantage = a[i];
    t[i].centered_score = c[i];
  }
  return t;
}

TEST(CovariancePrediction, Examples) {
  EXPECT_NEAR(covariance_prediction(cov_tokens({1, -1}, {0.04, -0.04}), 1e-3), -4e-5, 1e-18);
  EXPECT_EQ(covariance_prediction(cov_tokens({1, 1, 1}, {0.1, 0.5, -0.2}), 1e-3), 0.0);
  EXPECT_NEAR(covariance_prediction(cov_tokens({1, -1, 2}, {0.3, 0.3, 0.3}), 1e-3), 0.0, 1e-18);
  EXPECT_THROW(covariance_prediction(cov_tokens({1}, {0.1}), 1e-3), InvalidInput);
}

TEST(CovariancePrediction, ShiftInvariantAndMatchesOracle) {
  Rng rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(64), c(64);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = n(rng);
    c[i] = 0.1 * n(rng);
  }
  const double base = covariance_prediction(cov_tokens(a, c), 1.0);
  EXPECT_NEAR(base, -oracle::population_cov(a, c), 1e-15);
  auto a2 = a;
  auto c2 = c;
  for (auto& x : a2) x += 3.0;
  for (auto& x : c2) x -= 0.7;
  EXPECT_NEAR(covariance_prediction(cov_tokens(a2, c), 1.0), base, 1e-12);
  EXPECT_NEAR(covariance_prediction(cov_tokens(a, c2), 1.0), base, 1e-12);
}

TEST(CovariancePrediction, OffPolicyWeightsByRatio) {
  auto t = cov_tokens({1, -1}, {0.04, -0.04});
  t[0].ratio = 2.0;
  // factors (0.08, -0.04): cov = 0.5 * (1 * 0.06 + -1 * -0.06) = 0.06
  EXPECT_NEAR(covariance_prediction(t, 1.0), -0.06, 1e-16);
}

TEST(BatchEntropyCheck, IsolatedMatchesWithinFivePercent) {
  const ModularSumTask task;
  TabularPolicy policy(PolicyMode::isolated, 10,
                       InitPattern{InitPattern::Kind::random, 2.0, 1.0, 3});
  const std::vector<int> contexts{0, 1, 2, 3, 4, 5, 6, 7};
  auto batch = sample_batch(policy, task, contexts, 8, 21);
  const auto r = batch_entropy_change_check(policy, batch, 1e-4);
  EXPECT_TRUE(r.report.passed) << r.report.to_ndjson();
  EXPECT_LT(r.relative_error, 0.05);
}

TEST(BatchEntropyCheck, DegenerateGroupsGiveZero) {
  const ModularSumTask task{10, 4, 10};
  TabularPolicy policy(PolicyMode::isolated, 10, InitPattern{InitPattern::Kind::peaked, 30.0});
  // token 0 is near certain, so every rollout sums to 0 and rewards agree
  auto batch = sample_batch(policy, task, std::vector<int>{3, 5}, 4, 1);
  const auto r = batch_entropy_change_check(policy, batch, 1e-4);
  EXPECT_EQ(r.measured, 0.0);
  EXPECT_EQ(r.predicted, 0.0);
  EXPECT_TRUE(r.report.passed);
}

TEST(BatchEntropyCheck, SharedModeRejected) {
  const ModularSumTask task;
  TabularPolicy policy(PolicyMode::shared, 10, InitPattern{});
  auto batch = sample_batch(policy, task, std::vector<int>{0}, 4, 1);
  EXPECT_THROW(batch_entropy_change_check(policy, batch, 1e-4), InvalidInput);
}

TEST(LatentAdvantage, ExpectationMatchesCovariance) {
  Rng rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<LogitVector> states;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> z(10);
    for (auto& x : z) x = n(rng);
    states.emplace_back(z);
  }
  const auto adv = [](std::size_t s, std::size_t k) {
    return std::sin(static_cast<double>(3 * s + k));
  };
  const double eta = 1e-4;
  const auto sum = latent_advantage_positions(states, adv, eta);
  ASSERT_EQ(sum.per_state.size(), 5u);
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto& r = sum.per_state[s];
    EXPECT_NEAR(r.expected_change, r.predicted, 0.05 * std::fabs(r.predicted) + 1e-12);
    // oracle: sum_k p_k dH_k at 50 digits
    const auto z = oracle::to_real(std::vector<double>(states[s].values().begin(), states[s].values().end()));
    const auto p = oracle::softmax(z);
    oracle::Real expect = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      std::vector<oracle::Real> dz(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) dz[i] = eta * adv(s, k) * ((i == k) - p[i]);
      expect += p[k] * oracle::entropy_change(z, dz);
    }
    EXPECT_NEAR(r.expected_change, static_cast<double>(expect), 1e-15);
  }
}

}  // namespace

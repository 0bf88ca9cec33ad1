// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/run_config.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "entlab/error.hpp"

namespace {

using namespace entlab;

TEST(RunConfig, DefaultsMatchDeskScale) {
  const RunConfig cfg;
  EXPECT_EQ(cfg.task.vocab_size, 10);
  EXPECT_EQ(cfg.task.seq_len, 4);
  EXPECT_EQ(cfg.task.num_contexts, 10);
  EXPECT_EQ(cfg.group_size, 8);
  EXPECT_EQ(cfg.groups_per_step, 8);
  EXPECT_EQ(cfg.steps, 200);
  EXPECT_DOUBLE_EQ(cfg.eta, 1e-3);
  EXPECT_EQ(cfg.aggregation, Aggregation::per_token_sum);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(RunConfig, RoundTripsEveryField) {
  RunConfig cfg;
  cfg.set("vocab_size", "7");
  cfg.set("init", "random");
  cfg.set("init_scale", "0.1");
  cfg.set("init_seed", "12345678901");
  cfg.set("mode", "isolated");
  cfg.set("eta", "0.0123456789012345678");
  cfg.set("aggregation", "length_mean");
  cfg.set("clip_rule", "sign_rule");
  cfg.set("sign_rule", "mask_S_neg");
  cfg.set("applies_to", "negative");
  cfg.set("mu", "1.5");
  cfg.set("epochs", "3");
  cfg.set("advantage", "gae");
  cfg.set("gae_values", "0.1,0.2,0.3,0.4,0");
  cfg.set("context_schedule", "round_robin");
  cfg.set("output_dir", "some/dir");
  const auto text = cfg.to_text();
  const auto back = RunConfig::parse_text(text);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.eta, cfg.eta);
  EXPECT_EQ(back.init.seed, 12345678901u);
  EXPECT_EQ(back.clip.mu_plus, 1.5);
  EXPECT_EQ(back.gae.values.size(), 5u);
  EXPECT_EQ(back.output_dir, "some/dir");
}

TEST(RunConfig, ParsesCommentsAndWhitespace) {
  std::istringstream in("# header\n\n  eta = 0.5  \nsteps=3 # trailing\n");
  const auto cfg = RunConfig::parse(in);
  EXPECT_EQ(cfg.eta, 0.5);
  EXPECT_EQ(cfg.steps, 3);
}

TEST(RunConfig, RejectsBadInput) {
  RunConfig cfg;
  EXPECT_THROW(cfg.set("nonsense", "1"), InvalidInput);
  EXPECT_THROW(cfg.set("eta", "fast"), InvalidInput);
  EXPECT_THROW(cfg.set("steps", "1.5"), InvalidInput);
  EXPECT_THROW(cfg.set("mode", "both"), InvalidInput);
  EXPECT_THROW(RunConfig::parse_text("eta\n"), InvalidInput);
  EXPECT_THROW(RunConfig::load("/nonexistent.cfg"), InvalidInput);
  RunConfig bad;
  bad.group_size = 1;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = RunConfig{};
  bad.eta = -1;
  EXPECT_THROW(bad.validate(), InvalidInput);
  bad = RunConfig{};
  bad.clip.rule = ClipRule::sign_rule;
  EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(FormatDouble, RoundTripsAndIsShort) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1e-3), "0.001");
  EXPECT_EQ(format_double(INFINITY), "inf");
  for (double v : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-300, 123456789.125}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Fnv1a, KnownVector) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

}  // namespace

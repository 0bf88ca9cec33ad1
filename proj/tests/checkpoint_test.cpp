// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include "entlab/checkpoint.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "entlab/error.hpp"

namespace {

using namespace entlab;

TEST(Checkpoint, RoundTripIsBitExact) {
  InitPattern init{InitPattern::Kind::random, 2.0, 1.25, 99};
  TabularPolicy policy(PolicyMode::isolated, 5, init);
  policy.add_to_logits(policy.key(1, 2, 3, 4), std::vector<double>{0.1, -1e-300, 1.0 / 3, 0, 7e10});
  policy.add_to_logits(policy.key(0, 0, 0, 0), std::vector<double>{1, 2, 3, 4, 5});

  std::stringstream ss;
  write_checkpoint(ss, policy, 17);
  const auto restored = read_checkpoint(ss);
  EXPECT_EQ(restored.step, 17);
  EXPECT_EQ(restored.policy.mode(), PolicyMode::isolated);
  EXPECT_EQ(restored.policy.vocab_size(), 5u);
  EXPECT_EQ(restored.policy.init().seed, 99u);
  EXPECT_DOUBLE_EQ(restored.policy.init().scale, 1.25);
  ASSERT_EQ(restored.policy.table().size(), policy.table().size());
  for (const auto& [key, z] : policy.table()) {
    const auto r = restored.policy.logits(key);
    for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(r[i], z[i]);
  }
  // unvisited states follow the same init pattern
  const auto fresh = policy.key(9, 3, 1, 1);
  EXPECT_EQ(restored.policy.logits(fresh)[2], policy.logits(fresh)[2]);

  std::stringstream again;
  write_checkpoint(again, restored.policy, restored.step);
  std::stringstream first;
  write_checkpoint(first, policy, 17);
  EXPECT_EQ(again.str(), first.str());
}

TEST(Checkpoint, RejectsMalformedInput) {
  std::stringstream empty;
  EXPECT_THROW(read_checkpoint(empty), InvalidInput);
  std::stringstream garbage("not json\n");
  EXPECT_THROW(read_checkpoint(garbage), InvalidInput);
  std::stringstream wrong("{\"format\":\"other\",\"version\":1}\n");
  EXPECT_THROW(read_checkpoint(wrong), InvalidInput);
  EXPECT_THROW(read_checkpoint_file("/nonexistent/ckpt.ndjson"), InvalidInput);
}

}  // namespace

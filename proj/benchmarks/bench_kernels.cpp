// Copyright 2026 The entlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "entlab/discriminator.hpp"
#include "entlab/dynamics.hpp"
#include "entlab/grpo.hpp"
#include "entlab/softmax.hpp"
#include "entlab/verifier.hpp"

namespace {

using namespace entlab;

std::vector<double> random_logits(std::size_t v) {
  Rng rng(42);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<double> z(v);
  for (auto& x : z) x = n(rng);
  return z;
}

void BM_Softmax(benchmark::State& state) {
  const LogitVector z(random_logits(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto d = softmax(z);
    benchmark::DoNotOptimize(d.entropy());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Softmax)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_CenteredScore(benchmark::State& state) {
  const auto d = softmax(LogitVector(random_logits(static_cast<std::size_t>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(centered_score(d, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CenteredScore)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_ExactEntropyChange(benchmark::State& state) {
  const auto d = softmax(LogitVector(random_logits(static_cast<std::size_t>(state.range(0)))));
  const PerturbationSpec spec{PerturbationKind::grpo_step, 1, 1e-3};
  const auto precision = state.range(1) ? Precision::extended : Precision::standard;
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropy_change(d, spec, precision).residual);
  }
}
BENCHMARK(BM_ExactEntropyChange)->ArgsProduct({{10, 1000}, {0, 1}});

void BM_GrpoStep(benchmark::State& state) {
  const ModularSumTask task;
  const auto mode = state.range(0) ? PolicyMode::isolated : PolicyMode::shared;
  InitPattern init;
  init.kind = InitPattern::Kind::random;
  const std::vector<int> contexts{0, 1, 2, 3, 4, 5, 6, 7};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    state.PauseTiming();
    TabularPolicy policy(mode, task.vocab_size, init);
    auto batch = sample_batch(policy, task, contexts, 8, ++stream,
                              AdvantageSource::group, GaeConfig{});
    token_step_sizes(batch.tokens, 1e-3, Aggregation::per_token_sum);
    state.ResumeTiming();
    benchmark::DoNotOptimize(apply_grpo_step(policy, batch.tokens).states.size());
  }
}
BENCHMARK(BM_GrpoStep)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();

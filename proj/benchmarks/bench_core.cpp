#include <benchmark/benchmark.h>

#include "rewardlab/harness.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/scalarize.hpp"
#include "rewardlab/solvers.hpp"

namespace {

rewardlab::Momdp bench_momdp(int states, int actions, int rewards) {
    rewardlab::RandomInstanceSpec spec;
    spec.states = states;
    spec.actions = actions;
    spec.rewards = rewards;
    spec.seed = 7;
    return rewardlab::generate_random_instance(spec);
}

void BM_EvaluatePolicy(benchmark::State& state) {
    const rewardlab::Momdp momdp = bench_momdp(static_cast<int>(state.range(0)), 4, 1);
    const rewardlab::StationaryPolicy policy = rewardlab::StationaryPolicy::uniform(
        momdp.mdp().num_states(), momdp.mdp().num_actions());
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rewardlab::evaluate_policy(momdp.mdp(), momdp.rewards()[0], policy).j);
}
BENCHMARK(BM_EvaluatePolicy)->Arg(6)->Arg(20)->Arg(60);

void BM_EmbedPolicy(benchmark::State& state) {
    const rewardlab::Momdp momdp = bench_momdp(static_cast<int>(state.range(0)), 4, 1);
    const rewardlab::StationaryPolicy policy = rewardlab::StationaryPolicy::uniform(
        momdp.mdp().num_states(), momdp.mdp().num_actions());
    for (auto _ : state)
        benchmark::DoNotOptimize(rewardlab::embed_policy(momdp.mdp(), policy).mass.sum());
}
BENCHMARK(BM_EmbedPolicy)->Arg(6)->Arg(20)->Arg(60);

void BM_OptimalValues(benchmark::State& state) {
    const rewardlab::Momdp momdp = bench_momdp(static_cast<int>(state.range(0)), 4, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rewardlab::optimal_values(momdp.mdp(), momdp.rewards()[0]).tables.v.sum());
}
BENCHMARK(BM_OptimalValues)->Arg(6)->Arg(20)->Arg(60);

void BM_FitWeights(benchmark::State& state) {
    const rewardlab::OrderingInstance instance =
        rewardlab::generate_ordering_instance("maxmin", false, 7);
    const rewardlab::PolicySample sample = rewardlab::sample_policies(instance.momdp, 24, 11);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rewardlab::fit_weights(instance.momdp, instance.objective, sample).margin);
}
BENCHMARK(BM_FitWeights);

} // namespace

BENCHMARK_MAIN();

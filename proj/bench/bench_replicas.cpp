// Serial reference vs OpenMP fan-out on the replica kernels.
// Thread count is the benchmark argument; 0 selects the serial path.
#include "skembed/analysis.hpp"
#include "skembed/parallel.hpp"

#include <benchmark/benchmark.h>

using namespace skembed;

namespace {

const ChainSpec& coin() {
    static const ChainSpec c = ChainSpec::coin(Rational(1, 3));
    return c;
}

const EmbeddingProblem& problem() {
    static const EmbeddingProblem pb(coin(), coin().state("tail"), TargetMeasure::dirac(coin(), coin().state("head")));
    return pb;
}

RunOptions options(const benchmark::State& state, std::uint64_t replicas) {
    RunOptions run{.seed = 20261016, .replicas = replicas, .cap = 100'000};
    run.threads = static_cast<int>(state.range(0));
    run.serial = run.threads == 0;
    if (run.serial) run.threads = 1;
    return run;
}

void BM_sample_tstar(benchmark::State& state) {
    const RunOptions run = options(state, 20'000);
    for (auto _ : state) benchmark::DoNotOptimize(sample_times(problem(), SolverSpec{}, run));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * run.replicas));
}

void BM_sample_mixture(benchmark::State& state) {
    const RunOptions run = options(state, 20'000);
    for (auto _ : state) benchmark::DoNotOptimize(sample_times(problem(), SolverSpec::parse("mixture"), run));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * run.replicas));
}

void BM_verify_shifted_law(benchmark::State& state) {
    const RunOptions run = options(state, 5'000);
    for (auto _ : state) benchmark::DoNotOptimize(verify_shifted_law(problem(), SolverSpec{}, run));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * run.replicas));
}

void BM_first_passage(benchmark::State& state) {
    const RunOptions run = options(state, 50'000);
    TailOptions opt;
    opt.resamples = 50;
    for (auto _ : state) benchmark::DoNotOptimize(first_passage_oracle(IncrementLaw::fair_pm1(), run, opt));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * run.replicas));
}

void thread_args(benchmark::internal::Benchmark* b) {
    b->Arg(0);
    for (int t = 1; t <= default_threads(); t *= 2) b->Arg(t);
    b->Unit(benchmark::kMillisecond)->UseRealTime();
}

} // namespace

BENCHMARK(BM_sample_tstar)->Apply(thread_args);
BENCHMARK(BM_sample_mixture)->Apply(thread_args);
BENCHMARK(BM_verify_shifted_law)->Apply(thread_args);
BENCHMARK(BM_first_passage)->Apply(thread_args);

BENCHMARK_MAIN();

// Serial reference versus blocked OpenMP gradient kernels on a logistic
// finite sum. Run with --benchmark_filter to pick a kernel.
#include "ssrgd/kernels.hpp"
#include "ssrgd/problems.hpp"
#include "ssrgd/rng.hpp"

#include <benchmark/benchmark.h>

#include <map>

namespace {

using namespace ssrgd;

const ProblemInstance& instance(std::uint64_t n) {
  static std::map<std::uint64_t, ProblemInstance> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_nonconvex_logistic(n, 64, 0.1, 1)).first;
  return it->second;
}

void BM_FullGradSerial(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto& inst = instance(n);
  Vector out;
  for (auto _ : state) {
    kernels::serial::mean_grad_all(*inst, n, inst.x0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_FullGradParallel(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto& inst = instance(n);
  Vector out;
  for (auto _ : state) {
    kernels::mean_grad_all(*inst, n, inst.x0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_MinibatchDiffSerial(benchmark::State& state) {
  const auto b = static_cast<std::uint64_t>(state.range(0));
  const auto& inst = instance(1 << 16);
  RngStream rng(1, 0);
  const auto ids = sample_minibatch(rng, inst->num_components(), b);
  const Vector y = inst.x0 + Vector::Constant(inst.x0.size(), 0.01);
  Vector out;
  for (auto _ : state) {
    kernels::serial::mean_grad_diff(*inst, ids, y, inst.x0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * b));
}

void BM_MinibatchDiffParallel(benchmark::State& state) {
  const auto b = static_cast<std::uint64_t>(state.range(0));
  const auto& inst = instance(1 << 16);
  RngStream rng(1, 0);
  const auto ids = sample_minibatch(rng, inst->num_components(), b);
  const Vector y = inst.x0 + Vector::Constant(inst.x0.size(), 0.01);
  Vector out;
  for (auto _ : state) {
    kernels::mean_grad_diff(*inst, ids, y, inst.x0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * b));
}

}  // namespace

BENCHMARK(BM_FullGradSerial)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FullGradParallel)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MinibatchDiffSerial)->RangeMultiplier(4)->Range(64, 1 << 14)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MinibatchDiffParallel)->RangeMultiplier(4)->Range(64, 1 << 14)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

// Batched component-gradient reductions.
//
// The default kernels split the slots into fixed-size blocks, evaluate blocks
// in parallel with OpenMP and add block partials in block order. The result
// depends only on the slot order and kBlock, never on the thread count. The
// serial namespace keeps a plain slot-order loop as the reference used by the
// tests and the benchmark.
#pragma once

#include "ssrgd/problem.hpp"

#include <span>

namespace ssrgd::kernels {

inline constexpr std::size_t kBlock = 256;

/// out = (1/|ids|) sum_k grad f_{ids[k]}(x)
void mean_grad(const Problem& p, std::span<const SampleId> ids, const Vector& x, Vector& out);

/// out = (1/n) sum_{i<n} grad f_i(x)
void mean_grad_all(const Problem& p, std::uint64_t n, const Vector& x, Vector& out);

/// out = (1/|ids|) sum_k (grad f_{ids[k]}(x) - grad f_{ids[k]}(y))
void mean_grad_diff(const Problem& p, std::span<const SampleId> ids, const Vector& x,
                    const Vector& y, Vector& out);

/// (1/n) sum_{i<n} slot_value(i), with the same blocked order as the gradient kernels.
template <class F>
double blocked_mean(std::uint64_t n, F&& slot_value);

namespace serial {
void mean_grad(const Problem& p, std::span<const SampleId> ids, const Vector& x, Vector& out);
void mean_grad_all(const Problem& p, std::uint64_t n, const Vector& x, Vector& out);
void mean_grad_diff(const Problem& p, std::span<const SampleId> ids, const Vector& x,
                    const Vector& y, Vector& out);
}  // namespace serial

int max_threads();
void set_threads(int n);

template <class F>
double blocked_mean(std::uint64_t n, F&& slot_value) {
  if (n == 0) return 0.0;
  const std::int64_t blocks = static_cast<std::int64_t>((n + kBlock - 1) / kBlock);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kBlock;
    const std::uint64_t hi = std::min<std::uint64_t>(n, lo + kBlock);
    double s = 0.0;
    for (std::uint64_t i = lo; i < hi; ++i) s += slot_value(i);
    partial[static_cast<std::size_t>(blk)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(n);
}

}  // namespace ssrgd::kernels

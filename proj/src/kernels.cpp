#include "ssrgd/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ssrgd::kernels {

namespace {

// Shared driver: slot k contributes grad f_{id(k)}(x) [- grad f_{id(k)}(y)].
template <class IdAt>
void blocked_reduce(const Problem& p, std::uint64_t count, IdAt id_at, const Vector& x,
                    const Vector* y, Vector& out) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  out.setZero(d);
  if (count == 0) return;
  const std::int64_t blocks = static_cast<std::int64_t>((count + kBlock - 1) / kBlock);
  if (blocks == 1) {
    Vector g(d);
    for (std::uint64_t k = 0; k < count; ++k) {
      p.component_grad(id_at(k), x, g);
      out += g;
      if (y) {
        p.component_grad(id_at(k), *y, g);
        out -= g;
      }
    }
    out /= static_cast<double>(count);
    return;
  }
  Matrix partial = Matrix::Zero(d, blocks);
#pragma omp parallel
  {
    Vector g(d);
#pragma omp for schedule(static)
    for (std::int64_t blk = 0; blk < blocks; ++blk) {
      const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kBlock;
      const std::uint64_t hi = std::min<std::uint64_t>(count, lo + kBlock);
      auto col = partial.col(blk);
      for (std::uint64_t k = lo; k < hi; ++k) {
        p.component_grad(id_at(k), x, g);
        col += g;
        if (y) {
          p.component_grad(id_at(k), *y, g);
          col -= g;
        }
      }
    }
  }
  for (std::int64_t blk = 0; blk < blocks; ++blk) out += partial.col(blk);
  out /= static_cast<double>(count);
}

template <class IdAt>
void serial_reduce(const Problem& p, std::uint64_t count, IdAt id_at, const Vector& x,
                   const Vector* y, Vector& out) {
  const auto d = static_cast<Eigen::Index>(p.dim());
  out.setZero(d);
  if (count == 0) return;
  Vector g(d);
  for (std::uint64_t k = 0; k < count; ++k) {
    p.component_grad(id_at(k), x, g);
    out += g;
    if (y) {
      p.component_grad(id_at(k), *y, g);
      out -= g;
    }
  }
  out /= static_cast<double>(count);
}

}  // namespace

void mean_grad(const Problem& p, std::span<const SampleId> ids, const Vector& x, Vector& out) {
  blocked_reduce(p, ids.size(), [&](std::uint64_t k) { return ids[k]; }, x, nullptr, out);
}

void mean_grad_all(const Problem& p, std::uint64_t n, const Vector& x, Vector& out) {
  blocked_reduce(p, n, [](std::uint64_t k) { return SampleId{k}; }, x, nullptr, out);
}

void mean_grad_diff(const Problem& p, std::span<const SampleId> ids, const Vector& x,
                    const Vector& y, Vector& out) {
  blocked_reduce(p, ids.size(), [&](std::uint64_t k) { return ids[k]; }, x, &y, out);
}

namespace serial {

void mean_grad(const Problem& p, std::span<const SampleId> ids, const Vector& x, Vector& out) {
  serial_reduce(p, ids.size(), [&](std::uint64_t k) { return ids[k]; }, x, nullptr, out);
}

void mean_grad_all(const Problem& p, std::uint64_t n, const Vector& x, Vector& out) {
  serial_reduce(p, n, [](std::uint64_t k) { return SampleId{k}; }, x, nullptr, out);
}

void mean_grad_diff(const Problem& p, std::span<const SampleId> ids, const Vector& x,
                    const Vector& y, Vector& out) {
  serial_reduce(p, ids.size(), [&](std::uint64_t k) { return ids[k]; }, x, &y, out);
}

}  // namespace serial

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace ssrgd::kernels

// Gradient estimators: exact full gradient, online large-batch anchor,
// recursive (SARAH-style) estimator and SVRG snapshot estimator.
#pragma once

#include "ssrgd/problem.hpp"
#include "ssrgd/rng.hpp"

#include <optional>
#include <span>

namespace ssrgd {

/// State of the recursive estimator: v was formed at prev_x.
struct RecursiveState {
  Vector v;
  Vector prev_x;
};

/// SVRG snapshot pair (x_tilde, grad f(x_tilde)).
struct SvrgSnapshot {
  Vector anchor;
  Vector anchor_grad;
};

/// Exact (1/n) sum_i grad f_i(x); charges n to the counter.
Vector full_gradient(const Problem& p, const Vector& x, SfoCounter& sfo);

/// (1/B) sum over B i.i.d. draws; charges B.
Vector large_batch_gradient(const Problem& p, const Vector& x, std::uint64_t batch,
                            RngStream& rng, SfoCounter& sfo);

/// v <- v + (1/b) sum_{i in batch} (grad f_i(x_new) - grad f_i(prev_x)); prev_x <- x_new.
/// The same index multiset is used at both points. Charges 2b raw / b nominal.
void recursive_step(const Problem& p, RecursiveState& state, const Vector& x_new,
                    std::span<const SampleId> batch, SfoCounter& sfo);

/// (1/b) sum_{i in batch} (grad f_i(x) - grad f_i(x_tilde)) + grad f(x_tilde).
Vector svrg_step(const Problem& p, const std::optional<SvrgSnapshot>& snapshot, const Vector& x,
                 std::span<const SampleId> batch, SfoCounter& sfo);

}  // namespace ssrgd

#include "ssrgd/estimators.hpp"

#include "ssrgd/kernels.hpp"

namespace ssrgd {

Vector full_gradient(const Problem& p, const Vector& x, SfoCounter& sfo) {
  if (p.mode() != OracleMode::finite_sum) {
    throw Error(ErrorKind::unsupported_oracle, "full gradient requires a finite-sum problem");
  }
  Vector out;
  kernels::mean_grad_all(p, p.num_components(), x, out);
  sfo.add_full(p.num_components());
  return out;
}

Vector large_batch_gradient(const Problem& p, const Vector& x, std::uint64_t batch,
                            RngStream& rng, SfoCounter& sfo) {
  if (batch == 0) throw Error(ErrorKind::invalid_config, "large batch size B must be >= 1");
  const IndexMultiset ids = sample_minibatch(rng, p.num_components(), batch);
  Vector out;
  kernels::mean_grad(p, ids, x, out);
  sfo.add_large_batch(batch);
  return out;
}

void recursive_step(const Problem& p, RecursiveState& state, const Vector& x_new,
                    std::span<const SampleId> batch, SfoCounter& sfo) {
  if (batch.empty()) throw Error(ErrorKind::invalid_config, "recursive step needs a nonempty minibatch");
  Vector delta;
  kernels::mean_grad_diff(p, batch, x_new, state.prev_x, delta);
  state.v += delta;
  state.prev_x = x_new;
  sfo.add_paired(batch.size());
}

Vector svrg_step(const Problem& p, const std::optional<SvrgSnapshot>& snapshot, const Vector& x,
                 std::span<const SampleId> batch, SfoCounter& sfo) {
  if (!snapshot) throw Error(ErrorKind::invalid_state, "SVRG step without a snapshot");
  if (batch.empty()) throw Error(ErrorKind::invalid_config, "SVRG step needs a nonempty minibatch");
  Vector delta;
  kernels::mean_grad_diff(p, batch, x, snapshot->anchor, delta);
  sfo.add_paired(batch.size());
  return delta + snapshot->anchor_grad;
}

}  // namespace ssrgd

#include "ssrgd/problem.hpp"

#include "ssrgd/kernels.hpp"

namespace ssrgd {

Vector Problem::exact_grad(const Vector& x) const {
  if (mode() != OracleMode::finite_sum) {
    throw Error(ErrorKind::unsupported_oracle, "online problem does not provide an exact gradient");
  }
  Vector out;
  kernels::mean_grad_all(*this, num_components(), x, out);
  return out;
}

Vector Problem::hvp(const Vector&, const Vector&) const {
  throw Error(ErrorKind::unsupported_oracle, "problem has no Hessian-vector product oracle");
}

bool Problem::in_box(const Vector& x) const {
  const double r = box_radius();
  return !(x.cwiseAbs().maxCoeff() > r);
}

}  // namespace ssrgd

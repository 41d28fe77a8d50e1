#include "ssrgd/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace ssrgd {

const char* to_string(CertMethod m) { return m == CertMethod::dense ? "dense" : "shifted_power"; }

namespace {

void require_hvp(const Problem& p) {
  if (!p.has_hvp()) throw Error(ErrorKind::unsupported_oracle, "certification needs a Hessian-vector product oracle");
}

void require_dense(const Problem& p, std::size_t cap) {
  if (p.dim() > cap) {
    std::ostringstream os;
    os << "dimension " << p.dim() << " exceeds dense cap " << cap << "; use lambda_min_power";
    throw Error(ErrorKind::invalid_input, os.str());
  }
}

}  // namespace

Matrix assemble_hessian(const Problem& p, const Vector& x) {
  require_hvp(p);
  const auto d = static_cast<Eigen::Index>(p.dim());
  Matrix h(d, d);
  Vector e = Vector::Zero(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    e[j] = 1.0;
    h.col(j) = p.hvp(x, e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

std::pair<double, Vector> min_eigenpair_dense(const Problem& p, const Vector& x,
                                              std::size_t dense_cap) {
  require_dense(p, dense_cap);
  Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_hessian(p, x));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::nonfinite, "eigensolver failed");
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

double lambda_min_dense(const Problem& p, const Vector& x, std::size_t dense_cap) {
  require_dense(p, dense_cap);
  Eigen::SelfAdjointEigenSolver<Matrix> es(assemble_hessian(p, x), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::nonfinite, "eigensolver failed");
  return es.eigenvalues()[0];
}

PowerEstimate lambda_min_power(const Problem& p, const Vector& x, double L, std::uint64_t iters,
                               RngStream& rng, double fail_prob) {
  require_hvp(p);
  if (!(L > 0.0)) throw Error(ErrorKind::invalid_input, "power method needs a positive spectral bound L");
  if (iters == 0) throw Error(ErrorKind::invalid_input, "power method needs iters >= 1");
  const auto d = static_cast<Eigen::Index>(p.dim());
  auto shifted = [&](const Vector& q) -> Vector { return L * q - p.hvp(x, q); };

  Vector q(d);
  do {
    for (Eigen::Index j = 0; j < d; ++j) q[j] = rng.normal();
  } while (q.norm() == 0.0);
  q.normalize();
  for (std::uint64_t k = 0; k < iters; ++k) {
    Vector w = shifted(q);
    const double nw = w.norm();
    if (nw == 0.0) break;  // q lies in the null space of the shift: lambda_min = L
    q = w / nw;
  }
  const double mu = std::max(0.0, q.dot(shifted(q)));
  const double e = std::log(0.824 * std::sqrt(static_cast<double>(d)) / fail_prob) /
                   (static_cast<double>(iters) - 0.5);
  PowerEstimate out;
  out.estimate = L - mu;
  out.slack = e < 1.0 ? mu * e / (1.0 - e) : 2.0 * L;
  return out;
}

Certificate certify(const Problem& p, const Vector& x, double eps, double delta,
                    const CertifyOptions& opts) {
  Certificate c;
  c.grad_norm = p.exact_grad(x).norm();
  c.is_fosp = c.grad_norm <= eps;
  if (p.dim() <= opts.dense_cap) {
    c.method = CertMethod::dense;
    c.lambda_min_est = lambda_min_dense(p, x, opts.dense_cap);
    c.lambda_min_ci = 0.0;
  } else {
    RngStream rng(opts.seed, 0xce47);
    const PowerEstimate pe =
        lambda_min_power(p, x, p.smoothness().lipschitz_grad, opts.power_iters, rng);
    c.method = CertMethod::shifted_power;
    c.lambda_min_est = pe.estimate;
    c.lambda_min_ci = pe.slack;
  }
  c.is_sosp = c.is_fosp && c.lambda_min_est - c.lambda_min_ci >= -delta;
  return c;
}

}  // namespace ssrgd

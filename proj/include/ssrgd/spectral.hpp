// Second-order stationarity certification from Hessian-vector products.
//
// Certification is an evaluation tool only; the optimizers never call it
// except through the optional RunHooks::sosp_check observer.
#pragma once

#include "ssrgd/problem.hpp"
#include "ssrgd/rng.hpp"

namespace ssrgd {

enum class CertMethod { dense, shifted_power };

const char* to_string(CertMethod m);

struct Certificate {
  double grad_norm = 0.0;
  double lambda_min_est = 0.0;
  double lambda_min_ci = 0.0;  // estimation slack; 0 for the dense method
  bool is_fosp = false;
  bool is_sosp = false;
  CertMethod method = CertMethod::dense;
};

struct PowerEstimate {
  double estimate = 0.0;  // upper bound on lambda_min up to rounding
  double slack = 0.0;
};

inline constexpr std::size_t kDenseCap = 200;

/// Hessian assembled column-wise from d HVPs and symmetrized.
Matrix assemble_hessian(const Problem& p, const Vector& x);

/// Smallest eigenvalue of the assembled Hessian. Refuses d > dense_cap.
double lambda_min_dense(const Problem& p, const Vector& x, std::size_t dense_cap = kDenseCap);

/// Smallest eigenvalue with a unit eigenvector.
std::pair<double, Vector> min_eigenpair_dense(const Problem& p, const Vector& x,
                                              std::size_t dense_cap = kDenseCap);

/// Power iteration on L I - H from a random start. The slack is the
/// random-start tail bound: with probability >= 1 - fail_prob the top
/// eigenvalue of the shift is at most mu / (1 - e), e = ln(0.824 sqrt(d)/fail_prob)/(iters - 1/2).
PowerEstimate lambda_min_power(const Problem& p, const Vector& x, double L, std::uint64_t iters,
                               RngStream& rng, double fail_prob = 0.01);

struct CertifyOptions {
  std::size_t dense_cap = kDenseCap;
  std::uint64_t power_iters = 1000;
  std::uint64_t seed = 0;
};

/// (eps, delta)-second-order check at x using the exact gradient norm and
/// the dense or power smallest-eigenvalue estimate (chosen by dimension).
/// The power path certifies only when estimate - slack >= -delta.
Certificate certify(const Problem& p, const Vector& x, double eps, double delta,
                    const CertifyOptions& opts = {});

}  // namespace ssrgd

// Test problems with declared smoothness metadata.
#pragma once

#include "ssrgd/problem.hpp"

#include <istream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ssrgd {

struct SaddlePoint {
  Vector x;
  double lambda_min = 0.0;
};

struct ProblemInstance {
  std::string name;
  std::shared_ptr<const Problem> problem;
  std::optional<double> known_fstar;
  std::vector<SaddlePoint> saddles;
  std::vector<std::pair<std::string, double>> generator_params;
  /// Suggested starting point.
  Vector x0;

  const Problem& operator*() const { return *problem; }
  const Problem* operator->() const { return problem.get(); }
};

struct SeparableSaddleOptions {
  std::size_t d = 2;
  std::uint64_t n = 1;
  double delta_plant = 0.5;
  double noise = 0.0;            // scale of the zero-mean linear terms
  double curvature_noise = 0.0;  // scale of zero-mean diagonal quadratic terms
  double gamma4 = 1.0;
  double box = 1.0;              // half-width R of the declared domain box
  std::uint64_t seed = 0;
};

/// f(x) = 1/2 x^T D x + (gamma4/4) sum_j x_j^4 with D = diag(1, ..., 1, -delta_plant),
/// split into n components by zero-mean linear (and optionally diagonal
/// quadratic) terms drawn in antithetic adjacent pairs, so the index-order
/// component sum cancels them exactly. The origin is a strict saddle for delta_plant > 0;
/// delta_plant == 0 gives a degenerate control instance with no saddle.
ProblemInstance make_separable_saddle(const SeparableSaddleOptions& opt);

/// f_i(x) = log(1 + exp(-y_i a_i^T x)) + alpha sum_j x_j^2 / (1 + x_j^2)
/// on synthetic Gaussian features with 10% label flips.
ProblemInstance make_nonconvex_logistic(std::uint64_t n, std::size_t d, double alpha,
                                        std::uint64_t seed);

/// Logistic instance over a given design matrix (rows are samples) and +-1 labels.
ProblemInstance make_logistic_from_data(Matrix features, Vector labels, double alpha,
                                        std::string name);

struct LogRampOptions {
  std::size_t d = 2;
  std::uint64_t n = 1;
  double scale = 1.0;     // c
  double anchor = 1e-6;   // lambda, sets the far minimum at u^2 = c/lambda - 1
  double noise = 0.0;
  double curvature_noise = 0.0;
  double start = 1.0;     // u coordinate of the suggested x0
  std::uint64_t seed = 0;
};

/// f(x) = -(c/2) log(1 + u^2) + (lambda/2) u^2 + 1/2 sum_{j>=2} x_j^2 with u = x_1.
/// Along u the gradient decays like c/u, so gradient descent started at
/// u > 1 needs on the order of 1/eps^2 steps to reach gradient norm eps.
ProblemInstance make_log_ramp(const LogRampOptions& opt);

/// f_i(x) = 1/2 x^T A_i x + b_i^T x with random symmetric A_i whose entries
/// have scale `scale`; declared L is the exact max_i ||A_i||_2.
ProblemInstance make_random_quadratic(std::uint64_t n, std::size_t d, double scale,
                                      std::uint64_t seed);

/// Single-component quadratic 1/2 x^T H x + g^T x with a given symmetric H.
ProblemInstance make_quadratic(Matrix hessian, Vector linear, std::string name = "quadratic");

/// Online stream over `base`: grad F(x, zeta) = grad f(x) + noise(zeta),
/// noise isotropic Gaussian truncated to norm <= sigma.
ProblemInstance make_online_stream(const ProblemInstance& base, double sigma, std::uint64_t seed);

struct LibsvmData {
  Matrix features;  // n x d
  Vector labels;    // +-1
};

/// Parses `label idx:val ...` lines (1-based feature indices). Blank lines and
/// lines starting with '#' are skipped.
LibsvmData parse_libsvm(std::istream& in, std::size_t d_cap);

/// Loads a LIBSVM file and wraps it as a nonconvex logistic instance.
ProblemInstance load_libsvm(const std::string& path, std::size_t d_cap, double alpha = 0.1);

}  // namespace ssrgd

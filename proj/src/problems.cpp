#include "ssrgd/problems.hpp"

#include "ssrgd/kernels.hpp"
#include "ssrgd/rng.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ssrgd {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Noise columns come in adjacent antithetic pairs (c, -c), with a zero last
// column when n is odd. Summing components in index order then cancels the
// noise exactly, so a planted stationary point stays exactly stationary under
// the component-averaged full gradient.
template <class Draw>
Matrix antithetic_columns(std::size_t d, std::uint64_t n, double scale, Draw draw) {
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  if (scale == 0.0 || n < 2) return c;
  for (Eigen::Index i = 0; i + 1 < c.cols(); i += 2) {
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      c(j, i) = scale * draw();
      c(j, i + 1) = -c(j, i);
    }
  }
  return c;
}

Matrix zero_mean_columns(RngStream& rng, std::size_t d, std::uint64_t n, double scale) {
  return antithetic_columns(d, n, scale, [&] { return rng.normal(); });
}

Matrix zero_mean_uniform(RngStream& rng, std::size_t d, std::uint64_t n, double scale) {
  return antithetic_columns(d, n, scale, [&] { return 2.0 * rng.uniform() - 1.0; });
}

class SeparableSaddle final : public Problem {
 public:
  SeparableSaddle(const SeparableSaddleOptions& o, Matrix linear, Matrix curvature)
      : d_(o.d), n_(o.n), gamma_(o.gamma4), box_(o.box),
        diag_(Vector::Ones(static_cast<Eigen::Index>(o.d))),
        linear_(std::move(linear)), curvature_(std::move(curvature)) {
    diag_[diag_.size() - 1] = -o.delta_plant;
    const double quartic = 3.0 * gamma_ * box_ * box_;
    double L = 0.0;
    for (Eigen::Index i = 0; i < curvature_.cols(); ++i) {
      for (Eigen::Index j = 0; j < curvature_.rows(); ++j) {
        const double base = diag_[j] + curvature_(j, i);
        L = std::max({L, std::abs(base), std::abs(base + quartic)});
      }
    }
    smooth_.lipschitz_grad = L;
    smooth_.lipschitz_hess = 6.0 * gamma_ * box_ * std::sqrt(static_cast<double>(d_));
  }

  OracleMode mode() const override { return OracleMode::finite_sum; }
  std::size_t dim() const override { return d_; }
  std::uint64_t num_components() const override { return n_; }
  Smoothness smoothness() const override { return smooth_; }
  double box_radius() const override { return box_; }

  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    const auto col = static_cast<Eigen::Index>(i);
    out = (diag_ + curvature_.col(col)).cwiseProduct(x) + gamma_ * x.array().cube().matrix() +
          linear_.col(col);
  }
  double value(const Vector& x) const override {
    return 0.5 * diag_.dot(x.cwiseAbs2()) + 0.25 * gamma_ * x.array().pow(4).sum();
  }
  Vector exact_grad(const Vector& x) const override {
    return diag_.cwiseProduct(x) + gamma_ * x.array().cube().matrix();
  }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& x, const Vector& v) const override {
    return (diag_ + 3.0 * gamma_ * x.cwiseAbs2()).cwiseProduct(v);
  }

 private:
  std::size_t d_;
  std::uint64_t n_;
  double gamma_;
  double box_;
  Vector diag_;
  Matrix linear_;
  Matrix curvature_;
  Smoothness smooth_;
};

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// max |d^3/dx^3 x^2/(1+x^2)|
constexpr double kRegThird = 4.6686;
// max |d^3/dz^3 log(1+e^{-z})| = 1/(6 sqrt 3)
constexpr double kLogisticThird = 0.09622504486493763;

class NonconvexLogistic final : public Problem {
 public:
  NonconvexLogistic(RowMatrix a, Vector y, double alpha)
      : a_(std::move(a)), y_(std::move(y)), alpha_(alpha) {
    const double max_norm2 = a_.rowwise().squaredNorm().maxCoeff();
    smooth_.lipschitz_grad = max_norm2 / 4.0 + 2.0 * alpha_;
    smooth_.lipschitz_hess = kLogisticThird * std::pow(max_norm2, 1.5) + kRegThird * alpha_;
    // L must stay positive for degenerate all-zero data.
    if (smooth_.lipschitz_grad <= 0.0) smooth_.lipschitz_grad = 1e-12;
  }

  OracleMode mode() const override { return OracleMode::finite_sum; }
  std::size_t dim() const override { return static_cast<std::size_t>(a_.cols()); }
  std::uint64_t num_components() const override { return static_cast<std::uint64_t>(a_.rows()); }
  Smoothness smoothness() const override { return smooth_; }

  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    const auto row = static_cast<Eigen::Index>(i);
    const double z = y_[row] * a_.row(row).dot(x);
    out = (-y_[row] * sigmoid(-z)) * a_.row(row).transpose();
    out += reg_grad(x);
  }
  double value(const Vector& x) const override {
    const Vector z = (a_ * x).cwiseProduct(y_);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(-z[i]);
    const auto x2 = x.array().square();
    return loss / static_cast<double>(z.size()) + alpha_ * (x2 / (1.0 + x2)).sum();
  }
  Vector exact_grad(const Vector& x) const override {
    const Vector z = (a_ * x).cwiseProduct(y_);
    Vector w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) w[i] = -y_[i] * sigmoid(-z[i]);
    return a_.transpose() * w / static_cast<double>(z.size()) + reg_grad(x);
  }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& x, const Vector& v) const override {
    const Vector z = a_ * x;
    const Vector av = a_ * v;
    Vector w(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double s = sigmoid(z[i]);
      w[i] = s * (1.0 - s) * av[i];
    }
    const auto x2 = x.array().square();
    const Vector reg = (alpha_ * (2.0 - 6.0 * x2) / (1.0 + x2).cube()).matrix();
    return a_.transpose() * w / static_cast<double>(z.size()) + reg.cwiseProduct(v);
  }

 private:
  Vector reg_grad(const Vector& x) const {
    const auto x2 = x.array().square();
    return (alpha_ * 2.0 * x.array() / (1.0 + x2).square()).matrix();
  }

  RowMatrix a_;
  Vector y_;
  double alpha_;
  Smoothness smooth_;
};

class LogRamp final : public Problem {
 public:
  LogRamp(const LogRampOptions& o, Matrix linear, Vector curvature)
      : d_(o.d), n_(o.n), c_(o.scale), lambda_(o.anchor), linear_(std::move(linear)),
        curvature_(std::move(curvature)) {
    const double s_max = curvature_.size() ? curvature_.cwiseAbs().maxCoeff() : 0.0;
    smooth_.lipschitz_grad = std::max(1.0, c_ + std::abs(lambda_)) + s_max;
    smooth_.lipschitz_hess = 1.5 * c_;
  }

  OracleMode mode() const override { return OracleMode::finite_sum; }
  std::size_t dim() const override { return d_; }
  std::uint64_t num_components() const override { return n_; }
  Smoothness smoothness() const override { return smooth_; }

  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    const auto col = static_cast<Eigen::Index>(i);
    out = x + linear_.col(col);
    out[0] = ramp_grad(x[0]) + curvature_[col] * x[0] + linear_(0, col);
  }
  double value(const Vector& x) const override {
    const double u = x[0];
    return -0.5 * c_ * std::log1p(u * u) + 0.5 * lambda_ * u * u +
           0.5 * x.tail(x.size() - 1).squaredNorm();
  }
  Vector exact_grad(const Vector& x) const override {
    Vector g = x;
    g[0] = ramp_grad(x[0]);
    return g;
  }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector& x, const Vector& v) const override {
    Vector out = v;
    const double u2 = x[0] * x[0];
    out[0] = (-c_ * (1.0 - u2) / ((1.0 + u2) * (1.0 + u2)) + lambda_) * v[0];
    return out;
  }

 private:
  double ramp_grad(double u) const { return -c_ * u / (1.0 + u * u) + lambda_ * u; }

  std::size_t d_;
  std::uint64_t n_;
  double c_;
  double lambda_;
  Matrix linear_;
  Vector curvature_;
  Smoothness smooth_;
};

class QuadraticSum final : public Problem {
 public:
  QuadraticSum(std::vector<Matrix> a, std::vector<Vector> b) : a_(std::move(a)), b_(std::move(b)) {
    const auto d = a_.front().rows();
    hessian_ = Matrix::Zero(d, d);
    linear_ = Vector::Zero(d);
    double L = 0.0;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      hessian_ += a_[i];
      linear_ += b_[i];
      Eigen::SelfAdjointEigenSolver<Matrix> es(a_[i], Eigen::EigenvaluesOnly);
      L = std::max(L, es.eigenvalues().cwiseAbs().maxCoeff());
    }
    hessian_ /= static_cast<double>(a_.size());
    linear_ /= static_cast<double>(a_.size());
    smooth_.lipschitz_grad = L > 0.0 ? L : 1e-12;
    smooth_.lipschitz_hess = 0.0;
  }

  OracleMode mode() const override { return OracleMode::finite_sum; }
  std::size_t dim() const override { return static_cast<std::size_t>(hessian_.rows()); }
  std::uint64_t num_components() const override { return a_.size(); }
  Smoothness smoothness() const override { return smooth_; }

  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    out.noalias() = a_[i] * x;
    out += b_[i];
  }
  double value(const Vector& x) const override { return 0.5 * x.dot(hessian_ * x) + linear_.dot(x); }
  Vector exact_grad(const Vector& x) const override { return hessian_ * x + linear_; }
  bool has_hvp() const override { return true; }
  Vector hvp(const Vector&, const Vector& v) const override { return hessian_ * v; }

  const Matrix& hessian() const { return hessian_; }
  const Vector& linear() const { return linear_; }

 private:
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  Matrix hessian_;
  Vector linear_;
  Smoothness smooth_;
};

class OnlineStream final : public Problem {
 public:
  OnlineStream(std::shared_ptr<const Problem> base, double sigma, std::uint64_t seed)
      : base_(std::move(base)), sigma_(sigma), key_(mix64(seed ^ 0x0a11ce5eedULL)) {
    smooth_ = base_->smoothness();
    smooth_.variance_bound = sigma_;
  }

  OracleMode mode() const override { return OracleMode::online; }
  std::size_t dim() const override { return base_->dim(); }
  std::uint64_t num_components() const override { return kInfiniteComponents; }
  Smoothness smoothness() const override { return smooth_; }
  double box_radius() const override { return base_->box_radius(); }

  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    out = base_->exact_grad(x) + noise(i);
  }
  double value(const Vector& x) const override { return base_->value(x); }
  Vector exact_grad(const Vector& x) const override { return base_->exact_grad(x); }
  bool has_hvp() const override { return base_->has_hvp(); }
  Vector hvp(const Vector& x, const Vector& v) const override { return base_->hvp(x, v); }

  /// Deterministic noise of sample i: N(0, sigma^2/d I) truncated to norm sigma.
  Vector noise(SampleId i) const {
    const auto d = static_cast<Eigen::Index>(dim());
    Vector z(d);
    if (sigma_ == 0.0) return z.setZero();
    const std::uint64_t key = mix64(key_ ^ mix64(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto c = static_cast<std::uint64_t>(j);
      const double u1 = 1.0 - static_cast<double>(mix64(key + 2 * c) >> 11) * 0x1.0p-53;
      const double u2 = static_cast<double>(mix64(key + 2 * c + 1) >> 11) * 0x1.0p-53;
      z[j] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    z *= sigma_ / std::sqrt(static_cast<double>(d));
    const double nz = z.norm();
    if (nz > sigma_) z *= sigma_ / nz;
    return z;
  }

 private:
  std::shared_ptr<const Problem> base_;
  double sigma_;
  std::uint64_t key_;
  Smoothness smooth_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::invalid_config, msg);
}

}  // namespace

ProblemInstance make_separable_saddle(const SeparableSaddleOptions& opt) {
  require(opt.d >= 2, "separable saddle needs d >= 2");
  require(opt.n >= 1, "separable saddle needs n >= 1");
  require(opt.delta_plant >= 0.0, "delta_plant must be >= 0");
  require(opt.gamma4 > 0.0, "gamma4 must be > 0");
  require(opt.box > 0.0, "box half-width must be > 0");
  require(opt.noise >= 0.0 && opt.curvature_noise >= 0.0, "noise scales must be >= 0");
  RngStream rng(opt.seed, 0x5add1e);
  Matrix linear = zero_mean_columns(rng, opt.d, opt.n, opt.noise);
  Matrix curvature = zero_mean_uniform(rng, opt.d, opt.n, opt.curvature_noise);

  ProblemInstance inst;
  inst.name = "separable_saddle";
  inst.problem = std::make_shared<SeparableSaddle>(opt, std::move(linear), std::move(curvature));
  inst.known_fstar = -opt.delta_plant * opt.delta_plant / (4.0 * opt.gamma4);
  if (opt.delta_plant > 0.0) {
    inst.saddles.push_back(SaddlePoint{Vector::Zero(static_cast<Eigen::Index>(opt.d)), -opt.delta_plant});
  }
  inst.x0 = Vector::Zero(static_cast<Eigen::Index>(opt.d));
  inst.generator_params = {{"d", static_cast<double>(opt.d)},
                           {"n", static_cast<double>(opt.n)},
                           {"delta_plant", opt.delta_plant},
                           {"noise", opt.noise},
                           {"curvature_noise", opt.curvature_noise},
                           {"gamma4", opt.gamma4},
                           {"box", opt.box},
                           {"seed", static_cast<double>(opt.seed)}};
  return inst;
}

ProblemInstance make_logistic_from_data(Matrix features, Vector labels, double alpha,
                                        std::string name) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw Error(ErrorKind::invalid_dataset, "logistic problem needs at least one sample and feature");
  }
  if (labels.size() != features.rows()) throw Error(ErrorKind::invalid_dataset, "label count mismatch");
  require(alpha >= 0.0, "alpha must be >= 0");
  ProblemInstance inst;
  inst.name = std::move(name);
  inst.x0 = Vector::Zero(features.cols());
  inst.generator_params = {{"n", static_cast<double>(features.rows())},
                           {"d", static_cast<double>(features.cols())},
                           {"alpha", alpha}};
  inst.problem = std::make_shared<NonconvexLogistic>(RowMatrix(std::move(features)),
                                                     std::move(labels), alpha);
  return inst;
}

ProblemInstance make_nonconvex_logistic(std::uint64_t n, std::size_t d, double alpha,
                                        std::uint64_t seed) {
  require(n >= 1 && d >= 1, "logistic problem needs n, d >= 1");
  RngStream rng(seed, 0x10915);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  Vector teacher(cols);
  for (Eigen::Index j = 0; j < cols; ++j) teacher[j] = rng.normal();
  teacher *= 2.0 / teacher.norm();
  Matrix a(rows, cols);
  Vector y(rows);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = scale * rng.normal();
    double label = a.row(i).dot(teacher) >= 0.0 ? 1.0 : -1.0;
    if (rng.uniform() < 0.1) label = -label;
    y[i] = label;
  }
  ProblemInstance inst = make_logistic_from_data(std::move(a), std::move(y), alpha, "nonconvex_logistic");
  inst.generator_params.emplace_back("seed", static_cast<double>(seed));
  return inst;
}

ProblemInstance make_log_ramp(const LogRampOptions& opt) {
  require(opt.d >= 1, "log ramp needs d >= 1");
  require(opt.n >= 1, "log ramp needs n >= 1");
  require(opt.scale > 0.0, "ramp scale must be > 0");
  require(opt.anchor > 0.0 && opt.anchor < opt.scale, "ramp anchor must lie in (0, scale)");
  require(opt.noise >= 0.0 && opt.curvature_noise >= 0.0, "noise scales must be >= 0");
  RngStream rng(opt.seed, 0x7a3f);
  Matrix linear = zero_mean_columns(rng, opt.d, opt.n, opt.noise);
  Vector curvature = zero_mean_uniform(rng, 1, opt.n, opt.curvature_noise).row(0).transpose();

  ProblemInstance inst;
  inst.name = "log_ramp";
  inst.problem = std::make_shared<LogRamp>(opt, std::move(linear), std::move(curvature));
  const double c = opt.scale, lam = opt.anchor;
  inst.known_fstar = -0.5 * c * std::log(c / lam) + 0.5 * (c - lam);
  inst.saddles.push_back(SaddlePoint{Vector::Zero(static_cast<Eigen::Index>(opt.d)), -c + lam});
  inst.x0 = Vector::Zero(static_cast<Eigen::Index>(opt.d));
  inst.x0[0] = opt.start;
  inst.generator_params = {{"d", static_cast<double>(opt.d)},
                           {"n", static_cast<double>(opt.n)},
                           {"scale", c},
                           {"anchor", lam},
                           {"noise", opt.noise},
                           {"curvature_noise", opt.curvature_noise},
                           {"start", opt.start},
                           {"seed", static_cast<double>(opt.seed)}};
  return inst;
}

ProblemInstance make_random_quadratic(std::uint64_t n, std::size_t d, double scale,
                                      std::uint64_t seed) {
  require(n >= 1 && d >= 1, "random quadratic needs n, d >= 1");
  RngStream rng(seed, 0x9ad);
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<Matrix> a;
  std::vector<Vector> b;
  for (std::uint64_t i = 0; i < n; ++i) {
    Matrix g(dd, dd);
    for (Eigen::Index r = 0; r < dd; ++r)
      for (Eigen::Index c = 0; c < dd; ++c) g(r, c) = scale * rng.normal();
    a.push_back(0.5 * (g + g.transpose()));
    Vector lin(dd);
    for (Eigen::Index r = 0; r < dd; ++r) lin[r] = scale * rng.normal();
    b.push_back(std::move(lin));
  }
  ProblemInstance inst;
  inst.name = "random_quadratic";
  inst.problem = std::make_shared<QuadraticSum>(std::move(a), std::move(b));
  inst.x0 = Vector::Zero(dd);
  inst.generator_params = {{"n", static_cast<double>(n)},
                           {"d", static_cast<double>(d)},
                           {"scale", scale},
                           {"seed", static_cast<double>(seed)}};
  return inst;
}

ProblemInstance make_quadratic(Matrix hessian, Vector linear, std::string name) {
  if (hessian.rows() != hessian.cols() || hessian.rows() != linear.size() || linear.size() == 0) {
    throw Error(ErrorKind::invalid_input, "quadratic needs a square Hessian matching the linear term");
  }
  ProblemInstance inst;
  inst.name = std::move(name);
  inst.x0 = Vector::Zero(linear.size());
  const Matrix sym = 0.5 * (hessian + hessian.transpose());
  inst.problem = std::make_shared<QuadraticSum>(std::vector<Matrix>{sym}, std::vector<Vector>{linear});
  return inst;
}

ProblemInstance make_online_stream(const ProblemInstance& base, double sigma, std::uint64_t seed) {
  require(sigma >= 0.0, "sigma must be >= 0");
  if (base.problem->mode() != OracleMode::finite_sum) {
    throw Error(ErrorKind::invalid_config, "online stream needs a finite-sum base problem");
  }
  ProblemInstance inst = base;
  inst.name = base.name + "_online";
  inst.problem = std::make_shared<OnlineStream>(base.problem, sigma, seed);
  inst.generator_params.emplace_back("sigma", sigma);
  inst.generator_params.emplace_back("stream_seed", static_cast<double>(seed));
  return inst;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw Error(ErrorKind::parse_error, os.str());
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in, std::size_t d_cap) {
  struct Entry {
    std::size_t row, col;
    double val;
  };
  std::vector<Entry> entries;
  std::vector<double> labels;
  std::size_t d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok) || tok.front() == '#') continue;
    double label = 0.0;
    if (!parse_double(tok, label)) parse_fail(lineno, "bad label '" + tok + "'");
    const std::size_t row = labels.size();
    labels.push_back(label > 0.0 ? 1.0 : -1.0);
    std::size_t last = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(lineno, "expected idx:val, got '" + tok + "'");
      std::size_t idx = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc() || p != tok.data() + colon || idx == 0) {
        parse_fail(lineno, "bad feature index in '" + tok + "'");
      }
      if (idx <= last) parse_fail(lineno, "feature indices must be strictly increasing");
      last = idx;
      double val = 0.0;
      if (!parse_double(std::string_view(tok).substr(colon + 1), val)) {
        parse_fail(lineno, "bad feature value in '" + tok + "'");
      }
      if (idx > d_cap) {
        std::ostringstream os;
        os << "line " << lineno << ": feature index " << idx << " exceeds d_cap = " << d_cap;
        throw Error(ErrorKind::invalid_dataset, os.str());
      }
      d = std::max(d, idx);
      entries.push_back(Entry{row, idx - 1, val});
    }
  }
  if (labels.empty()) throw Error(ErrorKind::invalid_dataset, "dataset has no samples");
  if (d == 0) throw Error(ErrorKind::invalid_dataset, "dataset has no features");
  LibsvmData out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(d));
  for (const auto& e : entries) {
    out.features(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.val;
  }
  out.labels = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  return out;
}

ProblemInstance load_libsvm(const std::string& path, std::size_t d_cap, double alpha) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open dataset '" + path + "'");
  LibsvmData data = parse_libsvm(in, d_cap);
  ProblemInstance inst =
      make_logistic_from_data(std::move(data.features), std::move(data.labels), alpha, "libsvm");
  inst.generator_params.emplace_back("d_cap", static_cast<double>(d_cap));
  return inst;
}

}  // namespace ssrgd

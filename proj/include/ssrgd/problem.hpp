// Oracle contract shared by optimizers, estimators and certifiers.
#pragma once

#include "ssrgd/types.hpp"

#include <atomic>
#include <memory>

namespace ssrgd {

/// Smoothness metadata declared by a problem (never estimated from data).
struct Smoothness {
  double lipschitz_grad = 1.0;  // L
  double lipschitz_hess = 0.0;  // rho
  double variance_bound = 0.0;  // sigma, online mode only
};

/// A finite-sum f(x) = (1/n) sum_i f_i(x), or an online expectation over an
/// i.i.d. sample stream.
///
/// All oracle methods are const and must be safe to call concurrently.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual OracleMode mode() const = 0;
  virtual std::size_t dim() const = 0;
  /// n for finite-sum problems, kInfiniteComponents for online streams.
  virtual std::uint64_t num_components() const = 0;
  virtual Smoothness smoothness() const = 0;

  /// out = grad f_i(x).
  virtual void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const = 0;

  /// f(x). For online problems this is the population objective, available
  /// only for out-of-band measurement.
  virtual double value(const Vector& x) const = 0;

  /// Exact grad f(x), not charged to any SFO counter. Finite-sum problems
  /// default to averaging component gradients; online problems return the
  /// population gradient for out-of-band measurement.
  virtual Vector exact_grad(const Vector& x) const;

  virtual bool has_hvp() const { return false; }
  /// Hessian-vector product grad^2 f(x) v.
  virtual Vector hvp(const Vector& x, const Vector& v) const;

  /// Half-width of the axis-aligned box on which L and rho are valid.
  virtual double box_radius() const { return std::numeric_limits<double>::infinity(); }

  bool in_box(const Vector& x) const;
};

/// Decorator that counts every component-gradient evaluation passed through it.
class CountingProblem final : public Problem {
 public:
  explicit CountingProblem(const Problem& inner) : inner_(inner) {}

  OracleMode mode() const override { return inner_.mode(); }
  std::size_t dim() const override { return inner_.dim(); }
  std::uint64_t num_components() const override { return inner_.num_components(); }
  Smoothness smoothness() const override { return inner_.smoothness(); }
  void component_grad(SampleId i, const Vector& x, Eigen::Ref<Vector> out) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    inner_.component_grad(i, x, out);
  }
  double value(const Vector& x) const override { return inner_.value(x); }
  Vector exact_grad(const Vector& x) const override { return inner_.exact_grad(x); }
  bool has_hvp() const override { return inner_.has_hvp(); }
  Vector hvp(const Vector& x, const Vector& v) const override { return inner_.hvp(x, v); }
  double box_radius() const override { return inner_.box_radius(); }

  std::uint64_t calls() const { return calls_.load(); }

 private:
  const Problem& inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace ssrgd

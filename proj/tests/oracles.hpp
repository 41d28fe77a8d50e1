// Reference computations used by the tests. They are written from the
// definitions with plain loops and share no code with the library beyond the
// Problem oracle interface.
#pragma once

#include "ssrgd/problem.hpp"

#include <cmath>
#include <vector>

namespace oracle {

using ssrgd::Matrix;
using ssrgd::Problem;
using ssrgd::Vector;

inline Vector component(const Problem& p, std::uint64_t i, const Vector& x) {
  Vector g(static_cast<Eigen::Index>(p.dim()));
  p.component_grad(i, x, g);
  return g;
}

inline Vector average_grad(const Problem& p, const Vector& x) {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
  for (std::uint64_t i = 0; i < p.num_components(); ++i) s += component(p, i, x);
  return s / static_cast<double>(p.num_components());
}

// All b-tuples over [0, n), each with probability n^-b.
inline std::vector<std::vector<std::uint64_t>> tuples(std::uint64_t n, std::uint64_t b) {
  std::vector<std::vector<std::uint64_t>> out{{}};
  for (std::uint64_t k = 0; k < b; ++k) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& t : out) {
      for (std::uint64_t i = 0; i < n; ++i) {
        auto u = t;
        u.push_back(i);
        next.push_back(u);
      }
    }
    out = next;
  }
  return out;
}

struct Moments {
  std::vector<double> variance;  // E ||v_t - grad f(x_t)||^2
  std::vector<double> bias;      // ||E v_t - grad f(x_t)||
};

/// Exact moments of v_t = v_{t-1} + mean_{i in I}(grad f_i(x_t) - grad f_i(x_{t-1})), v_0 = grad f(x_0).
inline Moments recursive_moments(const Problem& p, const std::vector<Vector>& traj, std::uint64_t b) {
  const auto all = tuples(p.num_components(), b);
  const double w = 1.0 / static_cast<double>(all.size());
  struct State {
    Vector v;
    double prob;
  };
  std::vector<State> states{{average_grad(p, traj[0]), 1.0}};
  Moments m;
  m.variance.push_back(0.0);
  m.bias.push_back(0.0);
  for (std::size_t t = 1; t < traj.size(); ++t) {
    std::vector<State> next;
    for (const auto& s : states) {
      for (const auto& tup : all) {
        Vector delta = Vector::Zero(s.v.size());
        for (auto i : tup) delta += component(p, i, traj[t]) - component(p, i, traj[t - 1]);
        next.push_back({s.v + delta / static_cast<double>(b), s.prob * w});
      }
    }
    states = std::move(next);
    const Vector g = average_grad(p, traj[t]);
    double var = 0.0;
    Vector mean = Vector::Zero(g.size());
    for (const auto& s : states) {
      var += s.prob * (s.v - g).squaredNorm();
      mean += s.prob * s.v;
    }
    m.variance.push_back(var);
    m.bias.push_back((mean - g).norm());
  }
  return m;
}

struct SnapshotMoments {
  double variance = 0.0;
  double bias = 0.0;
};

/// Exact moments of v = mean_{i in I}(grad f_i(x) - grad f_i(anchor)) + grad f(anchor).
inline SnapshotMoments snapshot_moments(const Problem& p, const Vector& anchor, const Vector& x,
                                        std::uint64_t b) {
  const auto all = tuples(p.num_components(), b);
  const double w = 1.0 / static_cast<double>(all.size());
  const Vector ga = average_grad(p, anchor), g = average_grad(p, x);
  SnapshotMoments m;
  Vector mean = Vector::Zero(g.size());
  for (const auto& tup : all) {
    Vector v = Vector::Zero(g.size());
    for (auto i : tup) v += component(p, i, x) - component(p, i, anchor);
    v = v / static_cast<double>(b) + ga;
    m.variance += w * (v - g).squaredNorm();
    mean += w * v;
  }
  m.bias = (mean - g).norm();
  return m;
}

/// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double jacobi_min_eigenvalue(Matrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double m = a(0, 0);
  for (Eigen::Index i = 1; i < n; ++i) m = std::min(m, a(i, i));
  return m;
}

}  // namespace oracle

#include "oracles.hpp"
#include "ssrgd/estimators.hpp"
#include "ssrgd/kernels.hpp"
#include "ssrgd/problems.hpp"
#include "ssrgd/rng.hpp"
#include "ssrgd/trace.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

using namespace ssrgd;

namespace {

// Central finite difference of f along every axis.
Vector fd_grad(const Problem& p, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector a = x, b = x;
    a(j) += h;
    b(j) -= h;
    g(j) = (p.value(a) - p.value(b)) / (2 * h);
  }
  return g;
}

Vector fd_hvp(const Problem& p, const Vector& x, const Vector& v, double h = 1e-5) {
  return (p.exact_grad(x + h * v) - p.exact_grad(x - h * v)) / (2 * h);
}

std::vector<ProblemInstance> zoo() {
  SeparableSaddleOptions s;
  s.d = 4;
  s.n = 9;
  s.delta_plant = 0.4;
  s.noise = 0.2;
  s.curvature_noise = 0.1;
  s.seed = 3;
  LogRampOptions r;
  r.d = 3;
  r.n = 8;
  r.noise = 0.1;
  r.curvature_noise = 0.1;
  r.seed = 4;
  return {make_separable_saddle(s), make_nonconvex_logistic(40, 5, 0.1, 1), make_log_ramp(r),
          make_random_quadratic(6, 4, 1.0, 2)};
}

}  // namespace

TEST_CASE("rng streams replay and differ by key") {
  RngStream a(1, 2), b(1, 2), c(1, 3), d(2, 2);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 16; ++i) {
    va.push_back(a.next_u64());
    vb.push_back(b.next_u64());
    vc.push_back(c.next_u64());
    vd.push_back(d.next_u64());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("rng split is deterministic and leaves the parent untouched") {
  RngStream a(5, 0), b(5, 0);
  RngStream child1 = a.split(7), child2 = a.split(7), other = a.split(8);
  CHECK(child1.next_u64() == child2.next_u64());
  CHECK(a.split(7).next_u64() != other.next_u64());
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform draws lie in [0,1) and indices in range") {
  RngStream r(9, 1);
  double mean = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    mean += u;
    REQUIRE(r.uniform_index(7) < 7);
  }
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal draws have unit variance") {
  RngStream r(11, 0);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("ball samples stay inside and fill the radius") {
  RngStream r(3, 3);
  const double radius = 0.7;
  std::size_t outer = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Vector v = sample_uniform_ball(r, 3, radius);
    REQUIRE(v.size() == 3);
    REQUIRE(v.norm() <= radius * (1 + 1e-15));
    if (v.norm() > radius * 0.5) ++outer;
  }
  // Uniform in a 3-ball: P(|v| > r/2) = 1 - 1/8.
  CHECK(static_cast<double>(outer) / n == doctest::Approx(0.875).epsilon(0.02));
  CHECK(sample_uniform_ball(r, 4, 0.0).norm() == 0.0);
  CHECK_THROWS_AS(sample_uniform_ball(r, 0, 1.0), Error);
  CHECK_THROWS_AS(sample_uniform_ball(r, 2, -1.0), Error);
}

TEST_CASE("minibatch sampling") {
  RngStream r(1, 0);
  const auto with = sample_minibatch(r, 5, 50, true);
  CHECK(with.size() == 50);
  CHECK(std::all_of(with.begin(), with.end(), [](SampleId i) { return i < 5; }));
  const auto without = sample_minibatch(r, 10, 10, false);
  CHECK(std::set<SampleId>(without.begin(), without.end()).size() == 10);
  CHECK_THROWS_AS(sample_minibatch(r, 4, 5, false), Error);
  CHECK_THROWS_AS(sample_minibatch(r, 0, 1), Error);
  CHECK_THROWS_AS(sample_minibatch(r, 3, 0), Error);
}

TEST_CASE("problem gradients match finite differences") {
  for (const auto& inst : zoo()) {
    CAPTURE(inst.name);
    const Problem& p = *inst;
    RngStream r(17, 0);
    for (int trial = 0; trial < 3; ++trial) {
      Vector x(p.dim());
      for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = 0.8 * (2 * r.uniform() - 1);
      const Vector g = p.exact_grad(x);
      CHECK((g - fd_grad(p, x)).norm() <= 1e-6 * (1 + g.norm()));
      CHECK((g - oracle::average_grad(p, x)).norm() <= 1e-12 * (1 + g.norm()));
      if (p.has_hvp()) {
        Vector v = Vector::Zero(x.size());
        v(trial % x.size()) = 1.0;
        v(0) += 0.5;
        const Vector hv = p.hvp(x, v);
        CHECK((hv - fd_hvp(p, x, v)).norm() <= 1e-5 * (1 + hv.norm()));
      }
    }
  }
}

TEST_CASE("declared smoothness constants hold on random pairs") {
  for (const auto& inst : zoo()) {
    CAPTURE(inst.name);
    const Problem& p = *inst;
    const auto sm = p.smoothness();
    const double box = std::min(1.0, p.box_radius());
    RngStream r(23, 0);
    double worst_l = 0, worst_rho = 0;
    for (int trial = 0; trial < 200; ++trial) {
      Vector x(p.dim()), y(p.dim());
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        x(j) = box * (2 * r.uniform() - 1);
        y(j) = box * (2 * r.uniform() - 1);
      }
      const double dist = (x - y).norm();
      for (std::uint64_t i = 0; i < p.num_components(); ++i) {
        const double gl = (oracle::component(p, i, x) - oracle::component(p, i, y)).norm() / dist;
        worst_l = std::max(worst_l, gl);
      }
      if (p.has_hvp()) {
        Vector v(p.dim());
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = r.normal();
        v.normalize();
        worst_rho = std::max(worst_rho, (p.hvp(x, v) - p.hvp(y, v)).norm() / dist);
      }
    }
    CHECK(worst_l <= sm.lipschitz_grad * (1 + 1e-12));
    if (p.has_hvp() && sm.lipschitz_hess > 0) CHECK(worst_rho <= sm.lipschitz_hess * (1 + 1e-12));
  }
}

TEST_CASE("planted saddle has an exactly zero gradient and known minimum") {
  SeparableSaddleOptions s;
  s.d = 5;
  s.n = 33;  // odd: the unpaired component carries no noise
  s.delta_plant = 0.3;
  s.noise = 0.5;
  s.curvature_noise = 0.2;
  s.seed = 8;
  const auto inst = make_separable_saddle(s);
  REQUIRE(inst.saddles.size() == 1);
  const Vector& x = inst.saddles[0].x;
  Vector g;
  kernels::mean_grad_all(*inst, inst->num_components(), x, g);
  CHECK(g.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(inst.saddles[0].lambda_min == doctest::Approx(-0.3));
  REQUIRE(inst.known_fstar);
  CHECK(*inst.known_fstar == doctest::Approx(-0.09 / 4.0));
  Vector xmin = Vector::Zero(5);
  xmin(4) = std::sqrt(0.3);
  CHECK(inst->value(xmin) == doctest::Approx(*inst.known_fstar).epsilon(1e-12));

  s.delta_plant = 0.0;
  CHECK_NOTHROW(make_separable_saddle(s));
  s.delta_plant = -0.1;
  CHECK_THROWS_AS(make_separable_saddle(s), Error);
}

TEST_CASE("log ramp minimum matches its closed form") {
  LogRampOptions o;
  o.d = 2;
  o.scale = 1.0;
  o.anchor = 0.01;
  const auto inst = make_log_ramp(o);
  REQUIRE(inst.known_fstar);
  Vector x = Vector::Zero(2);
  x(0) = std::sqrt(1.0 / 0.01 - 1.0);
  CHECK(inst->value(x) == doctest::Approx(*inst.known_fstar).epsilon(1e-12));
  CHECK(inst->exact_grad(x).norm() < 1e-12);
}

TEST_CASE("libsvm parsing") {
  std::istringstream ok("# header\n+1 1:0.5 3:2\n\n-1 2:1.5\n");
  const auto data = parse_libsvm(ok, 10);
  REQUIRE(data.features.rows() == 2);
  CHECK(data.features.cols() == 3);
  CHECK(data.features(0, 2) == 2.0);
  CHECK(data.features(1, 1) == 1.5);
  CHECK(data.labels(1) == -1.0);

  std::istringstream bad_index("+1 0:1\n");
  CHECK_THROWS_AS(parse_libsvm(bad_index, 10), Error);
  std::istringstream bad_token("+1 1-2\n");
  CHECK_THROWS_AS(parse_libsvm(bad_token, 10), Error);
  std::istringstream too_wide("+1 11:1\n");
  CHECK_THROWS_AS(parse_libsvm(too_wide, 10), Error);
  std::istringstream empty("# nothing\n");
  CHECK_THROWS_AS(parse_libsvm(empty, 10), Error);
  CHECK_THROWS_AS(load_libsvm("/nonexistent/file.svm", 10), Error);
}

TEST_CASE("online stream noise is bounded and keyed by sample id") {
  SeparableSaddleOptions s;
  s.d = 6;
  const auto base = make_separable_saddle(s);
  const auto online = make_online_stream(base, 0.5, 1);
  const Problem& p = *online;
  CHECK(p.mode() == OracleMode::online);
  CHECK(p.num_components() == kInfiniteComponents);
  const Vector x = Vector::Constant(6, 0.2);
  const Vector g = base->exact_grad(x);
  Vector a(6), b(6);
  for (SampleId id = 0; id < 500; ++id) {
    p.component_grad(id * 7919, x, a);
    REQUIRE((a - g).norm() <= 0.5 * (1 + 1e-12));
  }
  p.component_grad(42, x, a);
  p.component_grad(42, x, b);
  CHECK(a == b);
  CHECK(p.smoothness().variance_bound == 0.5);
}

TEST_CASE("parallel kernels agree with the serial reference") {
  const auto inst = make_nonconvex_logistic(3000, 12, 0.1, 5);
  const Problem& p = *inst;
  RngStream r(1, 0);
  const auto ids = sample_minibatch(r, 3000, 1500);
  const Vector x = Vector::Constant(12, 0.1), y = Vector::Constant(12, -0.2);
  Vector par, ser;
  kernels::mean_grad(p, ids, x, par);
  kernels::serial::mean_grad(p, ids, x, ser);
  CHECK((par - ser).norm() <= 1e-12 * (1 + ser.norm()));
  kernels::mean_grad_all(p, 3000, x, par);
  kernels::serial::mean_grad_all(p, 3000, x, ser);
  CHECK((par - ser).norm() <= 1e-12 * (1 + ser.norm()));
  kernels::mean_grad_diff(p, ids, x, y, par);
  kernels::serial::mean_grad_diff(p, ids, x, y, ser);
  CHECK((par - ser).norm() <= 1e-12 * (1 + ser.norm()));
}

TEST_CASE("blocked reductions are bitwise independent of the thread count") {
  const auto inst = make_nonconvex_logistic(5000, 8, 0.1, 6);
  const Vector x = Vector::Constant(8, 0.3);
  const int saved = kernels::max_threads();
  std::vector<Vector> results;
  std::vector<double> sums;
  for (int t : {1, 2, 3, 4}) {
    kernels::set_threads(t);
    Vector out;
    kernels::mean_grad_all(*inst, 5000, x, out);
    results.push_back(out);
    sums.push_back(kernels::blocked_mean(5000, [](std::uint64_t i) { return 1.0 / (1.0 + i); }));
  }
  kernels::set_threads(saved);
  for (std::size_t k = 1; k < results.size(); ++k) {
    CHECK(results[k] == results[0]);
    CHECK(sums[k] == sums[0]);
  }
  CHECK(kernels::blocked_mean(0, [](std::uint64_t) { return 1.0; }) == 0.0);
  CHECK(kernels::blocked_mean(1000, [](std::uint64_t) { return 2.0; }) == 2.0);
}

TEST_CASE("estimators charge the documented SFO counts") {
  const auto inst = make_random_quadratic(10, 3, 1.0, 1);
  CountingProblem counted(*inst);
  SfoCounter sfo;
  const Vector x = Vector::Constant(3, 0.5);
  RngStream r(2, 0);

  const Vector g = full_gradient(counted, x, sfo);
  CHECK(sfo.raw == 10);
  CHECK(sfo.nominal == 10);
  CHECK((g - oracle::average_grad(*inst, x)).norm() < 1e-14);

  large_batch_gradient(counted, x, 7, r, sfo);
  CHECK(sfo.raw == 17);
  CHECK(sfo.large_batch_samples == 7);

  RecursiveState st{g, x};
  const Vector x2 = Vector::Constant(3, 0.4);
  const IndexMultiset batch = {1, 1, 4};
  recursive_step(counted, st, x2, batch, sfo);
  CHECK(sfo.raw == 23);
  CHECK(sfo.nominal == 20);
  CHECK(st.prev_x == x2);
  Vector expect = g;
  for (auto i : batch) expect += (oracle::component(*inst, i, x2) - oracle::component(*inst, i, x)) / 3.0;
  CHECK((st.v - expect).norm() < 1e-14);

  const SvrgSnapshot snap{x, g};
  svrg_step(counted, snap, x2, batch, sfo);
  CHECK(sfo.raw == 29);
  CHECK(counted.calls() == sfo.raw);

  CHECK_THROWS_AS(large_batch_gradient(counted, x, 0, r, sfo), Error);
  CHECK_THROWS_AS(recursive_step(counted, st, x2, {}, sfo), Error);
  CHECK_THROWS_AS(svrg_step(counted, std::nullopt, x2, batch, sfo), Error);
  const auto online = make_online_stream(inst, 0.1, 0);
  CHECK_THROWS_AS(full_gradient(*online, x, sfo), Error);
}

TEST_CASE("trace csv round trips exactly") {
  std::vector<TraceRecord> t = {
      {0, 1.0 / 3.0, 0.1234567890123456789, 10, TraceEvent::epoch_start},
      {1, -2.5e-300, std::nullopt, 14, TraceEvent::none},
      {2, 7.0, 3.0, 20, TraceEvent::perturbation},
      {3, 6.5, std::nullopt, 24, TraceEvent::super_epoch_end_fdecrease},
      {4, 6.4, std::nullopt, 28, TraceEvent::super_epoch_end_timeout},
      {5, 6.3, std::nullopt, 32, TraceEvent::random_stop},
  };
  std::stringstream ss;
  write_trace_csv(ss, t);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "iter,f,grad_norm,sfo,event");
  ss.seekg(0);
  CHECK(read_trace_csv(ss) == t);

  std::istringstream bad_header("iter,f,sfo\n");
  CHECK_THROWS_AS(read_trace_csv(bad_header), Error);
  std::istringstream bad_row("iter,f,grad_norm,sfo,event\n1,abc,,3,none\n");
  CHECK_THROWS_AS(read_trace_csv(bad_row), Error);
  std::istringstream bad_event("iter,f,grad_norm,sfo,event\n1,1,,3,bogus\n");
  CHECK_THROWS_AS(read_trace_csv(bad_event), Error);
}

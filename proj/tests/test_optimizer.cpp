#include "oracles.hpp"
#include "ssrgd/baselines.hpp"
#include "ssrgd/optimizer.hpp"
#include "ssrgd/problems.hpp"
#include "ssrgd/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace ssrgd;

namespace {

// A finite sum of n identical 1-d quadratics whose declared constants are
// chosen freely, so derived parameters can be checked against hand values.
class Declared final : public Problem {
 public:
  Declared(std::uint64_t n, double L, double rho) : n_(n), L_(L), rho_(rho) {}
  OracleMode mode() const override { return OracleMode::finite_sum; }
  std::size_t dim() const override { return 1; }
  std::uint64_t num_components() const override { return n_; }
  Smoothness smoothness() const override { return {L_, rho_, 0.0}; }
  void component_grad(SampleId, const Vector& x, Eigen::Ref<Vector> out) const override {
    out = x;
  }
  double value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }

 private:
  std::uint64_t n_;
  double L_, rho_;
};

ProblemInstance saddle(std::uint64_t n, double noise, std::size_t d = 6) {
  SeparableSaddleOptions s;
  s.d = d;
  s.n = n;
  s.delta_plant = 0.4;
  s.noise = noise;
  s.seed = 2;
  return make_separable_saddle(s);
}

}  // namespace

TEST_CASE("first-order derived parameters") {
  const Declared p(100, 2.0, 0.0);
  const RunConfig cfg = derive_config_first_order(p, 0.01);
  CHECK(cfg.epoch_len == 10);
  CHECK(cfg.minibatch == 10);
  CHECK(cfg.eta == doctest::Approx(0.30901699437494745).epsilon(1e-15));
  CHECK(cfg.order == Order::first);
  CHECK_FALSE(cfg.perturbation_enabled());
  CHECK(derive_config_first_order(Declared(101, 1, 0), 0.1).epoch_len == 11);
  CHECK_THROWS_AS(derive_config_first_order(p, 0.0), Error);
  CHECK(ceil_sqrt(0) == 0);
  CHECK(ceil_sqrt(1) == 1);
  CHECK(ceil_sqrt(99) == 10);
  CHECK(ceil_sqrt(1ULL << 62) == (1ULL << 31));
}

TEST_CASE("second-order derived thresholds") {
  // L = 2, rho = 6, eps = 0.01, delta = 0.1 worked by hand:
  // eta = 0.618.../2, F = 1e-3/36, T = ceil(1/(eta * 0.1)) = 33,
  // r = min(1e-3/(36 * 0.01), 0.1^1.5/(6 sqrt 2)) = 1/360.
  const Declared p(100, 2.0, 6.0);
  const RunConfig c = derive_config_second_order(p, 0.01, 0.1);
  CHECK(c.eta == doctest::Approx(0.30901699437494745).epsilon(1e-15));
  CHECK(c.g_thres == 0.01);
  CHECK(c.f_thres == doctest::Approx(2.7777777777777777e-05).epsilon(1e-14));
  CHECK(c.super_epoch_len == 33);
  CHECK(c.perturb_radius == doctest::Approx(1.0 / 360.0).epsilon(1e-14));
  CHECK(c.minibatch >= c.epoch_len);

  const RunConfig c2 = derive_config_second_order(p, 0.01, 0.1, 2.0);
  CHECK(c2.eta == c.eta);
  CHECK(c2.f_thres == doctest::Approx(2 * c.f_thres).epsilon(1e-14));
  CHECK(c2.perturb_radius == doctest::Approx(2 * c.perturb_radius).epsilon(1e-14));
  CHECK(c2.super_epoch_len == 65);

  // Small eps switches r to the delta^{3/2}/(rho sqrt L) branch.
  const RunConfig c3 = derive_config_second_order(p, 1e-4, 0.1);
  CHECK(c3.perturb_radius == doctest::Approx(std::pow(0.1, 1.5) / (6.0 * std::sqrt(2.0))).epsilon(1e-14));

  CHECK_THROWS_AS(derive_config_second_order(Declared(100, 2.0, 0.0), 0.01, 0.1), Error);
  CHECK_THROWS_AS(derive_config_second_order(p, 0.01, 0.0), Error);
}

TEST_CASE("online derived parameters") {
  const auto online = make_online_stream(saddle(1, 0.0), 1.0, 0);
  const RunConfig c = derive_config_online_first_order(*online, 0.1);
  CHECK(c.batch == 400);
  CHECK(c.epoch_len == 20);
  CHECK(c.minibatch == 20);
  CHECK_THROWS_AS(derive_config_online_first_order(Declared(4, 1, 0), 0.1), Error);
  CHECK_THROWS_AS(derive_config_first_order(*online, 0.1), Error);
}

TEST_CASE("configuration validation") {
  const Declared p(100, 2.0, 6.0);
  RunConfig c = derive_config_first_order(p, 0.1);
  CHECK_NOTHROW(c.validate(p));
  c.eta = 0.7 / 2.0;
  CHECK_THROWS_AS(c.validate(p), Error);
  c = derive_config_first_order(p, 0.1);
  c.eta = -1;
  CHECK_THROWS_AS(c.validate(p), Error);
  c = derive_config_first_order(p, 0.1);
  c.minibatch = 0;
  CHECK_THROWS_AS(c.validate(p), Error);
  c = derive_config_second_order(p, 0.1, 0.1);
  c.minibatch = c.epoch_len - 1;
  CHECK_THROWS_AS(c.validate(p), Error);
  c = derive_config_second_order(p, 0.1, 0.1);
  c.super_epoch_len = 0;
  CHECK_THROWS_AS(c.validate(p), Error);
  c = derive_config_first_order(p, 0.1);
  c.with_replacement = false;
  c.minibatch = 101;
  c.epoch_len = 1;
  CHECK_THROWS_AS(c.validate(p), Error);

  try {
    RunConfig bad = derive_config_first_order(p, 0.1);
    bad.eta = 1.0;
    bad.validate(p);
    FAIL("expected a rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_config);
  }
}

TEST_CASE("random stop probabilities") {
  RngStream r(4, 1);
  CHECK(random_stop_decision(r, 5, 5));
  CHECK_THROWS_AS(random_stop_decision(r, 0, 5), Error);
  CHECK_THROWS_AS(random_stop_decision(r, 6, 5), Error);
  int hits = 0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) hits += random_stop_decision(r, 1, 4) ? 1 : 0;
  CHECK(static_cast<double>(hits) / trials == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("raw SFO count equals component-gradient calls") {
  const auto inst = make_nonconvex_logistic(100, 5, 0.1, 3);
  CountingProblem counted(*inst);
  RunConfig cfg = derive_config_first_order(counted, 1e-9);
  cfg.sfo_budget = 5000;
  cfg.seed = 1;
  RngStream rng(1, 0);
  const auto out = run_ssrgd(counted, cfg, inst.x0, rng);
  CHECK(out.sfo.raw == counted.calls());
  CHECK(out.termination == Termination::budget_exhausted);
  CHECK(out.sfo.raw >= cfg.sfo_budget);
  CHECK(out.sfo.raw < cfg.sfo_budget + 100);
  CHECK(out.sfo.nominal == out.sfo.full_grad_calls * 100 + out.sfo.paired_samples);
  CHECK(out.sfo.raw == out.sfo.full_grad_calls * 100 + 2 * out.sfo.paired_samples);
}

TEST_CASE("trace rows carry gradient norms only at anchors") {
  const auto inst = saddle(16, 0.1);
  RunConfig cfg = derive_config_second_order(*inst, 0.05, 0.3);
  cfg.sfo_budget = 20000;
  RngStream rng(3, 0);
  const auto out = run_ssrgd(*inst, cfg, inst.saddles[0].x, rng);
  REQUIRE_FALSE(out.trace.empty());
  bool saw_perturbation = false;
  std::uint64_t prev_sfo = 0;
  for (const auto& row : out.trace) {
    const bool anchor = row.event == TraceEvent::epoch_start || row.event == TraceEvent::perturbation;
    CHECK(row.grad_norm.has_value() == anchor);
    CHECK(row.sfo_count >= prev_sfo);
    prev_sfo = row.sfo_count;
    saw_perturbation |= row.event == TraceEvent::perturbation;
  }
  CHECK(saw_perturbation);
  CHECK_FALSE(out.perturbations.empty());
  CHECK(inst->value(out.final_x) < inst->value(inst.saddles[0].x));
}

TEST_CASE("first-order mode never perturbs and stops at a FOSP") {
  const auto inst = saddle(16, 0.1);
  RunConfig cfg = derive_config_first_order(*inst, 0.05);
  cfg.sfo_budget = 100000;
  RngStream rng(3, 0);
  const auto out = run_ssrgd(*inst, cfg, inst.x0, rng);
  CHECK(out.perturbations.empty());
  for (const auto& row : out.trace) CHECK(row.event != TraceEvent::perturbation);
  CHECK(out.termination == Termination::fosp_reached);
  REQUIRE(out.sfo_to_fosp);
  CHECK(inst->exact_grad(out.final_x).norm() <= 0.05);
}

TEST_CASE("runs replay exactly from the same seed") {
  const auto inst = saddle(32, 0.2);
  RunConfig cfg = derive_config_second_order(*inst, 0.05, 0.3);
  cfg.sfo_budget = 10000;
  RngStream a(9, 0), b(9, 0), c(10, 0);
  const auto x = run_ssrgd(*inst, cfg, inst.saddles[0].x, a);
  const auto y = run_ssrgd(*inst, cfg, inst.saddles[0].x, b);
  const auto z = run_ssrgd(*inst, cfg, inst.saddles[0].x, c);
  CHECK(x.trace == y.trace);
  CHECK(x.final_x == y.final_x);
  CHECK(x.final_x != z.final_x);
}

TEST_CASE("sosp hook halts the run and zero budget does nothing") {
  const auto inst = saddle(16, 0.0);
  RunConfig cfg = derive_config_second_order(*inst, 0.05, 0.3);
  cfg.sfo_budget = 50000;
  RunHooks hooks;
  int calls = 0;
  hooks.sosp_check = [&](const Vector&) { return ++calls == 2; };
  RngStream rng(1, 0);
  const auto out = run_ssrgd(*inst, cfg, inst.saddles[0].x, rng, hooks);
  CHECK(out.termination == Termination::sosp_certified);
  CHECK(calls == 2);

  cfg.sfo_budget = 0;
  RngStream rng2(1, 0);
  const auto idle = run_ssrgd(*inst, cfg, inst.saddles[0].x, rng2);
  CHECK(idle.sfo.raw == 0);
  CHECK(idle.final_x == inst.saddles[0].x);
  CHECK_THROWS_AS(run_ssrgd(*inst, cfg, Vector::Zero(2), rng2), Error);
}

TEST_CASE("minibatch hook sees every sampled multiset") {
  const auto inst = make_random_quadratic(25, 3, 0.5, 1);
  RunConfig cfg = derive_config_first_order(*inst, 1e-12);
  cfg.sfo_budget = 2000;
  RunHooks hooks;
  std::uint64_t seen = 0;
  hooks.on_minibatch = [&](std::span<const SampleId> ids) {
    for (auto i : ids) REQUIRE(i < 25);
    seen += ids.size();
  };
  RngStream rng(2, 0);
  const auto out = run_ssrgd(*inst, cfg, inst.x0, rng, hooks);
  CHECK(seen == out.sfo.paired_samples);
}

TEST_CASE("online mode uses a large batch anchor") {
  const auto online = make_online_stream(saddle(1, 0.0, 4), 0.5, 3);
  RunConfig cfg = derive_config_online_first_order(*online, 0.1);
  cfg.sfo_budget = 50000;
  RngStream rng(5, 0);
  const auto out = run_ssrgd(*online, cfg, Vector::Constant(4, 0.5), rng);
  CHECK(out.sfo.full_grad_calls == 0);
  CHECK(out.sfo.large_batch_calls >= 1);
  CHECK(out.sfo.large_batch_samples == out.sfo.large_batch_calls * cfg.batch);
}

TEST_CASE("gradient descent baseline") {
  const auto inst = make_random_quadratic(8, 4, 0.3, 5);
  BaselineParams bp;
  bp.kind = BaselineKind::gd;
  bp.eta = 1.0 / inst->smoothness().lipschitz_grad;
  bp.eps = 1e-3;
  bp.stop_at_fosp = true;
  RngStream rng(0, 0);
  const Vector x0 = Vector::Constant(4, 1.0);
  const auto out = run_baseline(bp, *inst, x0, 1'000'000, rng);
  CHECK(out.sfo.raw % 8 == 0);
  CHECK(out.sfo.full_grad_calls * 8 == out.sfo.raw);
  if (out.termination == Termination::fosp_reached) {
    CHECK(inst->exact_grad(out.final_x).norm() <= 1e-3);
  }
  CHECK_THROWS_AS(run_baseline(bp, *inst, x0, 0, rng), Error);
  bp.eta = 0.0;
  CHECK_THROWS_AS(run_baseline(bp, *inst, x0, 100, rng), Error);
  CHECK(parse_baseline_kind("svrg") == BaselineKind::svrg);
  CHECK_FALSE(parse_baseline_kind("adam").has_value());
}

TEST_CASE("sgd baseline charges b per step") {
  const auto inst = make_nonconvex_logistic(64, 4, 0.1, 2);
  CountingProblem counted(*inst);
  BaselineParams bp;
  bp.kind = BaselineKind::sgd;
  bp.eta = 0.5 / inst->smoothness().lipschitz_grad;
  bp.minibatch = 4;
  RngStream rng(1, 0);
  const auto out = run_baseline(bp, counted, inst.x0, 400, rng);
  CHECK(out.sfo.raw == counted.calls());
  CHECK(out.sfo.single_samples == out.sfo.raw);
  CHECK(out.sfo.single_steps * 4 == out.sfo.raw);
  CHECK(inst->value(out.final_x) < inst->value(inst.x0));
}

TEST_CASE("svrg snapshot stores the exact anchor gradient") {
  const auto inst = make_random_quadratic(9, 3, 0.5, 8);
  BaselineParams bp;
  bp.kind = BaselineKind::svrg;
  bp.eta = 1.0 / (3 * inst->smoothness().lipschitz_grad);
  bp.minibatch = 4;
  bp.epoch_len = 3;
  RunHooks hooks;
  int snapshots = 0;
  hooks.on_snapshot = [&](const Vector& anchor, const Vector& g) {
    ++snapshots;
    CHECK((g - oracle::average_grad(*inst, anchor)).norm() <= 1e-13 * (1 + g.norm()));
  };
  RngStream rng(1, 0);
  const auto out = run_baseline(bp, *inst, Vector::Constant(3, 1.0), 500, rng, hooks);
  CHECK(snapshots >= 2);
  CHECK(out.sfo.raw == out.sfo.full_grad_calls * 9 + 2 * out.sfo.paired_samples);
  bp.epoch_len = 0;
  CHECK_THROWS_AS(run_baseline(bp, *inst, Vector::Constant(3, 1.0), 500, rng), Error);
}

TEST_CASE("perturbed gradient descent leaves an exact saddle") {
  const auto inst = saddle(4, 0.0);
  const RunConfig cfg = derive_config_second_order(*inst, 0.05, 0.3);
  BaselineParams bp = perturbed_gd_from(cfg);
  CHECK(bp.kind == BaselineKind::perturbed_gd);
  CHECK(bp.perturb_radius == cfg.perturb_radius);
  RngStream rng(2, 0);
  const auto out = run_baseline(bp, *inst, inst.saddles[0].x, 200000, rng);
  CHECK_FALSE(out.perturbations.empty());
  CHECK(inst->value(out.final_x) < inst->value(inst.saddles[0].x) - cfg.f_thres);

  BaselineParams plain = bp;
  plain.kind = BaselineKind::gd;
  RngStream rng2(2, 0);
  const auto stuck = run_baseline(plain, *inst, inst.saddles[0].x, 2000, rng2);
  CHECK(stuck.final_x == inst.saddles[0].x);
}

TEST_CASE("dense and power certification") {
  Matrix h(3, 3);
  h << 2, 0.5, 0, 0.5, 1, 0, 0, 0, -0.2;
  const auto q = make_quadratic(h, Vector::Zero(3));
  const Vector x = Vector::Zero(3);
  CHECK(lambda_min_dense(*q, x) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(lambda_min_dense(*q, x) == doctest::Approx(oracle::jacobi_min_eigenvalue(h)).epsilon(1e-12));
  const auto [lam, vec] = min_eigenpair_dense(*q, x);
  CHECK(std::abs(vec(2)) == doctest::Approx(1.0));

  RngStream rng(1, 0);
  const auto pe = lambda_min_power(*q, x, q->smoothness().lipschitz_grad, 500, rng);
  CHECK(pe.estimate >= -0.2 - 1e-9);
  CHECK(pe.estimate - pe.slack <= -0.2 + 1e-9);

  const Certificate c = certify(*q, x, 0.1, 0.1);
  CHECK(c.is_fosp);
  CHECK_FALSE(c.is_sosp);
  CHECK(c.method == CertMethod::dense);
  const Certificate c2 = certify(*q, x, 0.1, 0.3);
  CHECK(c2.is_sosp);
  const Certificate c3 = certify(*q, Vector::Constant(3, 1.0), 0.1, 0.3);
  CHECK_FALSE(c3.is_fosp);
  CHECK_FALSE(c3.is_sosp);

  CertifyOptions small;
  small.dense_cap = 2;
  const Certificate cp = certify(*q, x, 0.1, 0.1, small);
  CHECK(cp.method == CertMethod::shifted_power);
  CHECK_FALSE(cp.is_sosp);
  CHECK_THROWS_AS(lambda_min_dense(*q, x, 2), Error);
  CHECK_THROWS_AS(lambda_min_power(*q, x, 0.0, 10, rng), Error);
  CHECK_THROWS_AS(certify(Declared(3, 1, 0), Vector::Zero(1), 0.1, 0.1), Error);
}

#include "ssrgd/baselines.hpp"

#include "ssrgd/estimators.hpp"
#include "ssrgd/kernels.hpp"

#include <cmath>

namespace ssrgd {

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::gd: return "gd";
    case BaselineKind::perturbed_gd: return "perturbed_gd";
    case BaselineKind::sgd: return "sgd";
    case BaselineKind::svrg: return "svrg";
  }
  return "unknown";
}

std::optional<BaselineKind> parse_baseline_kind(const std::string& name) {
  for (auto k : {BaselineKind::gd, BaselineKind::perturbed_gd, BaselineKind::sgd, BaselineKind::svrg}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

void BaselineParams::validate(const Problem& p) const {
  auto reject = [](const std::string& m) { throw Error(ErrorKind::invalid_config, m); };
  if (!(eta > 0.0)) reject("baseline step size eta must satisfy eta > 0");
  const bool full = kind == BaselineKind::gd || kind == BaselineKind::perturbed_gd ||
                    kind == BaselineKind::svrg;
  if (full && p.mode() != OracleMode::finite_sum) {
    reject(std::string(to_string(kind)) + " requires a finite-sum full-gradient oracle");
  }
  if ((kind == BaselineKind::sgd || kind == BaselineKind::svrg) && minibatch == 0) {
    reject("minibatch size must be >= 1");
  }
  if (kind == BaselineKind::svrg && epoch_len == 0) reject("svrg requires an epoch length");
  if (kind == BaselineKind::perturbed_gd) {
    if (perturb_radius < 0.0 || g_thres < 0.0 || f_thres < 0.0) reject("thresholds must be >= 0");
    if (perturb_radius > 0.0 && super_epoch_len == 0) reject("perturbed_gd requires a super epoch length");
  }
}

BaselineParams perturbed_gd_from(const RunConfig& cfg) {
  BaselineParams b;
  b.kind = BaselineKind::perturbed_gd;
  b.eta = cfg.eta;
  b.perturb_radius = cfg.perturb_radius;
  b.g_thres = cfg.g_thres;
  b.f_thres = cfg.f_thres;
  b.super_epoch_len = cfg.super_epoch_len;
  b.eps = cfg.eps;
  b.stop_at_fosp = cfg.stop_at_fosp;
  return b;
}

namespace {

struct Recorder {
  RunOutcome& out;
  void push(std::uint64_t t, double f, std::optional<double> g, TraceEvent ev) {
    out.trace.push_back(TraceRecord{t, f, g, out.sfo.raw, ev});
  }
  bool fosp(const BaselineParams& bp, double gnorm, std::uint64_t t) {
    if (bp.stop_at_fosp && gnorm <= bp.eps) {
      out.sfo_to_fosp = out.sfo.raw;
      out.iter_to_fosp = t;
      out.termination = Termination::fosp_reached;
      return true;
    }
    return false;
  }
  void nonfinite(std::uint64_t t) {
    out.warnings.push_back("non-finite oracle output at iteration " + std::to_string(t));
    out.termination = Termination::nonfinite;
  }
};

void run_gd(const BaselineParams& bp, const Problem& p, Vector x, std::uint64_t budget,
            RngStream& rng, RunOutcome& out) {
  Recorder rec{out};
  RngStream perturb_rng = rng.split(streams::perturb);
  const bool perturbed = bp.kind == BaselineKind::perturbed_gd && bp.perturb_radius > 0.0;
  bool super_epoch = false;
  double f_tilde = 0.0;
  std::uint64_t t_init = 0;
  for (std::uint64_t t = 0;; ++t) {
    if (out.sfo.raw >= budget) {
      out.termination = Termination::budget_exhausted;
      break;
    }
    if (t >= bp.max_iters) {
      out.termination = Termination::max_epochs;
      break;
    }
    Vector g = full_gradient(p, x, out.sfo);
    if (!all_finite(g)) {
      rec.nonfinite(t);
      break;
    }
    double f = p.value(x);
    if (super_epoch) {
      TraceEvent ev = TraceEvent::none;
      if (f_tilde - f >= bp.f_thres) ev = TraceEvent::super_epoch_end_fdecrease;
      else if (t - t_init >= bp.super_epoch_len) ev = TraceEvent::super_epoch_end_timeout;
      if (ev != TraceEvent::none) {
        super_epoch = false;
        rec.push(t, f, g.norm(), ev);
      }
    }
    if (rec.fosp(bp, g.norm(), t)) {
      rec.push(t, f, g.norm(), TraceEvent::none);
      break;
    }
    if (perturbed && !super_epoch && g.norm() <= bp.g_thres) {
      out.sosp_candidates.emplace_back(t, x);
      super_epoch = true;
      t_init = t;
      f_tilde = f;
      const Vector xi = sample_uniform_ball(perturb_rng, p.dim(), bp.perturb_radius);
      const double gn = g.norm();
      x += xi;
      f = p.value(x);
      out.perturbations.push_back(PerturbationRecord{t, f_tilde, f, gn, bp.perturb_radius, xi.norm()});
      rec.push(t, f, gn, TraceEvent::perturbation);
      g = full_gradient(p, x, out.sfo);
    }
    rec.push(t, f, g.norm(), TraceEvent::none);
    x -= bp.eta * g;
    out.iterations = t + 1;
    if (!all_finite(x)) {
      rec.nonfinite(t + 1);
      break;
    }
  }
  out.final_x = x;
}

void run_sgd(const BaselineParams& bp, const Problem& p, Vector x, std::uint64_t budget,
             RngStream& rng, const RunHooks& hooks, RunOutcome& out) {
  Recorder rec{out};
  RngStream batch_rng = rng.split(streams::minibatch);
  const std::uint64_t n = p.num_components();
  std::uint64_t every = bp.monitor_every;
  if (every == 0) {
    every = p.mode() == OracleMode::finite_sum ? (n + bp.minibatch - 1) / bp.minibatch : 1;
  }
  Vector g;
  for (std::uint64_t t = 0;; ++t) {
    std::optional<double> gnorm;
    if (t % every == 0) {
      gnorm = p.exact_grad(x).norm();
      if (rec.fosp(bp, *gnorm, t)) {
        rec.push(t, p.value(x), gnorm, TraceEvent::none);
        break;
      }
    }
    if (out.sfo.raw >= budget) {
      out.termination = Termination::budget_exhausted;
      rec.push(t, p.value(x), gnorm, TraceEvent::none);
      break;
    }
    if (t >= bp.max_iters) {
      out.termination = Termination::max_epochs;
      break;
    }
    rec.push(t, p.value(x), gnorm, TraceEvent::none);
    const IndexMultiset batch = sample_minibatch(batch_rng, n, bp.minibatch, bp.with_replacement);
    if (hooks.on_minibatch) hooks.on_minibatch(batch);
    kernels::mean_grad(p, batch, x, g);
    out.sfo.add_single(batch.size());
    x -= bp.eta * g;
    out.iterations = t + 1;
    if (!all_finite(x)) {
      rec.nonfinite(t + 1);
      break;
    }
  }
  out.final_x = x;
}

void run_svrg(const BaselineParams& bp, const Problem& p, Vector x, std::uint64_t budget,
              RngStream& rng, const RunHooks& hooks, RunOutcome& out) {
  Recorder rec{out};
  RngStream batch_rng = rng.split(streams::minibatch);
  const std::uint64_t n = p.num_components();
  std::uint64_t t = 0;
  bool halt = false;
  for (std::uint64_t s = 0; !halt; ++s) {
    if (out.sfo.raw >= budget) {
      out.termination = Termination::budget_exhausted;
      break;
    }
    out.epochs = s + 1;
    std::optional<SvrgSnapshot> snap = SvrgSnapshot{x, full_gradient(p, x, out.sfo)};
    if (!all_finite(snap->anchor_grad)) {
      rec.nonfinite(t);
      break;
    }
    if (hooks.on_snapshot) hooks.on_snapshot(snap->anchor, snap->anchor_grad);
    const double gnorm = snap->anchor_grad.norm();
    rec.push(t, p.value(x), gnorm, TraceEvent::epoch_start);
    if (rec.fosp(bp, gnorm, t)) break;
    for (std::uint64_t k = 1; k <= bp.epoch_len; ++k) {
      if (t >= bp.max_iters) {
        out.termination = Termination::max_epochs;
        halt = true;
        break;
      }
      const IndexMultiset batch = sample_minibatch(batch_rng, n, bp.minibatch, bp.with_replacement);
      if (hooks.on_minibatch) hooks.on_minibatch(batch);
      const Vector v = svrg_step(p, snap, x, batch, out.sfo);
      x -= bp.eta * v;
      ++t;
      out.iterations = t;
      if (!all_finite(x)) {
        rec.nonfinite(t);
        halt = true;
        break;
      }
      rec.push(t, p.value(x), std::nullopt, TraceEvent::none);
      if (out.sfo.raw >= budget) {
        out.termination = Termination::budget_exhausted;
        halt = true;
        break;
      }
    }
  }
  out.final_x = x;
}

}  // namespace

RunOutcome run_baseline(const BaselineParams& params, const Problem& p, const Vector& x0,
                        std::uint64_t sfo_budget, RngStream& rng, const RunHooks& hooks) {
  params.validate(p);
  if (sfo_budget == 0) throw Error(ErrorKind::invalid_config, "baseline budget must be > 0");
  if (static_cast<std::size_t>(x0.size()) != p.dim()) {
    throw Error(ErrorKind::invalid_input, "initial point has the wrong dimension");
  }
  RunOutcome out;
  switch (params.kind) {
    case BaselineKind::gd:
    case BaselineKind::perturbed_gd: run_gd(params, p, x0, sfo_budget, rng, out); break;
    case BaselineKind::sgd: run_sgd(params, p, x0, sfo_budget, rng, hooks, out); break;
    case BaselineKind::svrg: run_svrg(params, p, x0, sfo_budget, rng, hooks, out); break;
  }
  if (!p.in_box(out.final_x)) {
    out.warnings.push_back("final iterate lies outside the declared domain box");
  }
  return out;
}

}  // namespace ssrgd

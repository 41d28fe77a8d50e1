#include "ssrgd/optimizer.hpp"

#include "ssrgd/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ssrgd {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::sosp_certified: return "sosp_certified";
    case Termination::max_epochs: return "max_epochs";
    case Termination::fosp_reached: return "fosp_reached";
    case Termination::nonfinite: return "nonfinite";
  }
  return "unknown";
}

std::uint64_t ceil_sqrt(std::uint64_t n) {
  if (n == 0) return 0;
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (s * s < n) ++s;
  while (s > 1 && (s - 1) * (s - 1) >= n) --s;
  return s;
}

namespace {

void require_finite_sum(const Problem& p, const char* what) {
  if (p.mode() != OracleMode::finite_sum) {
    throw Error(ErrorKind::invalid_config, std::string(what) + " requires a finite-sum problem");
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorKind::invalid_config, std::string(name) + " must be > 0");
}

void fill_second_order(RunConfig& cfg, const Problem& p, double eps, double delta,
                       double logfactor) {
  require_positive(eps, "eps");
  require_positive(delta, "delta");
  require_positive(logfactor, "logfactor");
  const Smoothness s = p.smoothness();
  if (!(s.lipschitz_hess > 0.0)) {
    throw Error(ErrorKind::invalid_metadata,
                "second-order mode needs a positive Hessian Lipschitz constant rho");
  }
  const double L = s.lipschitz_grad;
  const double rho = s.lipschitz_hess;
  cfg.order = Order::second;
  cfg.eps = eps;
  cfg.delta = delta;
  cfg.logfactor = logfactor;
  cfg.eta = std::min(logfactor, kGoldenStep) / L;
  cfg.g_thres = eps;
  cfg.f_thres = logfactor * delta * delta * delta / (rho * rho);
  cfg.super_epoch_len = static_cast<std::uint64_t>(std::ceil(logfactor / (cfg.eta * delta)));
  cfg.perturb_radius = logfactor * std::min(delta * delta * delta / (rho * rho * eps),
                                            std::pow(delta, 1.5) / (rho * std::sqrt(L)));
}

std::uint64_t online_batch(const Problem& p, double eps) {
  if (p.mode() != OracleMode::online) {
    throw Error(ErrorKind::invalid_config, "online derivation requires an online problem");
  }
  require_positive(eps, "eps");
  const double sigma = p.smoothness().variance_bound;
  return std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(4.0 * sigma * sigma / (eps * eps) - 1e-9)));
}

}  // namespace

RunConfig derive_config_first_order(const Problem& p, double eps) {
  require_finite_sum(p, "derive_config_first_order (use the online variant)");
  require_positive(eps, "eps");
  RunConfig cfg;
  cfg.order = Order::first;
  cfg.eps = eps;
  cfg.eta = kGoldenStep / p.smoothness().lipschitz_grad;
  cfg.epoch_len = cfg.minibatch = ceil_sqrt(p.num_components());
  cfg.perturb_radius = 0.0;
  cfg.g_thres = 0.0;
  cfg.stop_at_fosp = true;
  return cfg;
}

RunConfig derive_config_online_first_order(const Problem& p, double eps) {
  RunConfig cfg;
  cfg.batch = online_batch(p, eps);
  cfg.order = Order::first;
  cfg.eps = eps;
  cfg.eta = kGoldenStep / p.smoothness().lipschitz_grad;
  cfg.epoch_len = cfg.minibatch = ceil_sqrt(cfg.batch);
  cfg.stop_at_fosp = true;
  return cfg;
}

RunConfig derive_config_second_order(const Problem& p, double eps, double delta,
                                     double logfactor) {
  require_finite_sum(p, "derive_config_second_order (use the online variant)");
  RunConfig cfg;
  fill_second_order(cfg, p, eps, delta, logfactor);
  cfg.epoch_len = cfg.minibatch = ceil_sqrt(p.num_components());
  return cfg;
}

RunConfig derive_config_online_second_order(const Problem& p, double eps, double delta,
                                            double logfactor) {
  RunConfig cfg;
  cfg.batch = online_batch(p, eps);
  fill_second_order(cfg, p, eps, delta, logfactor);
  cfg.epoch_len = cfg.minibatch = ceil_sqrt(cfg.batch);
  return cfg;
}

bool random_stop_decision(RngStream& rng, std::uint64_t k, std::uint64_t m) {
  if (k < 1 || k > m) throw Error(ErrorKind::invalid_input, "random stop needs 1 <= k <= m");
  const double remaining = static_cast<double>(m - k + 1);
  return rng.uniform() * remaining < 1.0;
}

RunOutcome run_ssrgd(const Problem& p, const RunConfig& cfg, const Vector& x0, RngStream& rng,
                     const RunHooks& hooks) {
  cfg.validate(p);
  if (static_cast<std::size_t>(x0.size()) != p.dim()) {
    throw Error(ErrorKind::invalid_input, "initial point has the wrong dimension");
  }
  RunOutcome out;
  out.final_x = x0;
  if (cfg.sfo_budget == 0) return out;

  RngStream batch_rng = rng.split(streams::minibatch);
  RngStream stop_rng = rng.split(streams::stop);
  RngStream perturb_rng = rng.split(streams::perturb);
  RngStream anchor_rng = rng.split(streams::anchor);

  const bool online = p.mode() == OracleMode::online;
  const std::uint64_t n = p.num_components();
  const std::uint64_t m = cfg.epoch_len;
  SfoCounter& sfo = out.sfo;

  auto anchor_gradient = [&](const Vector& at) {
    return online ? large_batch_gradient(p, at, cfg.batch, anchor_rng, sfo)
                  : full_gradient(p, at, sfo);
  };
  auto push = [&](std::uint64_t t, double f, std::optional<double> g, TraceEvent ev) {
    out.trace.push_back(TraceRecord{t, f, g, sfo.raw, ev});
  };
  bool warned_box = false;
  auto check_box = [&](const Vector& at, std::uint64_t t) {
    if (!warned_box && !p.in_box(at)) {
      warned_box = true;
      std::ostringstream os;
      os << "iterate left the declared domain box at iteration " << t
         << "; declared smoothness constants may not hold";
      out.warnings.push_back(os.str());
    }
  };
  auto abort_nonfinite = [&](std::uint64_t t) {
    std::ostringstream os;
    os << "non-finite oracle output at iteration " << t;
    out.warnings.push_back(os.str());
    out.termination = Termination::nonfinite;
  };

  Vector x = x0;
  std::uint64_t t = 0;
  bool super_epoch = false;
  Vector x_tilde;
  double f_tilde = 0.0;
  std::uint64_t t_init = 0;
  SuperEpochLog* log = nullptr;

  for (std::uint64_t s = 0;; ++s) {
    if (s >= cfg.max_epochs) {
      out.termination = Termination::max_epochs;
      break;
    }
    if (sfo.raw >= cfg.sfo_budget) {
      out.termination = Termination::budget_exhausted;
      break;
    }
    out.epochs = s + 1;

    Vector v = anchor_gradient(x);
    if (!all_finite(v)) {
      abort_nonfinite(t);
      break;
    }
    double gnorm = v.norm();

    if (cfg.stop_at_fosp) {
      const double measured = online ? p.exact_grad(x).norm() : gnorm;
      if (measured <= cfg.eps) {
        out.sfo_to_fosp = sfo.raw;
        out.iter_to_fosp = t;
        push(t, p.value(x), gnorm, TraceEvent::epoch_start);
        out.termination = Termination::fosp_reached;
        break;
      }
    }

    if (!super_epoch && cfg.perturbation_enabled() && gnorm <= cfg.g_thres) {
      out.sosp_candidates.emplace_back(t, x);
      if (hooks.sosp_check && hooks.sosp_check(x)) {
        push(t, p.value(x), gnorm, TraceEvent::epoch_start);
        out.termination = Termination::sosp_certified;
        break;
      }
      super_epoch = true;
      x_tilde = x;
      t_init = t;
      f_tilde = p.value(x_tilde);
      const Vector xi = sample_uniform_ball(perturb_rng, p.dim(), cfg.perturb_radius);
      x = x_tilde + xi;
      const double f0 = p.value(x);
      out.perturbations.push_back(
          PerturbationRecord{t, f_tilde, f0, gnorm, cfg.perturb_radius, xi.norm()});
      push(t, f0, gnorm, TraceEvent::perturbation);
      check_box(x, t);
      if (hooks.record_super_epochs) {
        out.super_epochs.push_back(SuperEpochLog{t, x_tilde, {x}, {f0}, TraceEvent::none});
        log = &out.super_epochs.back();
      }
      v = anchor_gradient(x);
      if (!all_finite(v)) {
        abort_nonfinite(t);
        break;
      }
      gnorm = v.norm();
    }
    push(t, p.value(x), gnorm, TraceEvent::epoch_start);

    RecursiveState est{std::move(v), x};
    bool halt = false;
    for (std::uint64_t k = 1; k <= m; ++k) {
      ++t;
      Vector x_new = x - cfg.eta * est.v;
      if (!all_finite(x_new)) {
        abort_nonfinite(t);
        halt = true;
        break;
      }
      const IndexMultiset batch = sample_minibatch(batch_rng, n, cfg.minibatch, cfg.with_replacement);
      if (hooks.on_minibatch) hooks.on_minibatch(batch);
      recursive_step(p, est, x_new, batch, sfo);
      x = std::move(x_new);
      const double f = p.value(x);
      if (!all_finite(est.v) || !std::isfinite(f)) {
        abort_nonfinite(t);
        halt = true;
        break;
      }
      check_box(x, t);
      out.iterations = t;
      if (log) {
        log->iterates.push_back(x);
        log->f_values.push_back(f);
      }

      TraceEvent ev = TraceEvent::none;
      bool end_epoch = false;
      if (super_epoch) {
        if (f_tilde - f >= cfg.f_thres) {
          ev = TraceEvent::super_epoch_end_fdecrease;
        } else if (t - t_init >= cfg.super_epoch_len) {
          ev = TraceEvent::super_epoch_end_timeout;
        }
        if (ev != TraceEvent::none) {
          super_epoch = false;
          end_epoch = true;
          if (log) log->exit = ev;
          log = nullptr;
        }
      } else if (random_stop_decision(stop_rng, k, m)) {
        ev = TraceEvent::random_stop;
        end_epoch = true;
      }
      push(t, f, std::nullopt, ev);
      if (sfo.raw >= cfg.sfo_budget) {
        out.termination = Termination::budget_exhausted;
        halt = true;
        break;
      }
      if (end_epoch) break;
    }
    if (halt) break;
  }
  out.final_x = x;
  return out;
}

}  // namespace ssrgd

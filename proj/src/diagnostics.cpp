#include "ssrgd/diagnostics.hpp"

#include "ssrgd/estimators.hpp"
#include "ssrgd/kernels.hpp"
#include "ssrgd/spectral.hpp"

#include <cmath>

namespace ssrgd::diag {

using nlohmann::json;

std::pair<double, double> Frequency::interval() const {
  if (trials == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nt = static_cast<double>(trials);
  const double ph = rate();
  const double denom = 1.0 + z * z / nt;
  const double centre = (ph + z * z / (2.0 * nt)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / nt + z * z / (4.0 * nt * nt)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::uint64_t fnv1a(std::uint64_t h, std::span<const SampleId> ids) {
  for (SampleId id : ids) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (id >> (8 * byte)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

bool VarianceReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

namespace {

void require_trajectory(const Problem& p, std::span<const Vector> traj) {
  if (traj.size() < 2) throw Error(ErrorKind::invalid_input, "trajectory needs at least two points");
  if (p.mode() != OracleMode::finite_sum) {
    throw Error(ErrorKind::invalid_input, "variance verification needs a finite-sum problem");
  }
  for (const auto& x : traj) {
    if (static_cast<std::size_t>(x.size()) != p.dim()) {
      throw Error(ErrorKind::invalid_input, "trajectory point has the wrong dimension");
    }
  }
}

std::vector<double> cumulative_bounds(const Problem& p, std::span<const Vector> traj, std::uint64_t b) {
  const double L = p.smoothness().lipschitz_grad;
  std::vector<double> bounds(traj.size(), 0.0);
  double acc = 0.0;
  for (std::size_t t = 1; t < traj.size(); ++t) {
    acc += (traj[t] - traj[t - 1]).squaredNorm();
    bounds[t] = L * L / static_cast<double>(b) * acc;
  }
  return bounds;
}

// Replications are grouped in fixed-size blocks so the reduction order does
// not depend on the thread count.
constexpr std::uint64_t kRepBlock = 512;

struct MomentBlock {
  std::vector<double> sum, sumsq;
  std::vector<Vector> vsum;
};

// Enumerates every b-tuple of [0, n) in lexicographic order.
template <class F>
void for_each_tuple(std::uint64_t n, std::uint64_t b, F&& visit) {
  IndexMultiset idx(b, 0);
  while (true) {
    visit(std::span<const SampleId>(idx));
    std::uint64_t pos = 0;
    while (pos < b && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == b) return;
  }
}

double ipow(std::uint64_t base, std::uint64_t e) {
  double r = 1.0;
  for (std::uint64_t k = 0; k < e; ++k) r *= static_cast<double>(base);
  return r;
}

}  // namespace

VarianceReport verify_variance_bound(const Problem& p, std::span<const Vector> trajectory,
                                     std::uint64_t b, std::uint64_t replications, RngStream& rng) {
  require_trajectory(p, trajectory);
  if (b == 0 || replications < 2) throw Error(ErrorKind::invalid_input, "need b >= 1 and >= 2 replications");
  const std::size_t T = trajectory.size();
  const auto d = static_cast<Eigen::Index>(p.dim());
  const std::uint64_t n = p.num_components();
  std::vector<Vector> grads;
  for (const auto& x : trajectory) grads.push_back(p.exact_grad(x));
  const std::vector<double> bounds = cumulative_bounds(p, trajectory, b);

  const auto blocks = static_cast<std::int64_t>((replications + kRepBlock - 1) / kRepBlock);
  std::vector<MomentBlock> parts(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    MomentBlock& mb = parts[static_cast<std::size_t>(blk)];
    mb.sum.assign(T, 0.0);
    mb.sumsq.assign(T, 0.0);
    mb.vsum.assign(T, Vector::Zero(d));
    const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kRepBlock;
    const std::uint64_t hi = std::min(replications, lo + kRepBlock);
    Vector delta;
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream r = rng.split(rep);
      Vector v = grads[0];
      mb.vsum[0] += v;
      for (std::size_t t = 1; t < T; ++t) {
        const IndexMultiset batch = sample_minibatch(r, n, b);
        kernels::serial::mean_grad_diff(p, batch, trajectory[t], trajectory[t - 1], delta);
        v += delta;
        const double e = (v - grads[t]).squaredNorm();
        mb.sum[t] += e;
        mb.sumsq[t] += e * e;
        mb.vsum[t] += v;
      }
    }
  }
  VarianceReport rep;
  rep.replications = replications;
  const double R = static_cast<double>(replications);
  for (std::size_t t = 0; t < T; ++t) {
    double s = 0.0, s2 = 0.0;
    Vector vs = Vector::Zero(d);
    for (const auto& mb : parts) {
      s += mb.sum[t];
      s2 += mb.sumsq[t];
      vs += mb.vsum[t];
    }
    VarianceRow row;
    row.t = t;
    row.estimate = s / R;
    const double var = std::max(0.0, (s2 / R - row.estimate * row.estimate) * R / (R - 1.0));
    row.std_error = std::sqrt(var / R);
    row.bound = bounds[t];
    row.bias = (vs / R - grads[t]).norm();
    row.pass = row.estimate <= row.bound + 3.0 * row.std_error + 1e-12 * (1.0 + row.bound);
    rep.rows.push_back(row);
  }
  return rep;
}

VarianceReport verify_variance_bound_exact(const Problem& p, std::span<const Vector> trajectory,
                                           std::uint64_t b) {
  require_trajectory(p, trajectory);
  if (b == 0) throw Error(ErrorKind::invalid_input, "need b >= 1");
  const std::size_t T = trajectory.size();
  const std::uint64_t n = p.num_components();
  if (std::pow(static_cast<double>(n), static_cast<double>(b * (T - 1))) > 5e7) {
    throw Error(ErrorKind::invalid_input, "exhaustive enumeration too large; use Monte Carlo");
  }
  const auto d = static_cast<Eigen::Index>(p.dim());
  std::vector<Vector> grads;
  for (const auto& x : trajectory) grads.push_back(p.exact_grad(x));
  const std::vector<double> bounds = cumulative_bounds(p, trajectory, b);
  std::vector<double> err(T, 0.0);
  std::vector<Vector> vmean(T, Vector::Zero(d));
  vmean[0] = grads[0];
  const double w_level = 1.0 / ipow(n, b);

  // Depth-first over steps; weight is the probability of the tuple prefix.
  auto recurse = [&](auto&& self, std::size_t t, const Vector& v, double weight) -> void {
    if (t == T) return;
    Vector delta;
    for_each_tuple(n, b, [&](std::span<const SampleId> ids) {
      kernels::serial::mean_grad_diff(p, ids, trajectory[t], trajectory[t - 1], delta);
      const Vector next = v + delta;
      const double w = weight * w_level;
      err[t] += w * (next - grads[t]).squaredNorm();
      vmean[t] += w * next;
      self(self, t + 1, next, w);
    });
  };
  recurse(recurse, 1, grads[0], 1.0);

  VarianceReport rep;
  rep.exhaustive = true;
  for (std::size_t t = 0; t < T; ++t) {
    VarianceRow row;
    row.t = t;
    row.estimate = err[t];
    row.bound = bounds[t];
    row.bias = (vmean[t] - grads[t]).norm();
    row.pass = row.estimate <= row.bound * (1.0 + 1e-12) + 1e-12;
    rep.rows.push_back(row);
  }
  return rep;
}

SvrgVarianceReport svrg_variance_exact(const Problem& p, const Vector& anchor, const Vector& x,
                                       std::uint64_t b) {
  if (p.mode() != OracleMode::finite_sum || b == 0) {
    throw Error(ErrorKind::invalid_input, "SVRG enumeration needs a finite-sum problem and b >= 1");
  }
  const std::uint64_t n = p.num_components();
  if (ipow(n, b) > 5e7) throw Error(ErrorKind::invalid_input, "exhaustive enumeration too large");
  const Vector g_anchor = p.exact_grad(anchor);
  const Vector g = p.exact_grad(x);
  const double w = 1.0 / ipow(n, b);
  SvrgVarianceReport out;
  Vector mean = Vector::Zero(g.size());
  SfoCounter scratch;
  const std::optional<SvrgSnapshot> snap = SvrgSnapshot{anchor, g_anchor};
  for_each_tuple(n, b, [&](std::span<const SampleId> ids) {
    const Vector v = svrg_step(p, snap, x, ids, scratch);
    out.variance += w * (v - g).squaredNorm();
    mean += w * v;
  });
  const double L = p.smoothness().lipschitz_grad;
  out.bound = L * L / static_cast<double>(b) * (x - anchor).squaredNorm();
  out.bias = (mean - g).norm();
  return out;
}

EpochDecreaseReport verify_epoch_decrease(const Problem& p, const RunConfig& cfg,
                                          const Vector& x_start, std::uint64_t epochs,
                                          RngStream& rng) {
  if (p.mode() != OracleMode::finite_sum) throw Error(ErrorKind::invalid_config, "epoch decrease needs a finite-sum problem");
  const double L = p.smoothness().lipschitz_grad;
  if (cfg.minibatch < cfg.epoch_len) throw Error(ErrorKind::invalid_config, "epoch decrease check needs b >= m");
  if (!(cfg.eta > 0.0) || cfg.eta * L > kGoldenStep * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_config, "epoch decrease check needs 0 < eta <= (sqrt(5)-1)/(2L)");
  }
  if (epochs < 2) throw Error(ErrorKind::invalid_config, "need at least two epochs");
  const std::uint64_t n = p.num_components();
  const std::uint64_t m = cfg.epoch_len;
  const double f_start = p.value(x_start);
  const Vector g_start = p.exact_grad(x_start);

  struct Part {
    double f_end = 0, gsum = 0, slack = 0, slack2 = 0, svrg_m = 0, svrg_m2 = 0;
  };
  const auto blocks = static_cast<std::int64_t>((epochs + kRepBlock - 1) / kRepBlock);
  std::vector<Part> parts(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    Part& part = parts[static_cast<std::size_t>(blk)];
    const std::uint64_t lo = static_cast<std::uint64_t>(blk) * kRepBlock;
    const std::uint64_t hi = std::min(epochs, lo + kRepBlock);
    SfoCounter scratch;
    Vector delta;
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream r = rng.split(rep);
      Vector x = x_start;
      Vector v = g_start;
      double gsum = 0.0;
      for (std::uint64_t k = 1; k <= m; ++k) {
        gsum += p.exact_grad(x).squaredNorm();
        const Vector x_new = x - cfg.eta * v;
        const IndexMultiset batch = sample_minibatch(r, n, cfg.minibatch);
        kernels::serial::mean_grad_diff(p, batch, x_new, x, delta);
        v += delta;
        x = x_new;
      }
      const double f_end = p.value(x);
      const double slack = f_end - f_start + 0.5 * cfg.eta * gsum;
      part.f_end += f_end;
      part.gsum += gsum;
      part.slack += slack;
      part.slack2 += slack * slack;

      // Snapshot estimator with b = m and b = m^2 on the same start.
      for (int variant = 0; variant < 2; ++variant) {
        RngStream rs = r.split(100 + static_cast<std::uint64_t>(variant));
        const std::uint64_t bb = variant == 0 ? m : m * m;
        const std::optional<SvrgSnapshot> snap = SvrgSnapshot{x_start, g_start};
        Vector xs = x_start;
        for (std::uint64_t k = 1; k <= m; ++k) {
          const IndexMultiset batch = sample_minibatch(rs, n, bb);
          const Vector vs = svrg_step(p, snap, xs, batch, scratch);
          xs -= cfg.eta * vs;
        }
        (variant == 0 ? part.svrg_m : part.svrg_m2) += f_start - p.value(xs);
      }
    }
  }
  Part total;
  for (const auto& part : parts) {
    total.f_end += part.f_end;
    total.gsum += part.gsum;
    total.slack += part.slack;
    total.slack2 += part.slack2;
    total.svrg_m += part.svrg_m;
    total.svrg_m2 += part.svrg_m2;
  }
  const double R = static_cast<double>(epochs);
  EpochDecreaseReport rep;
  rep.replications = epochs;
  rep.f_start = f_start;
  rep.mean_f_end = total.f_end / R;
  rep.mean_grad_sq_sum = total.gsum / R;
  rep.mean_slack = total.slack / R;
  const double var = std::max(0.0, (total.slack2 / R - rep.mean_slack * rep.mean_slack) * R / (R - 1.0));
  rep.slack_std_error = std::sqrt(var / R);
  rep.pass = rep.mean_slack <= 3.0 * rep.slack_std_error + 1e-12 * (1.0 + std::abs(f_start));
  rep.svrg_decrease_b_m = total.svrg_m / R;
  rep.svrg_decrease_b_m2 = total.svrg_m2 / R;
  rep.svrg_gap = rep.svrg_decrease_b_m2 - rep.svrg_decrease_b_m;
  return rep;
}

CoupledParams CoupledParams::escape_regime(const Problem& p, const RunConfig& cfg) {
  const Smoothness s = p.smoothness();
  if (!(s.lipschitz_hess > 0.0) || !(cfg.delta > 0.0) || !(cfg.eta > 0.0)) {
    throw Error(ErrorKind::invalid_config, "escape regime needs rho > 0, delta > 0 and eta > 0");
  }
  CoupledParams c;
  c.delta = cfg.delta;
  c.f_thres = cfg.f_thres;
  c.c1 = 20.0 / (cfg.eta * s.lipschitz_grad);
  c.radius = cfg.delta / (2.0 * c.c1 * s.lipschitz_hess);
  const double d = static_cast<double>(p.dim());
  const double arg = 8.0 * cfg.delta * std::sqrt(d) / (c.c1 * s.lipschitz_hess * c.zeta_prime * c.radius);
  c.horizon = static_cast<std::uint64_t>(std::ceil(2.0 * std::log(arg) / (cfg.eta * cfg.delta)));
  return c;
}

CoupledRun run_coupled_pair(const Problem& p, const Vector& x_tilde, const Vector& e1,
                            const RunConfig& cfg, const CoupledParams& params,
                            std::uint64_t pair_id, bool keep_trajectories) {
  const Smoothness s = p.smoothness();
  const double c1 = params.c1 > 0.0 ? params.c1 : 20.0 / (cfg.eta * s.lipschitz_grad);
  const double threshold = params.delta / (c1 * s.lipschitz_hess);
  const double r = params.radius;
  const std::uint64_t n = p.num_components();
  const std::uint64_t m = cfg.epoch_len;

  CoupledRun run;
  run.e1 = e1;
  run.r0 = params.zeta_prime * r / std::sqrt(static_cast<double>(p.dim()));
  RngStream pair_rng(params.seed, pair_id);
  RngStream ball_rng = pair_rng.split(streams::perturb);
  Vector x0 = x_tilde + sample_uniform_ball(ball_rng, p.dim(), r);
  Vector x0p = x0 - run.r0 * e1;
  if ((x0p - x_tilde).norm() > r) {
    // Shift the pair the other way so both starts stay in the ball.
    x0p = x0;
    x0 = x0p + run.r0 * e1;
  }
  // Both trajectories replay the same minibatch stream.
  RngStream mb = pair_rng.split(streams::minibatch);
  RngStream mb_prime = pair_rng.split(streams::minibatch);

  const double f0 = p.value(x0), f0p = p.value(x0p);
  Vector x = x0, xp = x0p;
  RecursiveState st{Vector(), x}, stp{Vector(), xp};
  SfoCounter scratch;
  run.digest = run.digest_prime = kFnvOffset;
  run.w_norms.push_back((x - xp).norm());
  if (keep_trajectories) {
    run.x_traj.push_back(x);
    run.x_prime_traj.push_back(xp);
  }
  for (std::uint64_t t = 0; t < params.horizon; ++t) {
    if (t % m == 0) {
      st.v = full_gradient(p, x, scratch);
      stp.v = full_gradient(p, xp, scratch);
    }
    const Vector x_new = x - cfg.eta * st.v;
    const Vector xp_new = xp - cfg.eta * stp.v;
    const IndexMultiset batch = sample_minibatch(mb, n, cfg.minibatch, cfg.with_replacement);
    const IndexMultiset batch_p = sample_minibatch(mb_prime, n, cfg.minibatch, cfg.with_replacement);
    run.digest = fnv1a(run.digest, batch);
    run.digest_prime = fnv1a(run.digest_prime, batch_p);
    recursive_step(p, st, x_new, batch, scratch);
    recursive_step(p, stp, xp_new, batch_p, scratch);
    x = x_new;
    xp = xp_new;
    run.w_norms.push_back((x - xp).norm());
    if (keep_trajectories) {
      run.x_traj.push_back(x);
      run.x_prime_traj.push_back(xp);
    }
    const double dist = std::max((x - x0).norm(), (xp - x0p).norm());
    run.max_distance = std::max(run.max_distance, dist);
    run.max_f_decrease = std::max({run.max_f_decrease, f0 - p.value(x), f0p - p.value(xp)});
    if (!run.escape_iter && dist >= threshold) run.escape_iter = t + 1;
  }
  return run;
}

CoupledStats run_coupled_experiment(const ProblemInstance& inst, const Vector& x_tilde,
                                    const RunConfig& cfg, std::uint64_t pairs,
                                    const CoupledParams& params) {
  const Problem& p = *inst.problem;
  if (p.mode() != OracleMode::finite_sum) throw Error(ErrorKind::invalid_input, "coupled experiment needs a finite-sum problem");
  if (pairs == 0 || params.horizon == 0 || !(params.radius > 0.0) || !(params.delta > 0.0)) {
    throw Error(ErrorKind::invalid_input, "coupled experiment needs pairs, horizon, radius and delta > 0");
  }
  const auto [lambda, e1] = min_eigenpair_dense(p, x_tilde);
  if (!params.control) {
    const double g = p.exact_grad(x_tilde).norm();
    if (!(lambda <= -params.delta) || g > 1e-8) {
      throw Error(ErrorKind::invalid_input, "x_tilde is not a saddle with lambda_min <= -delta");
    }
  }
  const Smoothness s = p.smoothness();
  const double c1 = params.c1 > 0.0 ? params.c1 : 20.0 / (cfg.eta * s.lipschitz_grad);

  std::vector<CoupledRun> runs(pairs);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(pairs); ++k) {
    runs[static_cast<std::size_t>(k)] =
        run_coupled_pair(p, x_tilde, e1, cfg, params, static_cast<std::uint64_t>(k));
  }
  CoupledStats st;
  st.escape_distance = params.delta / (c1 * s.lipschitz_hess);
  st.lambda_min = lambda;
  st.horizon = params.horizon;
  for (const auto& run : runs) {
    st.r0 = run.r0;
    st.escape.trials++;
    st.f_decrease.trials++;
    if (run.escape_iter) st.escape.hits++;
    if (run.max_f_decrease >= 2.0 * params.f_thres) st.f_decrease.hits++;
    if (run.digest != run.digest_prime) st.coupling_faithful = false;
    if (std::abs(run.w_norms.front() - run.r0) > 1e-12 * std::max(1.0, run.r0)) st.w0_exact = false;
  }
  return st;
}

bool localization_holds(const SuperEpochLog& log, double L, double c_prime, LocalizationReport* acc) {
  if (log.iterates.empty()) return true;
  const Vector& x0 = log.iterates.front();
  const double f0 = log.f_values.front();
  bool ok = true;
  for (std::size_t t = 1; t < log.iterates.size(); ++t) {
    const double drop = f0 - log.f_values[t];
    if (drop < 0.0) {
      if (acc) acc->increase_events++;
      continue;
    }
    const double dist = (log.iterates[t] - x0).norm();
    const double bound = std::sqrt(4.0 * static_cast<double>(t) * drop / (c_prime * L));
    if (acc) {
      acc->steps_checked++;
      acc->min_margin = std::min(acc->min_margin, bound - dist);
    }
    if (dist > bound * (1.0 + 1e-12) + 1e-15) ok = false;
  }
  return ok;
}

LocalizationReport verify_localization(std::span<const SuperEpochLog> epochs, const Problem& p,
                                       const RunConfig& cfg, double c_prime) {
  const double L = p.smoothness().lipschitz_grad;
  if (!(c_prime > 0.0)) throw Error(ErrorKind::invalid_config, "C' must be > 0");
  if (cfg.minibatch < cfg.epoch_len) throw Error(ErrorKind::invalid_config, "localization needs b >= m");
  if (cfg.eta > 1.0 / (2.0 * c_prime * L) * (1.0 + 1e-12)) {
    throw Error(ErrorKind::invalid_config, "localization needs eta <= 1/(2 C' L)");
  }
  LocalizationReport rep;
  for (const auto& log : epochs) {
    rep.epochs.trials++;
    if (localization_holds(log, L, c_prime, &rep)) rep.epochs.hits++;
  }
  return rep;
}

namespace {

json freq_json(const Frequency& f) {
  const auto [lo, hi] = f.interval();
  return json{{"hits", f.hits}, {"trials", f.trials}, {"rate", f.rate()}, {"ci95", {lo, hi}}};
}

}  // namespace

json to_json(const VarianceReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"t", row.t}, {"estimate", row.estimate}, {"bound", row.bound},
                    {"std_error", row.std_error}, {"bias", row.bias}, {"pass", row.pass}});
  }
  return json{{"kind", "variance_bound"}, {"exhaustive", r.exhaustive},
              {"replications", r.replications}, {"all_pass", r.all_pass()}, {"rows", rows}};
}

json to_json(const EpochDecreaseReport& r) {
  return json{{"kind", "epoch_decrease"},
              {"replications", r.replications},
              {"f_start", r.f_start},
              {"mean_f_end", r.mean_f_end},
              {"mean_grad_sq_sum", r.mean_grad_sq_sum},
              {"mean_slack", r.mean_slack},
              {"slack_std_error", r.slack_std_error},
              {"pass", r.pass},
              {"svrg_decrease_b_m", r.svrg_decrease_b_m},
              {"svrg_decrease_b_m2", r.svrg_decrease_b_m2},
              {"svrg_gap", r.svrg_gap}};
}

json to_json(const CoupledStats& s) {
  return json{{"kind", "coupled"},
              {"escape", freq_json(s.escape)},
              {"f_decrease", freq_json(s.f_decrease)},
              {"escape_distance", s.escape_distance},
              {"r0", s.r0},
              {"lambda_min", s.lambda_min},
              {"horizon", s.horizon},
              {"coupling_faithful", s.coupling_faithful},
              {"w0_exact", s.w0_exact}};
}

json to_json(const LocalizationReport& r) {
  return json{{"kind", "localization"},
              {"epochs", freq_json(r.epochs)},
              {"steps_checked", r.steps_checked},
              {"increase_events", r.increase_events},
              {"min_margin", std::isfinite(r.min_margin) ? json(r.min_margin) : json(nullptr)}};
}

}  // namespace ssrgd::diag

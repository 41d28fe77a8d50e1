// Command-line front end: run plans, fit scaling exponents, certify
// checkpoints and run the empirical diagnostics.
//
// Exit codes: 0 success, 1 a cell or check failed, 2 configuration or usage error.
#include "ssrgd/diagnostics.hpp"
#include "ssrgd/harness/plan.hpp"
#include "ssrgd/harness/runner.hpp"
#include "ssrgd/harness/scaling.hpp"
#include "ssrgd/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;
using namespace ssrgd;
using namespace ssrgd::harness;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

bool is_config_error(const Error& e) {
  return e.kind() == ErrorKind::invalid_config || e.kind() == ErrorKind::parse_error ||
         e.kind() == ErrorKind::io_error || e.kind() == ErrorKind::invalid_dataset;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, path + ": " + e.what());
  }
}

const ProblemSpec& pick_problem(const ExperimentPlan& plan, const std::string& name) {
  if (name.empty()) return plan.problems.front();
  for (const auto& p : plan.problems) {
    if (p.name == name) return p;
  }
  std::vector<std::string> names;
  for (const auto& p : plan.problems) names.push_back(p.name);
  throw Error(ErrorKind::invalid_config,
              "no problem named '" + name + "' (nearest: '" + nearest_key(name, names) + "')");
}

int cmd_run(const std::string& config, unsigned workers) {
  const ExperimentPlan plan = parse_config(config);
  const RunSummary s = run_plan(plan, workers);
  for (const auto& c : s.cells) {
    std::cout << c.cell.run_id << "  " << plan.problems[c.cell.problem].name << "/"
              << plan.optimizers[c.cell.optimizer].name << " seed=" << c.cell.seed
              << (c.ok ? "  ok  " : "  FAILED  ") << c.termination << " sfo=" << c.sfo_raw;
    if (!c.ok) std::cout << "  (" << c.error << ")";
    std::cout << "\n";
  }
  std::cout << s.cells.size() << " cells, " << s.failed << " failed, total_sfo="
            << s.aggregate["total_sfo"] << ", " << s.plot_files.size() << " plots -> " << plan.out_dir
            << "\n";
  return s.failed ? kFailed : kOk;
}

int cmd_scaling(const std::string& aggregate, const std::string& axis_name) {
  const SweepAxis axis = axis_name == "eps" ? SweepAxis::eps : SweepAxis::n;
  const json agg = read_json(aggregate);
  json out = json::array();
  for (const auto& fit : scaling_report(agg, axis)) out.push_back(to_json(fit));
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int cmd_certify(const std::string& config, const std::string& checkpoint, const std::string& problem,
                std::optional<double> eps, std::optional<double> delta, std::uint64_t power_iters) {
  const ExperimentPlan plan = parse_config(config);
  const ProblemSpec& spec = pick_problem(plan, problem);
  const json ck = read_json(checkpoint);
  const json* xs = ck.contains("final_x") ? &ck["final_x"] : ck.contains("x") ? &ck["x"] : nullptr;
  if (!xs || !xs->is_array()) {
    throw Error(ErrorKind::invalid_input, "checkpoint needs a 'final_x' or 'x' array");
  }
  std::optional<std::uint64_t> n;
  if (ck.contains("n") && ck["n"].is_number_unsigned() && ck["n"].get<std::uint64_t>() > 0) {
    n = ck["n"].get<std::uint64_t>();
  }
  const ProblemInstance inst = build_problem(spec, n);
  const Problem& p = *inst.problem;
  if (xs->size() != p.dim()) {
    throw Error(ErrorKind::invalid_input, "checkpoint dimension " + std::to_string(xs->size()) +
                                              " does not match problem dimension " +
                                              std::to_string(p.dim()));
  }
  Vector x(static_cast<Eigen::Index>(p.dim()));
  for (std::size_t j = 0; j < xs->size(); ++j) x[static_cast<Eigen::Index>(j)] = (*xs)[j].get<double>();
  const double e = eps.value_or(ck.value("eps", 0.05));
  const double rho = p.smoothness().lipschitz_hess;
  const double d = delta.value_or(ck.contains("delta") ? ck["delta"].get<double>()
                                                       : (rho > 0.0 ? std::sqrt(rho * e) : e));
  CertifyOptions opts;
  opts.power_iters = power_iters;
  const Certificate c = certify(p, x, e, d, opts);
  std::cout << json{{"eps", e},
                    {"delta", d},
                    {"grad_norm", c.grad_norm},
                    {"lambda_min_est", c.lambda_min_est},
                    {"lambda_min_ci", c.lambda_min_ci},
                    {"is_fosp", c.is_fosp},
                    {"is_sosp", c.is_sosp},
                    {"method", to_string(c.method)}}
                   .dump(2)
            << "\n";
  return kOk;
}

struct DiagnoseArgs {
  std::string what;
  std::string config;
  std::string problem;
  std::uint64_t seed = 0;
  double eps = 0.05;
  std::optional<double> delta;
  std::uint64_t steps = 3;
  std::uint64_t minibatch = 1;
  std::uint64_t reps = 20000;
  bool exact = false;
  double start_radius = 0.5;
  std::uint64_t epochs = 2000;
  std::uint64_t pairs = 100;
  std::uint64_t super_epochs = 50;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const ExperimentPlan plan = parse_config(a.config);
  const ProblemSpec& spec = pick_problem(plan, a.problem);
  const ProblemInstance inst = build_problem(spec);
  const Problem& p = *inst.problem;
  const double L = p.smoothness().lipschitz_grad;
  const double rho = p.smoothness().lipschitz_hess;
  const double delta = a.delta.value_or(rho > 0.0 ? std::sqrt(rho * a.eps) : a.eps);
  RngStream rng = seeded_rng(a.seed, 0xd1a6);
  json out;
  bool pass = true;
  // Generator start points can be stationary (the planted saddle sits at the
  // origin), which would make the variance and decrease checks vacuous.
  RngStream offset_rng = rng.split(1);
  const Vector start = inst.x0 + sample_uniform_ball(offset_rng, p.dim(), a.start_radius);

  if (a.what == "variance") {
    std::vector<Vector> traj{start};
    for (std::uint64_t t = 0; t < a.steps; ++t) {
      traj.push_back(traj.back() - (kGoldenStep / L) * p.exact_grad(traj.back()));
    }
    const diag::VarianceReport r = a.exact ? diag::verify_variance_bound_exact(p, traj, a.minibatch)
                                           : diag::verify_variance_bound(p, traj, a.minibatch, a.reps, rng);
    out = diag::to_json(r);
    pass = r.all_pass();
  } else if (a.what == "epoch-decrease") {
    const RunConfig cfg = derive_config_first_order(p, a.eps);
    const diag::EpochDecreaseReport r = diag::verify_epoch_decrease(p, cfg, start, a.epochs, rng);
    out = diag::to_json(r);
    pass = r.pass;
  } else if (a.what == "coupled") {
    const RunConfig cfg = derive_config_second_order(p, a.eps, delta);
    diag::CoupledParams params = diag::CoupledParams::escape_regime(p, cfg);
    params.seed = a.seed;
    Vector x_tilde = Vector::Zero(static_cast<Eigen::Index>(p.dim()));
    if (!inst.saddles.empty()) {
      x_tilde = inst.saddles.front().x;
    } else {
      params.control = true;
    }
    const diag::CoupledStats s = diag::run_coupled_experiment(inst, x_tilde, cfg, a.pairs, params);
    out = diag::to_json(s);
    out["control"] = params.control;
    pass = s.coupling_faithful && s.w0_exact;
  } else if (a.what == "localization") {
    if (inst.saddles.empty()) throw Error(ErrorKind::invalid_config, "localization needs a planted saddle");
    RunConfig cfg = derive_config_second_order(p, a.eps, delta);
    cfg.eta = 1.0 / (2.0 * L);
    cfg.super_epoch_len = static_cast<std::uint64_t>(std::ceil(1.0 / (cfg.eta * delta)));
    cfg.stop_at_fosp = false;
    RunHooks hooks;
    hooks.record_super_epochs = true;
    // Restart at the saddle until enough super epochs are logged.
    std::vector<SuperEpochLog> logs;
    for (std::uint64_t run = 0; logs.size() < a.super_epochs && run < 10 * a.super_epochs; ++run) {
      RngStream r = rng.split(run);
      const RunOutcome o = run_ssrgd(p, cfg, inst.saddles.front().x, r, hooks);
      for (const auto& log : o.super_epochs) {
        if (logs.size() < a.super_epochs) logs.push_back(log);
      }
    }
    const diag::LocalizationReport r = diag::verify_localization(logs, p, cfg, 1.0);
    out = diag::to_json(r);
    pass = r.epochs.trials > 0;
  } else {
    throw Error(ErrorKind::invalid_config, "unknown diagnostic '" + a.what + "'");
  }
  std::cout << out.dump(2) << "\n";
  return pass ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbed stochastic recursive gradient descent experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run every cell of an experiment plan");
  std::string run_config;
  unsigned workers = 0;
  run->add_option("config", run_config, "Plan file")->required();
  run->add_option("--workers", workers, "Worker threads (default: SSRGD_WORKERS or all cores)");

  auto* scaling = app.add_subcommand("scaling", "Fit SFO scaling exponents from an aggregate");
  std::string aggregate, axis = "eps";
  scaling->add_option("aggregate", aggregate, "aggregate.json written by run")->required();
  scaling->add_option("--axis", axis, "eps or n")->check(CLI::IsMember({"eps", "n"}));

  auto* cert = app.add_subcommand("certify", "Check second-order stationarity of a checkpoint");
  std::string cert_config, checkpoint, cert_problem;
  std::optional<double> cert_eps, cert_delta;
  std::uint64_t power_iters = 1000;
  cert->add_option("config", cert_config, "Plan file holding the problem section")->required();
  cert->add_option("checkpoint", checkpoint, "JSON with final_x (a cell summary) or x")->required();
  cert->add_option("--problem", cert_problem, "Problem section name (default: first)");
  cert->add_option("--eps", cert_eps, "Gradient tolerance");
  cert->add_option("--delta", cert_delta, "Curvature tolerance");
  cert->add_option("--power-iters", power_iters, "Power iterations when d exceeds the dense cap");

  auto* diagnose = app.add_subcommand("diagnose", "Empirical checks of the analysis bounds");
  DiagnoseArgs da;
  diagnose->add_option("what", da.what, "variance | epoch-decrease | coupled | localization")
      ->required()
      ->check(CLI::IsMember({"variance", "epoch-decrease", "coupled", "localization"}));
  diagnose->add_option("config", da.config, "Plan file holding the problem section")->required();
  diagnose->add_option("--problem", da.problem, "Problem section name (default: first)");
  diagnose->add_option("--seed", da.seed, "Seed");
  diagnose->add_option("--eps", da.eps, "Gradient tolerance used to derive parameters");
  diagnose->add_option("--delta", da.delta, "Curvature tolerance");
  diagnose->add_option("--steps", da.steps, "variance: trajectory length");
  diagnose->add_option("--minibatch", da.minibatch, "variance: minibatch size");
  diagnose->add_option("--reps", da.reps, "variance: Monte Carlo replications");
  diagnose->add_flag("--exact", da.exact, "variance: enumerate all index tuples");
  diagnose->add_option("--start-radius", da.start_radius,
                       "variance, epoch-decrease: radius of the random offset from the start point")
      ->check(CLI::NonNegativeNumber);
  diagnose->add_option("--epochs", da.epochs, "epoch-decrease: replications");
  diagnose->add_option("--pairs", da.pairs, "coupled: number of pairs");
  diagnose->add_option("--super-epochs", da.super_epochs, "localization: super epochs to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_config, workers);
    if (*scaling) return cmd_scaling(aggregate, axis);
    if (*cert) return cmd_certify(cert_config, checkpoint, cert_problem, cert_eps, cert_delta, power_iters);
    if (*diagnose) return cmd_diagnose(da);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e) ? kConfigError : kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kConfigError;
}

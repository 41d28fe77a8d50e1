#include "ssrgd/harness/runner.hpp"

#include "ssrgd/harness/plots.hpp"
#include "ssrgd/kernels.hpp"
#include "ssrgd/trace.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>
#include <mutex>
#include <thread>

namespace ssrgd::harness {

namespace fs = std::filesystem;
using nlohmann::json;

unsigned worker_count() {
  if (const char* env = std::getenv("SSRGD_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

json cert_json(const std::optional<Certificate>& c) {
  if (!c) return nullptr;
  return json{{"grad_norm", c->grad_norm},     {"lambda_min_est", c->lambda_min_est},
              {"lambda_min_ci", c->lambda_min_ci}, {"is_fosp", c->is_fosp},
              {"is_sosp", c->is_sosp},         {"method", to_string(c->method)}};
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<Certificate> try_certify(const Problem& p, const Vector& x, double eps, double delta,
                                       std::uint64_t seed) {
  if (!p.has_hvp()) return std::nullopt;
  CertifyOptions opts;
  opts.seed = seed;
  return certify(p, x, eps, delta, opts);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io_error, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::io_error, "write failed for '" + path.string() + "'");
}

}  // namespace

CellResult run_cell(const ExperimentPlan& plan, const Cell& cell) {
  const ProblemSpec& ps = plan.problems.at(cell.problem);
  const OptimizerSpec& os = plan.optimizers.at(cell.optimizer);
  CellResult res;
  res.cell = cell;
  RunOutcome outcome;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemInstance inst = build_problem(ps, cell.n);
    const Problem& p = *inst.problem;
    res.num_components = p.mode() == OracleMode::finite_sum ? p.num_components() : 0;
    const Vector x0 = start_point(ps, inst);
    const ResolvedOptimizer ro = resolve_optimizer(os, p, cell.eps, cell.seed);
    res.eps = ro.eps;
    res.delta = ro.delta;
    res.second_order = ro.second_order;

    RunHooks hooks;
    if (ro.second_order && ro.stop_at_sosp && p.has_hvp()) {
      hooks.sosp_check = [&](const Vector& x) {
        return try_certify(p, x, ro.eps, ro.delta, cell.seed).value().is_sosp;
      };
    }
    RngStream rng = seeded_rng(cell.seed, 0);
    outcome = ro.is_ssrgd ? run_ssrgd(p, ro.ssrgd, x0, rng, hooks)
                          : run_baseline(ro.baseline, p, x0, ro.sfo_budget, rng, hooks);
    res.termination = to_string(outcome.termination);
    res.sfo_raw = outcome.sfo.raw;
    res.sfo_nominal = outcome.sfo.nominal;
    res.iterations = outcome.iterations;
    res.sfo_to_fosp = outcome.sfo_to_fosp;
    if (outcome.termination == Termination::nonfinite) {
      res.error = "oracle returned a non-finite value";
    } else {
      res.certificate = try_certify(p, outcome.final_x, ro.eps, ro.delta, cell.seed);
      if (ro.second_order && p.has_hvp()) {
        // First candidate anchor that certifies, located in the trace by iteration.
        for (const auto& [iter, x] : outcome.sosp_candidates) {
          if (!try_certify(p, x, ro.eps, ro.delta, cell.seed)->is_sosp) continue;
          for (const auto& row : outcome.trace) {
            if (row.iter == iter) {
              res.sfo_to_sosp = row.sfo_count;
              break;
            }
          }
          if (res.sfo_to_sosp) break;
        }
        if (!res.sfo_to_sosp && res.certificate && res.certificate->is_sosp) {
          res.sfo_to_sosp = outcome.sfo.raw;
        }
      }
      res.ok = true;
    }
  } catch (const Error& e) {
    res.error = e.what();
  } catch (const std::exception& e) {
    res.error = std::string("unexpected error: ") + e.what();
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json x = json::array();
  for (Eigen::Index j = 0; j < outcome.final_x.size(); ++j) x.push_back(outcome.final_x[j]);
  res.summary = json{
      {"run_id", cell.run_id},
      {"problem", ps.name},
      {"optimizer", os.name},
      {"optimizer_kind", os.kind},
      {"second_order", res.second_order},
      {"seed", cell.seed},
      {"eps", res.eps},
      {"delta", res.delta},
      {"n", res.num_components},
      {"status", res.ok ? "ok" : "failed"},
      {"error", res.ok ? json(nullptr) : json(res.error)},
      {"termination", res.termination},
      {"sfo", res.sfo_raw},
      {"sfo_nominal", res.sfo_nominal},
      {"iterations", res.iterations},
      {"sfo_to_fosp", opt_json(res.sfo_to_fosp)},
      {"sfo_to_sosp", opt_json(res.sfo_to_sosp)},
      {"certificate", cert_json(res.certificate)},
      {"perturbations", outcome.perturbations.size()},
      {"warnings", outcome.warnings},
      {"final_x", x},
      {"wall_time_s", res.wall_seconds},
  };
  res.summary["trace_rows"] = outcome.trace.size();
  res.trace = std::move(outcome.trace);
  return res;
}

RunSummary run_plan(const ExperimentPlan& plan, unsigned workers) {
  const std::vector<Cell> cells = expand_cells(plan);

  // Resolve every configuration up front so that config errors abort before any work.
  std::set<std::tuple<std::size_t, std::size_t, std::uint64_t, double>> checked;
  for (const Cell& c : cells) {
    if (!checked.emplace(c.problem, c.optimizer, c.n.value_or(0), c.eps.value_or(-1.0)).second) continue;
    const ProblemInstance inst = build_problem(plan.problems[c.problem], c.n);
    start_point(plan.problems[c.problem], inst);
    resolve_optimizer(plan.optimizers[c.optimizer], *inst.problem, c.eps, c.seed);
  }

  const fs::path out_dir(plan.out_dir);
  fs::create_directories(out_dir / "cells");

  if (workers == 0) workers = worker_count();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, cells.size()))));
  RunSummary summary;
  summary.cells.resize(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::string io_error;
  auto worker = [&] {
    if (workers > 1) kernels::set_threads(1);
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      CellResult r = run_cell(plan, cells[i]);
      try {
        const fs::path dir = out_dir / "cells" / r.cell.run_id;
        fs::create_directories(dir);
        std::ostringstream csv;
        write_trace_csv(csv, r.trace);
        write_text(dir / "trace.csv", csv.str());
        write_text(dir / "summary.json", r.summary.dump(2) + "\n");
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (io_error.empty()) io_error = e.what();
      }
      summary.cells[i] = std::move(r);
    }
  };
  const int saved_threads = kernels::max_threads();
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  kernels::set_threads(saved_threads);
  if (!io_error.empty()) throw Error(ErrorKind::io_error, io_error);

  json agg_cells = json::array();
  std::uint64_t total = 0;
  for (const CellResult& r : summary.cells) {
    if (!r.ok) summary.failed++;
    total += r.sfo_raw;
    agg_cells.push_back(json{
        {"run_id", r.cell.run_id},
        {"problem", plan.problems[r.cell.problem].name},
        {"optimizer", plan.optimizers[r.cell.optimizer].name},
        {"optimizer_kind", plan.optimizers[r.cell.optimizer].kind},
        {"second_order", r.second_order},
        {"seed", r.cell.seed},
        {"eps", r.eps},
        {"n", r.num_components},
        {"sweep_eps", opt_json(r.cell.eps)},
        {"sweep_n", opt_json(r.cell.n)},
        {"status", r.ok ? "ok" : "failed"},
        {"error", r.ok ? json(nullptr) : json(r.error)},
        {"termination", r.termination},
        {"sfo", r.sfo_raw},
        {"sfo_nominal", r.sfo_nominal},
        {"sfo_to_fosp", opt_json(r.sfo_to_fosp)},
        {"sfo_to_sosp", opt_json(r.sfo_to_sosp)},
        {"is_fosp", r.certificate ? json(r.certificate->is_fosp) : json(nullptr)},
        {"is_sosp", r.certificate ? json(r.certificate->is_sosp) : json(nullptr)},
        {"trace", "cells/" + r.cell.run_id + "/trace.csv"},
    });
  }
  json optimizers = json::array();
  for (const auto& o : plan.optimizers) {
    optimizers.push_back({{"name", o.name}, {"kind", o.kind}, {"order", to_string(o.order)}});
  }
  json problems = json::array();
  for (const auto& p : plan.problems) problems.push_back({{"name", p.name}, {"kind", p.kind}});
  summary.aggregate = json{
      {"problems", problems},
      {"optimizers", optimizers},
      {"seeds", plan.seeds},
      {"sweep", {{"axis", to_string(plan.sweep.axis)},
                 {"eps_grid", plan.sweep.eps_grid},
                 {"n_grid", plan.sweep.n_grid}}},
      {"num_cells", summary.cells.size()},
      {"failed", summary.failed},
      {"total_sfo", total},
      {"cells", agg_cells},
  };
  write_text(out_dir / "aggregate.json", summary.aggregate.dump(2) + "\n");
  if (plan.plot) summary.plot_files = emit_plots(summary.aggregate, out_dir.string());
  return summary;
}

}  // namespace ssrgd::harness

// Executes an experiment plan cell by cell and persists traces and summaries.
//
// Output layout under plan.out_dir:
//   cells/<run_id>/trace.csv     iter,f,grad_norm,sfo,event
//   cells/<run_id>/summary.json  certificate, SFO milestones, final iterate, wall time
//   aggregate.json               one entry per cell plus total_sfo
//   plots/                       SVG files and manifest.json when plot = true
#pragma once

#include "ssrgd/harness/plan.hpp"
#include "ssrgd/spectral.hpp"

#include <json.hpp>

namespace ssrgd::harness {

struct CellResult {
  Cell cell;
  bool ok = false;
  std::string error;
  std::string termination;
  std::uint64_t sfo_raw = 0;
  std::uint64_t sfo_nominal = 0;
  std::uint64_t iterations = 0;
  std::optional<std::uint64_t> sfo_to_fosp;
  std::optional<std::uint64_t> sfo_to_sosp;
  std::optional<Certificate> certificate;
  std::uint64_t num_components = 0;  // n of the built problem (0 when online)
  double eps = 0.0;
  double delta = 0.0;
  bool second_order = false;
  double wall_seconds = 0.0;
  nlohmann::json summary;  // the per-cell JSON as written
  std::vector<TraceRecord> trace;
};

struct RunSummary {
  std::vector<CellResult> cells;
  nlohmann::json aggregate;
  std::vector<std::string> plot_files;
  std::size_t failed = 0;
};

/// Worker count from SSRGD_WORKERS, defaulting to the hardware concurrency.
unsigned worker_count();

/// Runs one cell without touching the filesystem.
CellResult run_cell(const ExperimentPlan& plan, const Cell& cell);

/// Resolves every cell's configuration first (config errors propagate as
/// Error(invalid_config)), then runs the cells on a worker pool. A failing
/// cell is recorded and does not stop the others.
RunSummary run_plan(const ExperimentPlan& plan, unsigned workers = 0);

}  // namespace ssrgd::harness

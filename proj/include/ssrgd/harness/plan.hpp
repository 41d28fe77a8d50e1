// Experiment plans: INI-style configuration, validation, cell expansion and
// per-cell resolution of optimizer parameters.
//
// Layout of a configuration file:
//
//   [plan]            seeds = 0,1,2        max_cells = 10000
//   [output]          dir = out            plot = true
//   [sweep]           axis = eps|n         eps_grid = 0.1,0.05   n_grid = 1024,4096
//   [problem:NAME]    kind = separable_saddle|nonconvex_logistic|log_ramp|libsvm|random_quadratic
//                     plus generator keys, optionally online_sigma
//   [optimizer:NAME]  kind = ssrgd|gd|perturbed_gd|sgd|svrg
//                     order, eps, delta, logfactor and explicit overrides
//
// Any key left out of an optimizer section is filled from the complexity-derived
// defaults for its order and problem mode.
#pragma once

#include "ssrgd/baselines.hpp"
#include "ssrgd/problems.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ssrgd::harness {

enum class SweepAxis { none, eps, n };

const char* to_string(SweepAxis axis);

struct ProblemSpec {
  std::string name;
  std::string kind;
  /// Raw key/value pairs as written, kept for hashing and reporting.
  std::map<std::string, std::string> raw;

  std::uint64_t n = 1024;
  std::size_t d = 10;
  double alpha = 0.1;
  double delta_plant = 0.5;
  double noise = 0.0;
  double curvature_noise = 0.0;
  double gamma4 = 1.0;
  double box = 1.0;
  double scale = 1.0;
  double anchor = 1e-6;
  double start = 1.0;
  std::uint64_t seed = 0;
  std::string path;
  std::size_t d_cap = 100000;
  std::optional<double> online_sigma;
  /// Start at the first planted saddle instead of the generator's x0.
  bool start_at_saddle = false;
};

struct OptimizerSpec {
  std::string name;
  std::string kind;  // "ssrgd" or a baseline kind
  std::map<std::string, std::string> raw;

  Order order = Order::first;
  double eps = 0.05;
  std::optional<double> delta;
  double logfactor = 1.0;
  /// Budget multiplier applied to the default SFO budget.
  double budget_factor = 50.0;

  std::optional<double> eta;
  std::optional<std::uint64_t> epoch_len;
  std::optional<std::uint64_t> minibatch;
  std::optional<std::uint64_t> batch;
  std::optional<double> perturb_radius;
  std::optional<double> g_thres;
  std::optional<double> f_thres;
  std::optional<std::uint64_t> super_epoch_len;
  std::optional<std::uint64_t> sfo_budget;
  std::optional<std::uint64_t> max_epochs;
  std::optional<bool> stop_at_fosp;
  std::optional<bool> stop_at_sosp;
  std::optional<bool> with_replacement;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::none;
  std::vector<double> eps_grid;
  std::vector<std::uint64_t> n_grid;
};

struct ExperimentPlan {
  std::vector<ProblemSpec> problems;
  std::vector<OptimizerSpec> optimizers;
  std::vector<std::uint64_t> seeds{0};
  SweepSpec sweep;
  std::string out_dir;
  bool plot = true;
  std::uint64_t max_cells = 10000;
};

/// One (problem, optimizer, seed, sweep point) combination.
struct Cell {
  std::size_t problem = 0;
  std::size_t optimizer = 0;
  std::uint64_t seed = 0;
  std::optional<double> eps;       // eps sweep value
  std::optional<std::uint64_t> n;  // n sweep value
  std::string canonical;           // content that the run id hashes
  std::string run_id;              // 16 hex digits
};

/// Parses and validates a configuration file. Errors are Error(invalid_config)
/// or Error(parse_error) with the offending key named.
ExperimentPlan parse_config(const std::string& path);
ExperimentPlan parse_config_text(const std::string& text);

/// Cartesian product in a fixed order: problem, optimizer, sweep point, seed.
std::vector<Cell> expand_cells(const ExperimentPlan& plan);

/// Builds the problem instance for a spec, optionally overriding n.
ProblemInstance build_problem(const ProblemSpec& spec, std::optional<std::uint64_t> n = {});

/// Starting point for a spec on a built instance.
Vector start_point(const ProblemSpec& spec, const ProblemInstance& inst);

/// Fully resolved optimizer for one cell.
struct ResolvedOptimizer {
  bool is_ssrgd = true;
  RunConfig ssrgd;
  BaselineParams baseline;
  std::uint64_t sfo_budget = 0;
  double eps = 0.0;
  double delta = 0.0;
  bool stop_at_sosp = false;
  bool second_order = false;
};

/// Applies complexity-derived defaults and explicit overrides, then validates.
ResolvedOptimizer resolve_optimizer(const OptimizerSpec& spec, const Problem& p,
                                    std::optional<double> eps_override, std::uint64_t seed);

/// Hex FNV-1a of a string.
std::string content_hash(const std::string& text);

/// Nearest candidate by edit distance, for error messages.
std::string nearest_key(const std::string& key, const std::vector<std::string>& candidates);

}  // namespace ssrgd::harness

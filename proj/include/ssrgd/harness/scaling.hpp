// Log-log fits of oracle complexity against 1/eps or n.
#pragma once

#include "ssrgd/harness/plan.hpp"

#include <json.hpp>

#include <span>

namespace ssrgd::harness {

struct ScalingSample {
  double x = 0.0;  // eps for the eps axis, n for the n axis
  std::uint64_t seed = 0;
  double sfo = 0.0;  // SFO to the first eps-FOSP
  std::string run_id;
};

struct ScalingFit {
  SweepAxis axis = SweepAxis::eps;
  std::string problem;
  std::string optimizer;
  /// Least-squares slope of log y against log(1/eps) or log(n), where y is the
  /// SFO count (eps axis) or the SFO count minus n (n axis).
  double slope = 0.0;
  double intercept = 0.0;
  /// 95% interval from the spread of per-seed slopes (or the pooled
  /// regression standard error when fewer than two seeds cover the grid).
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> grid;         // distinct x values, ascending
  std::vector<double> mean_log_y;   // per grid value
  std::vector<double> seed_slopes;
  std::size_t samples = 0;
  std::size_t excluded = 0;         // n-axis samples with SFO <= n
  std::vector<std::string> run_ids;
};

/// Fits one group of samples. Fewer than three distinct x values throws
/// Error(insufficient_data).
ScalingFit fit_scaling(std::span<const ScalingSample> samples, SweepAxis axis);

/// Fits every (problem, optimizer) group of an aggregate that has at least
/// three successful sweep points; throws insufficient_data if none has.
std::vector<ScalingFit> scaling_report(const nlohmann::json& aggregate, SweepAxis axis);

nlohmann::json to_json(const ScalingFit& fit);

}  // namespace ssrgd::harness

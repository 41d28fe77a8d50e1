// Empirical checks of the estimator variance bound, the per-epoch decrease,
// localization of super-epoch iterates and the two-point coupled escape
// experiment. Monte Carlo verdicts carry standard errors; a violation needs
// the estimate to exceed its bound by more than 3 standard errors.
#pragma once

#include "ssrgd/config.hpp"
#include "ssrgd/optimizer.hpp"
#include "ssrgd/problems.hpp"
#include "ssrgd/rng.hpp"

#include <json.hpp>

#include <span>

namespace ssrgd::diag {

struct Frequency {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double rate() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  /// Wilson score interval at ~95%.
  std::pair<double, double> interval() const;
};

// ---- variance bound ------------------------------------------------------

struct VarianceRow {
  std::uint64_t t = 0;      // step index within the trajectory (0 = anchor)
  double estimate = 0.0;    // E ||v_t - grad f(x_t)||^2
  double bound = 0.0;       // (L^2/b) sum_{j<=t} ||x_j - x_{j-1}||^2
  double std_error = 0.0;
  double bias = 0.0;        // ||E v_t - grad f(x_t)||
  bool pass = true;
};

struct VarianceReport {
  std::vector<VarianceRow> rows;
  bool exhaustive = false;
  std::uint64_t replications = 0;
  bool all_pass() const;
};

/// Monte Carlo over `replications` independent minibatch sequences of the
/// recursive estimator started from the exact gradient at trajectory[0].
VarianceReport verify_variance_bound(const Problem& p, std::span<const Vector> trajectory,
                                     std::uint64_t b, std::uint64_t replications, RngStream& rng);

/// Exact expectation by enumerating every index tuple (n^(b * steps) leaves).
VarianceReport verify_variance_bound_exact(const Problem& p, std::span<const Vector> trajectory,
                                           std::uint64_t b);

struct SvrgVarianceReport {
  double variance = 0.0;  // E ||v - grad f(x)||^2
  double bound = 0.0;     // (L^2/b) ||x - x_tilde||^2
  double bias = 0.0;      // ||E v - grad f(x)||
  bool pass() const { return variance <= bound * (1.0 + 1e-12) + 1e-15; }
};

/// Exact moments of the snapshot estimator at x by enumeration of n^b tuples.
SvrgVarianceReport svrg_variance_exact(const Problem& p, const Vector& anchor, const Vector& x,
                                       std::uint64_t b);

// ---- per-epoch decrease --------------------------------------------------

struct EpochDecreaseReport {
  std::uint64_t replications = 0;
  double f_start = 0.0;
  double mean_f_end = 0.0;
  double mean_grad_sq_sum = 0.0;  // E sum_j ||grad f(x_{j-1})||^2
  double mean_slack = 0.0;        // E[f_end - f_start + (eta/2) sum]; must be <= 3 se
  double slack_std_error = 0.0;
  bool pass = false;
  // SVRG with b = m (below its b >= m^2 requirement) versus b = m^2.
  double svrg_decrease_b_m = 0.0;
  double svrg_decrease_b_m2 = 0.0;
  double svrg_gap = 0.0;
};

/// Runs `epochs` independent full epochs (m steps, no random stop) from x_start.
EpochDecreaseReport verify_epoch_decrease(const Problem& p, const RunConfig& cfg,
                                          const Vector& x_start, std::uint64_t epochs,
                                          RngStream& rng);

// ---- coupled two-point experiment ---------------------------------------

struct CoupledParams {
  double radius = 0.0;        // perturbation radius r
  double zeta_prime = 0.1;
  double c1 = 0.0;            // 0 selects 20 / (eta L)
  std::uint64_t horizon = 0;  // steps per pair
  double delta = 0.0;         // target curvature; escape distance is delta/(c1 rho)
  double f_thres = 0.0;       // F; the f-decrease check uses 2F
  /// Skip the saddle precondition (used for degenerate control runs).
  bool control = false;
  std::uint64_t seed = 0;

  /// Escape-analysis parameters for a second-order config: c1 = 20/(eta L),
  /// r = delta/(2 c1 rho), horizon = ceil(2 ln(8 delta sqrt(d)/(c1 rho zeta' r)) / (eta delta)).
  static CoupledParams escape_regime(const Problem& p, const RunConfig& cfg);
};

struct CoupledRun {
  std::vector<Vector> x_traj;
  std::vector<Vector> x_prime_traj;
  std::vector<double> w_norms;  // ||x_t - x'_t||
  double r0 = 0.0;
  Vector e1;
  std::optional<std::uint64_t> escape_iter;
  double max_distance = 0.0;
  double max_f_decrease = 0.0;
  std::uint64_t digest = 0;        // index stream digest of x
  std::uint64_t digest_prime = 0;  // index stream digest of x'
};

/// One coupled pair started from x0 and x0' = x0 - r0 e1 around x_tilde.
CoupledRun run_coupled_pair(const Problem& p, const Vector& x_tilde, const Vector& e1,
                            const RunConfig& cfg, const CoupledParams& params,
                            std::uint64_t pair_id, bool keep_trajectories = false);

struct CoupledStats {
  Frequency escape;
  Frequency f_decrease;
  double escape_distance = 0.0;
  double r0 = 0.0;
  double lambda_min = 0.0;
  std::uint64_t horizon = 0;
  bool coupling_faithful = true;  // all digests matched
  bool w0_exact = true;           // ||w_0|| == r0 for every pair
};

CoupledStats run_coupled_experiment(const ProblemInstance& inst, const Vector& x_tilde,
                                    const RunConfig& cfg, std::uint64_t pairs,
                                    const CoupledParams& params);

// ---- localization ------------------------------------------------------

struct LocalizationReport {
  Frequency epochs;               // super epochs where every checked step held
  std::uint64_t steps_checked = 0;
  std::uint64_t increase_events = 0;
  double min_margin = std::numeric_limits<double>::infinity();  // bound - distance
};

/// Checks ||x_t - x_0|| <= sqrt(4 t (f(x_0) - f(x_t)) / (c' L)) along each super epoch.
/// Steps where f increased are counted as increase events and skipped.
LocalizationReport verify_localization(std::span<const SuperEpochLog> epochs, const Problem& p,
                                       const RunConfig& cfg, double c_prime);

/// Bound-check of a single super epoch, exposed for tests.
bool localization_holds(const SuperEpochLog& log, double L, double c_prime,
                        LocalizationReport* acc = nullptr);

// ---- serialization -------------------------------------------------------

nlohmann::json to_json(const VarianceReport& r);
nlohmann::json to_json(const EpochDecreaseReport& r);
nlohmann::json to_json(const CoupledStats& s);
nlohmann::json to_json(const LocalizationReport& r);

/// FNV-1a over a sequence of index multisets.
std::uint64_t fnv1a(std::uint64_t h, std::span<const SampleId> ids);
inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace ssrgd::diag

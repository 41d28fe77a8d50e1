// The SSRGD optimizer: perturbed stochastic recursive gradient descent with
// random epoch stops and super epochs, for finite-sum and online problems.
#pragma once

#include "ssrgd/config.hpp"
#include "ssrgd/rng.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ssrgd {

enum class Termination { budget_exhausted, sosp_certified, max_epochs, fosp_reached, nonfinite };

const char* to_string(Termination t);

/// Bookkeeping for one perturbation x0 = x_tilde + xi.
struct PerturbationRecord {
  std::uint64_t iter = 0;
  double f_anchor = 0.0;         // f(x_tilde)
  double f_perturbed = 0.0;      // f(x0)
  double anchor_grad_norm = 0.0; // gradient norm that passed the threshold check
  double radius = 0.0;
  double xi_norm = 0.0;
};

/// Iterates of one super epoch, recorded on request.
struct SuperEpochLog {
  std::uint64_t t_init = 0;
  Vector x_tilde;
  std::vector<Vector> iterates;  // x0 (perturbed) first
  std::vector<double> f_values;  // f at each iterate
  TraceEvent exit = TraceEvent::none;
};

struct RunOutcome {
  Vector final_x;
  std::vector<TraceRecord> trace;
  /// Anchors at which a super epoch was triggered.
  std::vector<std::pair<std::uint64_t, Vector>> sosp_candidates;
  Termination termination = Termination::budget_exhausted;
  SfoCounter sfo;
  std::uint64_t iterations = 0;
  std::uint64_t epochs = 0;
  std::optional<std::uint64_t> sfo_to_fosp;
  std::optional<std::uint64_t> iter_to_fosp;
  std::vector<PerturbationRecord> perturbations;
  std::vector<SuperEpochLog> super_epochs;
  std::vector<std::string> warnings;
};

/// Optional observers of a run. None of them changes the iterates.
struct RunHooks {
  /// Evaluated at every super-epoch trigger point; returning true halts the
  /// run with Termination::sosp_certified.
  std::function<bool(const Vector&)> sosp_check;
  /// Called with each minibatch index multiset as it is drawn.
  std::function<void(std::span<const SampleId>)> on_minibatch;
  /// SVRG baseline only: called with (x_tilde, stored grad f(x_tilde)) at each snapshot.
  std::function<void(const Vector&, const Vector&)> on_snapshot;
  bool record_super_epochs = false;
};

/// Parameter choice for finding an eps-first-order point in finite-sum mode:
/// eta = (sqrt(5)-1)/(2L), m = b = ceil(sqrt(n)), no perturbation.
RunConfig derive_config_first_order(const Problem& p, double eps);

/// Online first-order choice: B = ceil(4 sigma^2 / eps^2), b = m = ceil(sqrt(B)).
RunConfig derive_config_online_first_order(const Problem& p, double eps);

/// Second-order choice with the polylog factors collapsed into `logfactor`:
/// eta = min(logfactor, (sqrt(5)-1)/2) / L, G = eps, F = logfactor delta^3/rho^2,
/// T = ceil(logfactor / (eta delta)),
/// r = logfactor min(delta^3/(rho^2 eps), delta^{3/2}/(rho sqrt(L))).
RunConfig derive_config_second_order(const Problem& p, double eps, double delta,
                                     double logfactor = 1.0);

/// Online second-order choice: the finite-sum thresholds with B = ceil(4 sigma^2/eps^2),
/// b = m = ceil(sqrt(B)).
RunConfig derive_config_online_second_order(const Problem& p, double eps, double delta,
                                            double logfactor = 1.0);

/// True with probability exactly 1/(m-k+1). Requires 1 <= k <= m.
bool random_stop_decision(RngStream& rng, std::uint64_t k, std::uint64_t m);

RunOutcome run_ssrgd(const Problem& p, const RunConfig& cfg, const Vector& x0, RngStream& rng,
                     const RunHooks& hooks = {});

std::uint64_t ceil_sqrt(std::uint64_t n);

/// Sub-stream ids used by the optimizers, exposed for replay experiments.
namespace streams {
inline constexpr std::uint64_t minibatch = 0;
inline constexpr std::uint64_t stop = 1;
inline constexpr std::uint64_t perturb = 2;
inline constexpr std::uint64_t anchor = 3;
}  // namespace streams

}  // namespace ssrgd

// Reference optimizers sharing the SSRGD oracle and trace interfaces.
#pragma once

#include "ssrgd/optimizer.hpp"

namespace ssrgd {

enum class BaselineKind { gd, perturbed_gd, sgd, svrg };

const char* to_string(BaselineKind kind);
std::optional<BaselineKind> parse_baseline_kind(const std::string& name);

struct BaselineParams {
  BaselineKind kind = BaselineKind::gd;
  double eta = 0.0;
  std::uint64_t minibatch = 1;   // sgd, svrg
  std::uint64_t epoch_len = 0;   // svrg inner loop length
  // perturbed_gd: same trigger pattern as SSRGD.
  double perturb_radius = 0.0;
  double g_thres = 0.0;
  double f_thres = 0.0;
  std::uint64_t super_epoch_len = 0;
  double eps = 0.0;
  bool stop_at_fosp = false;
  /// sgd: out-of-band exact gradient measurement period in steps
  /// (0 = ceil(n / b)). The measurement is not charged to the SFO counter.
  std::uint64_t monitor_every = 0;
  std::uint64_t max_iters = std::numeric_limits<std::uint64_t>::max();
  bool with_replacement = true;

  void validate(const Problem& p) const;
};

/// Parameters mirroring a second-order SSRGD configuration for perturbed GD.
BaselineParams perturbed_gd_from(const RunConfig& cfg);

/// SFO accounting: n per full gradient, b per SGD step, 2b raw (b nominal)
/// per SVRG inner step plus n per snapshot.
RunOutcome run_baseline(const BaselineParams& params, const Problem& p, const Vector& x0,
                        std::uint64_t sfo_budget, RngStream& rng, const RunHooks& hooks = {});

}  // namespace ssrgd

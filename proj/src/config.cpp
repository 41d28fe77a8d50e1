#include "ssrgd/config.hpp"

#include <cmath>
#include <sstream>

namespace ssrgd {

const char* to_string(Order order) { return order == Order::first ? "first" : "second"; }

namespace {

[[noreturn]] void reject(const std::string& msg) { throw Error(ErrorKind::invalid_config, msg); }

}  // namespace

void RunConfig::validate(const Problem& p) const {
  const double L = p.smoothness().lipschitz_grad;
  if (!(eta > 0.0) || !std::isfinite(eta)) reject("step size eta must satisfy eta > 0");
  if (epoch_len == 0) reject("epoch length m must be >= 1");
  if (minibatch == 0) reject("minibatch size b must be >= 1");
  if (!(logfactor > 0.0)) reject("logfactor must be > 0");
  if (p.mode() == OracleMode::online && batch == 0) reject("online mode needs batch size B >= 1");
  if (!with_replacement && p.mode() == OracleMode::finite_sum && minibatch > p.num_components()) {
    reject("without-replacement minibatch larger than n");
  }
  // Tolerate the last-ulp rounding of the derived step sizes.
  const double slack = 1.0 + 1e-12;
  if (order == Order::first) {
    if (eta * L > kGoldenStep * slack) {
      std::ostringstream os;
      os << "first-order mode needs eta <= (sqrt(5)-1)/(2L) = " << kGoldenStep / L << ", got " << eta;
      reject(os.str());
    }
  } else {
    if (minibatch < epoch_len) reject("second-order mode needs minibatch b >= epoch length m");
    if (eta * L > logfactor * slack) reject("second-order mode needs eta <= logfactor / L");
    if (perturb_radius < 0.0) reject("perturbation radius must be >= 0");
    if (g_thres < 0.0 || f_thres < 0.0) reject("thresholds must be >= 0");
    if (perturb_radius > 0.0 && super_epoch_len == 0) reject("super epoch length must be >= 1");
  }
}

}  // namespace ssrgd

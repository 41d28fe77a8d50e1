// Algorithm hyperparameters.
#pragma once

#include "ssrgd/problem.hpp"

namespace ssrgd {

enum class Order { first, second };

const char* to_string(Order order);

struct RunConfig {
  Order order = Order::first;
  double eta = 0.0;                   // step size
  std::uint64_t epoch_len = 1;        // m
  std::uint64_t minibatch = 1;        // b
  std::uint64_t batch = 0;            // B, online anchor batch
  double perturb_radius = 0.0;        // r
  double g_thres = 0.0;               // gradient threshold for entering a super epoch
  double f_thres = 0.0;               // function decrease that ends a super epoch
  std::uint64_t super_epoch_len = 0;  // iterations after which a super epoch times out
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t sfo_budget = 1'000'000;
  std::uint64_t max_epochs = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t seed = 0;
  double logfactor = 1.0;
  bool with_replacement = true;
  /// Halt at the first epoch anchor whose gradient norm is <= eps.
  bool stop_at_fosp = false;

  bool perturbation_enabled() const { return order == Order::second && perturb_radius > 0.0; }

  /// Throws Error(invalid_config) if the configuration violates the step-size
  /// or minibatch constraints for its order, or does not fit the problem mode.
  void validate(const Problem& p) const;
};

}  // namespace ssrgd

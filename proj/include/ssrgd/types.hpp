// Shared domain types for the ssrgd library.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssrgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Identifier of one component function f_i. In finite-sum mode it is an
/// index in [0, n); in online mode it names an i.i.d. sample of the stream.
using SampleId = std::uint64_t;
using IndexMultiset = std::vector<SampleId>;

/// Sentinel component count of an online (infinite-data) problem.
inline constexpr std::uint64_t kInfiniteComponents = std::numeric_limits<std::uint64_t>::max();

/// (sqrt(5) - 1) / 2, the largest admissible eta * L in first-order mode.
inline constexpr double kGoldenStep = 0.6180339887498949;

enum class OracleMode { finite_sum, online };

enum class ErrorKind {
  invalid_config,
  invalid_state,
  invalid_metadata,
  invalid_input,
  invalid_dataset,
  unsupported_oracle,
  parse_error,
  nonfinite,
  insufficient_data,
  io_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

enum class TraceEvent {
  none,
  epoch_start,
  perturbation,
  super_epoch_end_fdecrease,
  super_epoch_end_timeout,
  random_stop,
};

const char* to_string(TraceEvent event);
std::optional<TraceEvent> parse_trace_event(const std::string& name);

/// One row of an optimizer trace. grad_norm is only present where it was
/// available for free (epoch anchors) or measured out of band.
struct TraceRecord {
  std::uint64_t iter = 0;
  double f_value = 0.0;
  std::optional<double> grad_norm;
  std::uint64_t sfo_count = 0;
  TraceEvent event = TraceEvent::none;

  bool operator==(const TraceRecord&) const = default;
};

/// Stochastic first-order oracle accounting.
///
/// `raw` counts every component-gradient evaluation. `nominal` follows the
/// complexity convention of counting a paired difference step on a minibatch
/// of size b as b evaluations rather than 2b.
struct SfoCounter {
  std::uint64_t raw = 0;
  std::uint64_t nominal = 0;
  std::uint64_t full_grad_calls = 0;
  std::uint64_t large_batch_calls = 0;
  std::uint64_t large_batch_samples = 0;
  std::uint64_t paired_steps = 0;
  std::uint64_t paired_samples = 0;
  std::uint64_t single_steps = 0;
  std::uint64_t single_samples = 0;

  void add_full(std::uint64_t n) {
    ++full_grad_calls;
    raw += n;
    nominal += n;
  }
  void add_large_batch(std::uint64_t batch) {
    ++large_batch_calls;
    large_batch_samples += batch;
    raw += batch;
    nominal += batch;
  }
  /// A step that evaluates every sampled component at two points.
  void add_paired(std::uint64_t b) {
    ++paired_steps;
    paired_samples += b;
    raw += 2 * b;
    nominal += b;
  }
  /// A step that evaluates every sampled component at one point (SGD).
  void add_single(std::uint64_t b) {
    ++single_steps;
    single_samples += b;
    raw += b;
    nominal += b;
  }
};

bool all_finite(const Vector& v);

}  // namespace ssrgd

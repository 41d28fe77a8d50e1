// Deterministic, splittable random streams.
#pragma once

#include "ssrgd/types.hpp"

#include <cstdint>
#include <random>

namespace ssrgd {

/// A reproducible random stream keyed by (seed, stream_id).
///
/// The engine is std::mt19937_64 seeded from a seed_seq over both key words,
/// so equal keys replay identical draws and distinct stream ids give
/// statistically independent streams. Conversions to uniform reals, normals
/// and bounded integers are done here rather than through <random>
/// distributions, whose output is implementation-defined.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Uniform integer in [0, n). n == kInfiniteComponents returns a raw draw.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Child stream derived from this stream's key; does not advance this one.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

RngStream seeded_rng(std::uint64_t seed, std::uint64_t stream_id);

/// Uniform sample from the Euclidean ball of radius r centred at the origin.
Vector sample_uniform_ball(RngStream& rng, std::size_t d, double r);

/// b indices drawn uniformly from [0, n). With replacement by default.
IndexMultiset sample_minibatch(RngStream& rng, std::uint64_t n, std::uint64_t b,
                               bool with_replacement = true);

/// SplitMix64 finaliser; used to derive stream keys and content hashes.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ssrgd

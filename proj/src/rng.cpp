#include "ssrgd/rng.hpp"

#include <cmath>
#include <unordered_set>

namespace ssrgd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::invalid_metadata: return "invalid-metadata";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_dataset: return "invalid-dataset";
    case ErrorKind::unsupported_oracle: return "unsupported-oracle";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::nonfinite: return "nonfinite";
    case ErrorKind::insufficient_data: return "insufficient-data";
    case ErrorKind::io_error: return "io-error";
  }
  return "error";
}

bool all_finite(const Vector& v) { return v.allFinite(); }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x55d3a1u};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  if (spare_normal_) {
    double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * scale;
  return u * scale;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == kInfiniteComponents) return engine_();
  if (n <= 1) return 0;
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(mix64(seed_ ^ mix64(stream_id_)), mix64(child + 0x632be59bd9b4e019ULL));
}

RngStream seeded_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

Vector sample_uniform_ball(RngStream& rng, std::size_t d, double r) {
  if (d == 0) throw Error(ErrorKind::invalid_input, "ball dimension must be >= 1");
  if (!(r >= 0.0)) throw Error(ErrorKind::invalid_input, "ball radius must be >= 0");
  Vector xi = Vector::Zero(static_cast<Eigen::Index>(d));
  if (r == 0.0) return xi;
  double norm = 0.0;
  do {
    for (Eigen::Index j = 0; j < xi.size(); ++j) xi[j] = rng.normal();
    norm = xi.norm();
  } while (norm == 0.0);
  const double radius = r * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  xi *= radius / norm;
  // Guard the support constraint against the last-ulp rounding of the rescale.
  const double n2 = xi.norm();
  if (n2 > r) xi *= r / n2;
  return xi;
}

IndexMultiset sample_minibatch(RngStream& rng, std::uint64_t n, std::uint64_t b,
                               bool with_replacement) {
  if (n == 0 || b == 0) throw Error(ErrorKind::invalid_config, "minibatch needs n >= 1 and b >= 1");
  IndexMultiset out;
  out.reserve(b);
  if (with_replacement || n == kInfiniteComponents) {
    for (std::uint64_t k = 0; k < b; ++k) out.push_back(rng.uniform_index(n));
    return out;
  }
  if (b > n) throw Error(ErrorKind::invalid_config, "without-replacement minibatch larger than n");
  // Floyd's algorithm, then slot order follows draw order.
  std::unordered_set<SampleId> chosen;
  for (std::uint64_t j = n - b; j < n; ++j) {
    SampleId t = rng.uniform_index(j + 1);
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      out.push_back(j);
    } else {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace ssrgd

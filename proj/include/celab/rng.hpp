// Deterministic random source shared by the simulators. SplitMix64 core,
// normal variates via the Beasley-Springer-Moro inverse CDF so that streams
// are reproducible bit-for-bit across platforms and runs.
#pragma once

#include <cstdint>

namespace celab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream, e.g. one per sweep point or per tree.
  Rng substream(std::uint64_t stream_id) const;

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double next_double();
  // Uniform integer in [0, n), n > 0.
  std::uint64_t next_below(std::uint64_t n);
  bool bernoulli(double p);

  double normal(double mean, double stddev);
  // Normal conditioned on [lo, hi] via inverse-CDF; stddev == 0 degenerates
  // to mean clamped into the interval.
  double truncated_normal(double mean, double stddev, double lo, double hi);

 private:
  std::uint64_t state_;
};

// Inverse of the standard normal CDF (Beasley-Springer-Moro / Acklam).
double inverse_normal_cdf(double p);
// Standard normal CDF.
double normal_cdf(double x);

}  // namespace celab

#include "celab/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace celab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::substream(std::uint64_t stream_id) const {
  std::uint64_t s = state_ ^ (0xd1b54a32d192ed03ULL * (stream_id + 1));
  // Burn one step so adjacent stream ids decorrelate.
  splitmix64(s);
  return Rng(s);
}

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::next_below: n == 0");
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

bool Rng::bernoulli(double p) { return next_double() < p; }

double Rng::normal(double mean, double stddev) {
  // Inverse-CDF keeps one draw per variate; avoid the exact endpoints.
  double u;
  do {
    u = next_double();
  } while (u <= 0.0);
  return mean + stddev * inverse_normal_cdf(u);
}

double Rng::truncated_normal(double mean, double stddev, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("truncated_normal: lo > hi");
  if (stddev < 0.0) throw std::invalid_argument("truncated_normal: stddev < 0");
  if (stddev == 0.0) return std::min(std::max(mean, lo), hi);
  const double a = normal_cdf((lo - mean) / stddev);
  const double b = normal_cdf((hi - mean) / stddev);
  if (!(b - a > 0.0)) {
    throw std::invalid_argument("truncated_normal: interval mass is zero");
  }
  double u;
  do {
    u = a + (b - a) * next_double();
  } while (u <= 0.0 || u >= 1.0);
  const double x = mean + stddev * inverse_normal_cdf(u);
  return std::min(std::max(x, lo), hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inverse_normal_cdf: p out of (0,1)");
  }
  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double q, r, x;
  if (p < p_low) {
    q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement step sharpens the tails.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace celab

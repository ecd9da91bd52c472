#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace cat {

// Counter-based generator: every draw is a hash of (key, counter), so streams
// can be split by name or index without sharing state. Reproducible across
// platforms (no libc rand, no std::normal_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ull)) {}

  Rng substream(std::string_view name) const {
    std::uint64_t h = 0xCBF29CE484222325ull;  // FNV-1a over the label
    for (unsigned char c : name) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    Rng r(0);
    r.key_ = mix(key_ ^ h);
    r.counter_ = 0;
    return r;
  }

  Rng substream(std::uint64_t index) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(index + 0x9E3779B97F4A7C15ull));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  // in [0,1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // inverse-CDF (Acklam's rational approximation, |rel err| < 1.2e-9)
  double gaussian(double mean = 0.0, double sd = 1.0) {
    double u;
    do {
      u = uniform01();
    } while (u <= 0.0);
    return mean + sd * inverse_normal_cdf(u);
  }

  // inverse-CDF
  double laplace(double loc, double scale) {
    double u = uniform01() - 0.5;
    double s = u < 0.0 ? -1.0 : 1.0;
    double a = 1.0 - 2.0 * std::abs(u);
    if (a <= 0.0) a = 0x1.0p-53;
    return loc - scale * s * std::log(a);
  }

  // rejection from the untruncated Gaussian
  double truncated_gaussian(double mean, double sd, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("truncated_gaussian: lo >= hi");
    for (int i = 0; i < 100000; ++i) {
      double x = gaussian(mean, sd);
      if (x >= lo && x <= hi) return x;
    }
    throw std::runtime_error("truncated_gaussian: rejection did not terminate");
  }

  static double inverse_normal_cdf(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("inverse_normal_cdf: p outside (0,1)");
    if (p < p_low) {
      double q = std::sqrt(-2.0 * std::log(p));
      return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
      double q = std::sqrt(-2.0 * std::log(1.0 - p));
      return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
             ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cat

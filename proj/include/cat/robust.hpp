#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cat/cp.hpp"

namespace cat {

enum class Divergence { TotalVariation, KL };

// Assumed f-divergence bound between the calibration and test distributions.
struct ShiftSpec {
  Divergence divergence = Divergence::TotalVariation;
  double epsilon = 0.0;
};

inline void validate(const ShiftSpec& s) {
  if (!(s.epsilon >= 0.0)) throw std::invalid_argument("ShiftSpec: epsilon < 0");
}

struct RobustLevel {
  double delta_tilde;
  // 1 - delta_tilde saturated at 1: the shift consumed the whole confidence
  // budget and only the max calibration score remains as a (flagged) bound.
  bool degenerate;
};

namespace detail {

// Binary KL divergence KL(Bern(z) || Bern(b)), the convex feasibility
// function behind g for the KL f-divergence.
inline double bernoulli_kl(double z, double b) {
  constexpr double inf = 1e300;
  auto term = [](double p, double q) -> double {
    if (p <= 0.0) return 0.0;
    if (q <= 0.0) return inf;
    return p * std::log(p / q);
  };
  return term(z, b) + term(1.0 - z, 1.0 - b);
}

constexpr double kBisectTol = 1e-9;  // absolute tolerance on [0,1]

inline double g_kl(double beta, double eps) {
  beta = std::clamp(beta, 0.0, 1.0);
  if (beta <= 0.0) return 0.0;
  if (beta >= 1.0) return 1.0;
  if (bernoulli_kl(0.0, beta) <= eps) return 0.0;
  // kl(z, beta) decreases in z on [0, beta]; find the crossing with eps
  double lo = 0.0, hi = beta;
  while (hi - lo > kBisectTol) {
    double mid = 0.5 * (lo + hi);
    if (bernoulli_kl(mid, beta) <= eps)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

// g of the robust-CP construction: smallest z in [0,1] feasible for the
// divergence ball of radius epsilon around beta. Closed form for total
// variation; bisection for KL.
inline double shift_g(double beta, const ShiftSpec& shift) {
  beta = std::clamp(beta, 0.0, 1.0);
  if (shift.divergence == Divergence::TotalVariation) return std::max(beta - shift.epsilon, 0.0);
  return detail::g_kl(beta, shift.epsilon);
}

// g^{-1}(tau) = sup { beta in [0,1] | g(beta) <= tau }.
inline double shift_g_inverse(double tau, const ShiftSpec& shift) {
  tau = std::clamp(tau, 0.0, 1.0);
  if (shift.divergence == Divergence::TotalVariation) return std::min(tau + shift.epsilon, 1.0);
  if (detail::g_kl(1.0, shift.epsilon) <= tau) return 1.0;
  double lo = 0.0, hi = 1.0;  // g_kl is nondecreasing in beta
  while (hi - lo > detail::kBisectTol) {
    double mid = 0.5 * (lo + hi);
    if (detail::g_kl(mid, shift.epsilon) <= tau)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

// Tightened failure probability
//   delta_n = 1 - g((1+1/K) g^{-1}(1-delta)),  delta~ = 1 - g^{-1}(1-delta_n).
inline RobustLevel robust_adjusted_level(std::size_t k, double delta, const ShiftSpec& shift) {
  if (k < 1) throw std::invalid_argument("robust_adjusted_level: K < 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("robust_adjusted_level: delta outside (0,1)");
  validate(shift);
  double inner = (1.0 + 1.0 / static_cast<double>(k)) * shift_g_inverse(1.0 - delta, shift);
  double delta_n = 1.0 - shift_g(inner, shift);
  double delta_tilde = 1.0 - shift_g_inverse(1.0 - delta_n, shift);
  bool degenerate = delta_tilde <= 0.0;
  return RobustLevel{delta_tilde, degenerate};
}

// Quantile_{1-delta~}(R^(1),...,R^(K)) -- note: no infinity augmentation, per
// the robust construction. A degenerate adjusted level yields the max score,
// flagged via level_saturated.
inline QuantileResult robust_quantile(const CalibrationScores& scores, double delta,
                                      const ShiftSpec& shift) {
  RobustLevel lvl = robust_adjusted_level(scores.size(), delta, shift);
  std::size_t k = scores.size();
  if (lvl.degenerate) {
    auto r = QuantileResult::finite(*std::max_element(scores.values().begin(), scores.values().end()), k);
    r.level_saturated = true;
    return r;
  }
  double level = 1.0 - lvl.delta_tilde;
  auto p = static_cast<std::size_t>(std::ceil(level * static_cast<double>(k)));
  if (p < 1) p = 1;
  if (p > k) return QuantileResult::infinite(p);
  return QuantileResult::finite(detail::nth_smallest(scores.values(), p), p);
}

}  // namespace cat

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cat {

// Finite multiset of nonconformity scores. Every conformal guarantee in this
// library is computed from one of these.
class CalibrationScores {
 public:
  explicit CalibrationScores(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("CalibrationScores: empty");
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("CalibrationScores: non-finite score");
    }
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// Result of an empirical-quantile computation. The infinite case is carried as
// a tag (rank exceeded the sample), never as a stored float infinity.
class QuantileResult {
 public:
  static QuantileResult finite(double value, std::size_t rank) {
    QuantileResult r;
    r.finite_ = true;
    r.value_ = value;
    r.rank_ = rank;
    return r;
  }
  static QuantileResult infinite(std::size_t rank) {
    QuantileResult r;
    r.finite_ = false;
    r.rank_ = rank;
    return r;
  }

  bool is_finite() const { return finite_; }
  bool is_infinite() const { return !finite_; }
  double value() const {
    if (!finite_) throw std::logic_error("QuantileResult: value() on infinite result");
    return value_;
  }
  std::size_t rank() const { return rank_; }

  // Set when a corrected/robust confidence level saturated at 1 (or the
  // adjusted level chain degenerated); the numeric result is then the most
  // conservative one the sample supports.
  bool level_saturated = false;

 private:
  bool finite_ = false;
  double value_ = 0.0;
  std::size_t rank_ = 0;
};

namespace detail {

// p-th smallest of the scores (1-based); caller guarantees 1 <= p <= K.
inline double nth_smallest(const std::vector<double>& scores, std::size_t p) {
  std::vector<double> work(scores);
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(p - 1), work.end());
  return work[p - 1];
}

}  // namespace detail

// Rank of the (1-delta) empirical quantile over K scores augmented with the
// infinity element: p = ceil((K+1)(1-delta)).
inline std::size_t conformal_rank(std::size_t k, double delta) {
  double x = (static_cast<double>(k) + 1.0) * (1.0 - delta);
  return static_cast<std::size_t>(std::ceil(x));
}

// Quantile_{1-delta}(R^(1),...,R^(K), inf): the p-th smallest score with
// p = ceil((K+1)(1-delta)), or Infinite when p > K.
inline QuantileResult conformal_quantile(const CalibrationScores& scores, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("conformal_quantile: delta outside (0,1)");
  std::size_t k = scores.size();
  std::size_t p = conformal_rank(k, delta);
  if (p > k) return QuantileResult::infinite(p);
  return QuantileResult::finite(detail::nth_smallest(scores.values(), p), p);
}

// Largest rank among equals: rank_of_value({1,5,5,7}, 5) == 3.
inline std::size_t tie_rank(const CalibrationScores& scores, double value) {
  std::size_t r = 0;
  for (double v : scores.values()) {
    if (v <= value) ++r;
  }
  return r;
}

// Smallest K with ceil((K+1)(1-delta)) <= K, i.e. the least calibration size
// giving a finite quantile at failure probability delta.
inline std::size_t min_calibration_size(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("min_calibration_size: delta outside (0,1)");
  for (std::size_t k = 1;; ++k) {
    if (conformal_rank(k, delta) <= k) return k;
  }
}

enum class ConditionalVariant { Hoeffding, Bernstein };

// Confidence level after the calibration-conditional correction.
inline double conditional_corrected_level(std::size_t k, double delta, double beta,
                                          ConditionalVariant variant) {
  double kk = static_cast<double>(k);
  double lb = std::log(1.0 / beta);
  if (variant == ConditionalVariant::Hoeffding) return 1.0 - delta + std::sqrt(lb / (2.0 * kk));
  return 1.0 - delta + std::sqrt(2.0 * delta * lb / kk) + 2.0 * lb / kk;
}

// Quantile at the corrected level 1 - delta + o(K, beta); (1-beta)-sure valid
// over the calibration draw. A corrected level >= 1 gives Infinite, flagged.
inline QuantileResult calibration_conditional_quantile(const CalibrationScores& scores, double delta,
                                                       double beta, ConditionalVariant variant) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("conditional quantile: delta outside (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("conditional quantile: beta outside (0,1)");
  std::size_t k = scores.size();
  double level = conditional_corrected_level(k, delta, beta, variant);
  if (level >= 1.0) {
    auto r = QuantileResult::infinite(k + 1);
    r.level_saturated = true;
    return r;
  }
  return conformal_quantile(scores, 1.0 - level);
}

struct BetaParams {
  long beta1;
  long beta2;
};

// Parameters of the beta law of the conditional coverage:
// beta1 = K+1-floor((K+1)delta), beta2 = floor((K+1)delta).
inline BetaParams beta_conditional_params(std::size_t k, double delta) {
  if (k < 1) throw std::invalid_argument("beta_conditional_params: K < 1");
  long l = static_cast<long>(std::floor((static_cast<double>(k) + 1.0) * delta));
  if (l < 1) throw std::invalid_argument("beta_conditional_params: floor((K+1)delta) = 0");
  return BetaParams{static_cast<long>(k) + 1 - l, l};
}

// Smallest minimizer of the pinball objective
//   sum_i (level (R_i - q)^+ + (1-level)(q - R_i)^+),
// which is the order-statistic quantile at `level`. This is the closed form of
// the quantile linear program; no LP solver involved.
inline double quantile_lp(const CalibrationScores& scores, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile_lp: level outside (0,1)");
  std::size_t k = scores.size();
  auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(k)));
  if (idx < 1) idx = 1;
  if (idx > k) idx = k;
  return detail::nth_smallest(scores.values(), idx);
}

// State of the adaptive confidence-level update
// delta_{t+1} = delta_t + gamma (target - miss). delta_t is intentionally not
// clamped; see adaptive_quantile for how evaluation stays well defined.
struct AdaptiveState {
  double delta_t;
  double gamma;
  double target_delta;
  std::vector<int> miss_history;
};

inline AdaptiveState make_adaptive_state(double delta0, double gamma, double target_delta) {
  if (!(gamma > 0.0)) throw std::invalid_argument("AdaptiveState: gamma <= 0");
  if (!(target_delta > 0.0 && target_delta < 1.0))
    throw std::invalid_argument("AdaptiveState: target_delta outside (0,1)");
  return AdaptiveState{delta0, gamma, target_delta, {}};
}

inline AdaptiveState adaptive_update(const AdaptiveState& state, int miss) {
  if (miss != 0 && miss != 1) throw std::invalid_argument("adaptive_update: miss must be 0 or 1");
  AdaptiveState next = state;
  next.delta_t = state.delta_t + state.gamma * (state.target_delta - static_cast<double>(miss));
  next.miss_history.push_back(miss);
  return next;
}

// Quantile of the observed history at level 1-delta_t, with the level clamped
// to [1/(t+1), 1] so the rank stays in {1,...,t} even when delta_t has left
// (0,1). No infinity augmentation here (time-series update rule).
inline double adaptive_quantile(const std::vector<double>& history, double delta_t) {
  if (history.empty()) throw std::invalid_argument("adaptive_quantile: empty history");
  double t = static_cast<double>(history.size());
  double level = 1.0 - delta_t;
  level = std::max(level, 1.0 / (t + 1.0));
  level = std::min(level, 1.0);
  auto idx = static_cast<std::size_t>(std::ceil(level * t));
  if (idx < 1) idx = 1;
  if (idx > history.size()) idx = history.size();
  return detail::nth_smallest(history, idx);
}

}  // namespace cat

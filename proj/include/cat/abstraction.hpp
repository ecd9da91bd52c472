#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cat/cp.hpp"
#include "cat/dataset.hpp"
#include "cat/predictors.hpp"
#include "cat/rng.hpp"
#include "cat/robust.hpp"

namespace cat {

enum class AbstractionMode { OpenLoop, ClosedLoop };

// Per-step (and per-agent, when the dataset is partitioned) positive weights
// used inside the single max-score.
struct AlphaWeights {
  std::vector<std::vector<double>> values;  // [step][agent]

  void validate() const {
    for (const auto& row : values)
      for (double v : row)
        if (!(v > 0.0)) throw std::invalid_argument("AlphaWeights: nonpositive weight");
  }
};

// Statistical abstraction: balls of radius radii[step][agent] around the
// predictions. Step i means tau = base_time+1+i (open loop) or the transition
// t = base_time+i -> t+1 (closed loop). Radii may be +inf when the
// calibration set is too small for the required level; that is flagged, not
// thrown.
struct Abstraction {
  AbstractionMode mode;
  std::size_t base_time;
  double delta;
  std::size_t calibration_size;
  std::vector<std::vector<double>> radii;

  std::size_t steps() const { return radii.size(); }
  bool all_finite() const {
    for (const auto& row : radii)
      for (double v : row)
        if (!std::isfinite(v)) return false;
    return true;
  }
  double radius(std::size_t step, std::size_t agent = 0) const { return radii.at(step).at(agent); }
};

namespace detail {

inline double agent_error(const std::vector<double>& truth, const std::vector<double>& pred,
                          std::pair<std::size_t, std::size_t> range) {
  double s = 0.0;
  for (std::size_t j = range.first; j < range.second; ++j) {
    double d = truth[j] - pred[j];
    s += d * d;
  }
  return std::sqrt(s);
}

// errors[i][step][agent] over the whole dataset
inline std::vector<std::vector<std::vector<double>>> prediction_errors(const TrajectoryDataset& data,
                                                                       const Predictor& model,
                                                                       AbstractionMode mode,
                                                                       std::size_t base_time) {
  std::size_t t_end = data.horizon();
  if (base_time >= t_end) throw std::invalid_argument("prediction_errors: base_time at or past horizon");
  if (base_time + 1 < model.order())
    throw std::invalid_argument("prediction_errors: base_time gives prefix shorter than model order");
  std::size_t steps = t_end - base_time;
  std::size_t agents = data.agent_count();

  std::vector<std::vector<std::vector<double>>> out(
      data.size(), std::vector<std::vector<double>>(steps, std::vector<double>(agents, 0.0)));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Trace& z = data.trajectory(i);
    if (mode == AbstractionMode::OpenLoop) {
      std::vector<std::vector<double>> prefix(z.states.begin(),
                                              z.states.begin() + static_cast<std::ptrdiff_t>(base_time + 1));
      PredictionBundle bundle = model.predict_openloop(prefix, t_end);
      for (std::size_t s = 0; s < steps; ++s)
        for (std::size_t a = 0; a < agents; ++a)
          out[i][s][a] =
              agent_error(z.states[base_time + 1 + s], bundle.predictions[s], data.agent_range(a));
    } else {
      std::vector<std::vector<double>> prefix(z.states.begin(),
                                              z.states.begin() + static_cast<std::ptrdiff_t>(base_time + 1));
      for (std::size_t s = 0; s < steps; ++s) {
        std::vector<double> pred = model.step(prefix);
        for (std::size_t a = 0; a < agents; ++a)
          out[i][s][a] = agent_error(z.states[base_time + 1 + s], pred, data.agent_range(a));
        prefix.push_back(z.states[base_time + 1 + s]);
      }
    }
  }
  return out;
}

}  // namespace detail

// Union-bound construction: one conformal quantile per step at the tightened
// level 1 - delta/steps. Conservative but simple.
inline Abstraction abstraction_naive(const TrajectoryDataset& calib, const Predictor& model, double delta,
                                     AbstractionMode mode, std::size_t base_time = 0) {
  auto errs = detail::prediction_errors(calib, model, mode, base_time);
  std::size_t steps = errs.front().size();
  double per_step_delta = delta / static_cast<double>(steps);
  Abstraction out{mode, base_time, delta, calib.size(),
                  std::vector<std::vector<double>>(steps, std::vector<double>(1, 0.0))};
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<double> scores(calib.size());
    for (std::size_t i = 0; i < calib.size(); ++i) {
      // full-vector error: the union-bound construction has no agent structure
      double total = 0.0;
      for (std::size_t a = 0; a < calib.agent_count(); ++a) total += errs[i][s][a] * errs[i][s][a];
      scores[i] = std::sqrt(total);
    }
    QuantileResult q = conformal_quantile(CalibrationScores(scores), per_step_delta);
    out.radii[s][0] = q.is_finite() ? q.value() : std::numeric_limits<double>::infinity();
  }
  return out;
}

// alpha_step = 1 / (max prediction error over the tune set). A step with zero
// max error borrows the largest finite weight; if every step is exact the
// weights are uniform.
inline AlphaWeights normalization_closed_form(const TrajectoryDataset& tune, const Predictor& model,
                                              AbstractionMode mode, std::size_t base_time = 0) {
  if (tune.split() == Split::Calibrate || tune.split() == Split::Test)
    throw std::invalid_argument("normalization_closed_form: weights must not be tuned on calibrate/test");
  auto errs = detail::prediction_errors(tune, model, mode, base_time);
  std::size_t steps = errs.front().size();
  std::size_t agents = tune.agent_count();
  AlphaWeights alpha{std::vector<std::vector<double>>(steps, std::vector<double>(agents, 0.0))};
  double largest_finite = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    for (std::size_t a = 0; a < agents; ++a) {
      double m = 0.0;
      for (std::size_t i = 0; i < tune.size(); ++i) m = std::max(m, errs[i][s][a]);
      alpha.values[s][a] = m > 0.0 ? 1.0 / m : 0.0;
      if (m > 0.0) largest_finite = std::max(largest_finite, 1.0 / m);
    }
  }
  double fallback = largest_finite > 0.0 ? largest_finite : 1.0;
  for (auto& row : alpha.values)
    for (double& v : row)
      if (v == 0.0) v = fallback;
  return alpha;
}

namespace detail {

inline QuantileResult alpha_objective(const std::vector<std::vector<std::vector<double>>>& errs,
                                      const AlphaWeights& alpha, double delta) {
  std::vector<double> scores(errs.size());
  for (std::size_t i = 0; i < errs.size(); ++i) {
    double m = 0.0;
    for (std::size_t s = 0; s < errs[i].size(); ++s)
      for (std::size_t a = 0; a < errs[i][s].size(); ++a)
        m = std::max(m, alpha.values[s][a] * errs[i][s][a]);
    scores[i] = m;
  }
  return conformal_quantile(CalibrationScores(scores), delta);
}

inline bool better(const QuantileResult& a, const QuantileResult& b) {
  if (a.is_infinite()) return false;
  if (b.is_infinite()) return true;
  return a.value() < b.value();
}

inline void project_simplex(AlphaWeights& alpha) {
  double total = 0.0;
  for (const auto& row : alpha.values)
    for (double v : row) total += v;
  for (auto& row : alpha.values)
    for (double& v : row) v = std::max(v / total, 1e-12);
}

}  // namespace detail

// Heuristic stand-in for the exact alpha optimization: multi-start coordinate
// search on the simplex, minimizing the 1-delta quantile of the max-score
// over the tune set. Contract: never worse on the tune set than the
// closed-form weights rescaled to the simplex (explicit fallback).
inline AlphaWeights optimize_alpha(const TrajectoryDataset& tune, const Predictor& model, double delta,
                                   AbstractionMode mode, std::size_t base_time = 0,
                                   std::uint64_t seed = 0x5EED) {
  auto errs = detail::prediction_errors(tune, model, mode, base_time);
  std::size_t steps = errs.front().size();
  std::size_t agents = tune.agent_count();

  AlphaWeights closed = normalization_closed_form(tune, model, mode, base_time);
  detail::project_simplex(closed);
  QuantileResult closed_obj = detail::alpha_objective(errs, closed, delta);

  AlphaWeights best = closed;
  QuantileResult best_obj = closed_obj;

  Rng rng(seed);
  constexpr int kRestarts = 4;
  for (int restart = 0; restart < kRestarts; ++restart) {
    AlphaWeights cur = closed;
    if (restart > 0) {
      Rng stream = rng.substream(static_cast<std::uint64_t>(restart));
      for (auto& row : cur.values)
        for (double& v : row) v = -std::log(std::max(stream.uniform01(), 1e-300));
      detail::project_simplex(cur);
    }
    QuantileResult cur_obj = detail::alpha_objective(errs, cur, delta);
    double step = 0.5;
    while (step > 1e-3) {
      bool improved = false;
      for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t a = 0; a < agents; ++a) {
          for (double factor : {1.0 + step, 1.0 / (1.0 + step)}) {
            AlphaWeights cand = cur;
            cand.values[s][a] *= factor;
            detail::project_simplex(cand);
            QuantileResult obj = detail::alpha_objective(errs, cand, delta);
            if (detail::better(obj, cur_obj)) {
              cur = cand;
              cur_obj = obj;
              improved = true;
            }
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (detail::better(cur_obj, best_obj)) {
      best = cur;
      best_obj = cur_obj;
    }
  }
  return best;
}

// Single max-score construction (with the multi-agent variant when the
// dataset is partitioned): R_i = max over steps/agents of alpha * error,
// C from one conformal quantile at level 1-delta, radii C / alpha.
inline Abstraction abstraction_single_score(const TrajectoryDataset& calib, const Predictor& model,
                                            double delta, const AlphaWeights& alpha, AbstractionMode mode,
                                            std::size_t base_time = 0,
                                            const std::optional<ShiftSpec>& shift = std::nullopt) {
  alpha.validate();
  auto errs = detail::prediction_errors(calib, model, mode, base_time);
  std::size_t steps = errs.front().size();
  std::size_t agents = calib.agent_count();
  if (alpha.values.size() != steps || alpha.values.front().size() != agents)
    throw std::invalid_argument("abstraction_single_score: alpha shape mismatch");

  std::vector<double> scores(calib.size());
  for (std::size_t i = 0; i < calib.size(); ++i) {
    double m = 0.0;
    for (std::size_t s = 0; s < steps; ++s)
      for (std::size_t a = 0; a < agents; ++a) m = std::max(m, alpha.values[s][a] * errs[i][s][a]);
    scores[i] = m;
  }
  QuantileResult q = shift ? robust_quantile(CalibrationScores(scores), delta, *shift)
                           : conformal_quantile(CalibrationScores(scores), delta);

  Abstraction out{mode, base_time, delta, calib.size(),
                  std::vector<std::vector<double>>(steps, std::vector<double>(agents, 0.0))};
  for (std::size_t s = 0; s < steps; ++s)
    for (std::size_t a = 0; a < agents; ++a)
      out.radii[s][a] = q.is_finite() ? q.value() / alpha.values[s][a]
                                      : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace cat

#pragma once

#include <cstddef>
#include <stdexcept>
#include <variant>
#include <vector>

#include "cat/dataset.hpp"
#include "cat/linalg.hpp"

namespace cat {

// tau-step-ahead forecasts made at base_time: rows are e_hat_{tau|t} for
// tau = t+1 .. t+rows.
struct PredictionBundle {
  std::size_t base_time;
  std::vector<std::vector<double>> predictions;

  const std::vector<double>& at(std::size_t tau) const {
    if (tau <= base_time || tau - base_time > predictions.size())
      throw std::out_of_range("PredictionBundle: tau outside forecast window");
    return predictions[tau - base_time - 1];
  }
};

struct PredictorConfig {
  enum class Kind { ConstantVelocity, RidgeAr } kind = Kind::ConstantVelocity;
  std::size_t order = 2;   // RidgeAr only
  double ridge = 1e-6;     // RidgeAr only
};

// Trajectory predictor mu: either the constant-velocity extrapolator or a
// pooled ridge autoregression of order p. Fitted once on the train split,
// immutable afterwards.
class Predictor {
 public:
  static Predictor constant_velocity(std::size_t dim) {
    Predictor p;
    p.dim_ = dim;
    p.cv_ = true;
    return p;
  }

  static Predictor fit(const TrajectoryDataset& train, const PredictorConfig& cfg) {
    if (train.split() != Split::Train)
      throw std::invalid_argument(std::string("Predictor::fit: refusing dataset tagged '") +
                                  split_name(train.split()) + "'; predictors are fit on the train split");
    if (cfg.kind == PredictorConfig::Kind::ConstantVelocity) return constant_velocity(train.dim());
    return fit_ridge_ar(train, cfg.order, cfg.ridge);
  }

  std::size_t dim() const { return dim_; }
  // minimum prefix length needed to predict
  std::size_t order() const { return cv_ ? 1 : order_; }

  // one-step prediction from the given prefix (most recent state last)
  std::vector<double> step(const std::vector<std::vector<double>>& prefix) const {
    if (prefix.size() < order()) throw std::invalid_argument("Predictor: prefix shorter than model order");
    if (cv_) {
      const auto& last = prefix.back();
      std::vector<double> out(last);
      if (prefix.size() >= 2) {
        const auto& prev = prefix[prefix.size() - 2];
        for (std::size_t d = 0; d < dim_; ++d) out[d] += last[d] - prev[d];
      }
      return out;
    }
    std::vector<double> out(dim_, 0.0);
    for (std::size_t d = 0; d < dim_; ++d) {
      const auto& beta = coef_[d];
      double v = beta.back();  // intercept
      std::size_t f = 0;
      for (std::size_t lag = 0; lag < order_; ++lag) {
        const auto& z = prefix[prefix.size() - 1 - lag];
        for (std::size_t j = 0; j < dim_; ++j) v += beta[f++] * z[j];
      }
      out[d] = v;
    }
    return out;
  }

  // iterated rollout feeding predictions back as inputs, up to time `horizon`
  PredictionBundle predict_openloop(const std::vector<std::vector<double>>& prefix,
                                    std::size_t horizon) const {
    if (prefix.empty() || prefix.size() < order())
      throw std::invalid_argument("predict_openloop: prefix shorter than model order");
    std::size_t t = prefix.size() - 1;
    if (horizon < t) throw std::invalid_argument("predict_openloop: horizon before base time");
    PredictionBundle out{t, {}};
    std::vector<std::vector<double>> extended = prefix;
    for (std::size_t tau = t + 1; tau <= horizon; ++tau) {
      extended.push_back(step(extended));
      out.predictions.push_back(extended.back());
    }
    return out;
  }

  // e_hat_{t+1|t} for each t, always conditioning on the true observed prefix
  std::vector<std::vector<double>> predict_onestep_series(const Trace& z) const {
    if (z.length() < order() + 1)
      throw std::invalid_argument("predict_onestep_series: trajectory shorter than order+1");
    std::vector<std::vector<double>> out;
    std::vector<std::vector<double>> prefix;
    prefix.reserve(z.length());
    for (std::size_t t = 0; t + 1 < z.length(); ++t) {
      prefix.push_back(z.states[t]);
      if (prefix.size() >= order()) out.push_back(step(prefix));
    }
    return out;
  }

  bool is_constant_velocity() const { return cv_; }

 private:
  static Predictor fit_ridge_ar(const TrajectoryDataset& train, std::size_t p, double lambda) {
    if (p < 1) throw std::invalid_argument("RidgeAr: order must be >= 1");
    if (p > 10) throw std::invalid_argument("RidgeAr: order capped at 10");
    if (lambda < 0.0) throw std::invalid_argument("RidgeAr: negative ridge");
    std::size_t n = train.dim();
    if (train.length() <= p) throw std::invalid_argument("RidgeAr: trajectories no longer than order");
    std::size_t nf = p * n + 1;

    // pooled normal equations, shared Gram matrix across output dims
    std::vector<double> gram(nf * nf, 0.0);
    std::vector<std::vector<double>> rhs(n, std::vector<double>(nf, 0.0));
    std::vector<double> x(nf);
    for (const Trace& z : train.trajectories()) {
      for (std::size_t t = p - 1; t + 1 < z.length(); ++t) {
        std::size_t f = 0;
        for (std::size_t lag = 0; lag < p; ++lag)
          for (std::size_t j = 0; j < n; ++j) x[f++] = z.states[t - lag][j];
        x[f] = 1.0;
        for (std::size_t i = 0; i < nf; ++i)
          for (std::size_t j = 0; j < nf; ++j) gram[i * nf + j] += x[i] * x[j];
        for (std::size_t d = 0; d < n; ++d)
          for (std::size_t i = 0; i < nf; ++i) rhs[d][i] += x[i] * z.states[t + 1][d];
      }
    }
    for (std::size_t i = 0; i < nf; ++i) gram[i * nf + i] += lambda;

    Predictor out;
    out.dim_ = n;
    out.cv_ = false;
    out.order_ = p;
    out.coef_.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
      try {
        out.coef_[d] = solve_dense(gram, rhs[d]);
      } catch (const std::runtime_error&) {
        throw std::runtime_error("RidgeAr: degenerate normal equations; use a ridge penalty lambda > 0");
      }
    }
    return out;
  }

  std::size_t dim_ = 0;
  bool cv_ = true;
  std::size_t order_ = 1;
  std::vector<std::vector<double>> coef_;  // per output dim: p*n lag weights + intercept
};

}  // namespace cat

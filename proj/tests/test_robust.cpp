#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cat/cp.hpp"
#include "cat/rng.hpp"
#include "cat/robust.hpp"

using namespace cat;

TEST_CASE("robust_adjusted_level, total variation", "[robust]") {
  SECTION("epsilon 0 reduces to the (1+1/K) level correction") {
    RobustLevel lvl = robust_adjusted_level(100, 0.05, {Divergence::TotalVariation, 0.0});
    CHECK_FALSE(lvl.degenerate);
    CHECK(lvl.delta_tilde == Catch::Approx(0.0405).margin(1e-12));
  }
  SECTION("aircraft-surrogate setting") {
    RobustLevel lvl = robust_adjusted_level(700, 0.2, {Divergence::TotalVariation, 0.129});
    CHECK_FALSE(lvl.degenerate);
    // closed TV chain: 1 - (1+1/700) * min(0.8+0.129, 1) ... = 0.06967...
    CHECK(lvl.delta_tilde == Catch::Approx(0.0696728571428571).margin(1e-9));
  }
  SECTION("shift dominating the confidence budget degenerates") {
    RobustLevel lvl = robust_adjusted_level(100, 0.05, {Divergence::TotalVariation, 0.95});
    CHECK(lvl.degenerate);
  }
}

TEST_CASE("robust_quantile at epsilon 0 equals conformal_quantile", "[robust]") {
  Rng rng(42);
  for (int it = 0; it < 500; ++it) {
    Rng stream = rng.substream(static_cast<std::uint64_t>(it));
    double delta = stream.uniform(0.02, 0.5);
    std::size_t k = min_calibration_size(delta) + stream.next_u64() % 100;
    std::vector<double> v(k);
    for (double& x : v) x = stream.gaussian(0.0, 2.0);
    CalibrationScores s(v);
    QuantileResult vanilla = conformal_quantile(s, delta);
    QuantileResult robust = robust_quantile(s, delta, {Divergence::TotalVariation, 0.0});
    REQUIRE(vanilla.is_finite());
    REQUIRE(robust.is_finite());
    CHECK(robust.value() == vanilla.value());
  }
}

TEST_CASE("robust_quantile is monotone in epsilon", "[robust]") {
  Rng rng(43);
  std::vector<double> v(300);
  for (double& x : v) x = rng.gaussian(0.0, 1.0);
  CalibrationScores s(v);
  for (auto div : {Divergence::TotalVariation, Divergence::KL}) {
    double prev = -1e300;
    for (double eps : {0.0, 0.01, 0.05, 0.1, 0.2, 0.4}) {
      QuantileResult q = robust_quantile(s, 0.1, {div, eps});
      REQUIRE(q.is_finite());
      CHECK(q.value() >= prev);
      prev = q.value();
    }
  }
}

TEST_CASE("robust_quantile against an independent chain evaluation", "[robust]") {
  // scores 1..100, delta 0.1, TV eps 0.05: recompute the delta-tilde chain
  // with the closed forms written out long-hand, then pick by sorting.
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = static_cast<double>(i + 1);
  const double delta = 0.1, eps = 0.05;
  const double k = 100.0;
  double ginv = std::min(1.0 - delta + eps, 1.0);
  double g_arg = std::min((1.0 + 1.0 / k) * ginv, 1.0);
  double delta_n = 1.0 - std::max(g_arg - eps, 0.0);
  double delta_tilde = 1.0 - std::min(1.0 - delta_n + eps, 1.0);
  auto p = static_cast<std::size_t>(std::ceil((1.0 - delta_tilde) * k));
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  double expected = sorted[p - 1];

  QuantileResult q = robust_quantile(CalibrationScores(v), delta, {Divergence::TotalVariation, eps});
  REQUIRE(q.is_finite());
  CHECK(q.value() == expected);
}

TEST_CASE("KL divergence route", "[robust]") {
  SECTION("epsilon 0 recovers the identity maps up to bisection tolerance") {
    ShiftSpec kl{Divergence::KL, 0.0};
    for (double b : {0.1, 0.4, 0.77, 0.95}) {
      CHECK(shift_g(b, kl) == Catch::Approx(b).margin(1e-8));
      CHECK(shift_g_inverse(b, kl) == Catch::Approx(b).margin(1e-8));
    }
    RobustLevel lvl = robust_adjusted_level(100, 0.05, kl);
    CHECK(lvl.delta_tilde == Catch::Approx(0.0405).margin(1e-6));
  }
  SECTION("g and its inverse are consistent") {
    ShiftSpec kl{Divergence::KL, 0.05};
    for (double tau : {0.2, 0.5, 0.8, 0.95}) {
      double beta = shift_g_inverse(tau, kl);
      CHECK(shift_g(beta, kl) <= tau + 1e-7);
    }
    // g is nondecreasing
    double prev = -1.0;
    for (double b = 0.0; b <= 1.0; b += 0.05) {
      double g = shift_g(b, kl);
      CHECK(g >= prev - 1e-12);
      prev = g;
    }
  }
  SECTION("KL shift is more conservative than no shift") {
    Rng rng(11);
    std::vector<double> v(500);
    for (double& x : v) x = rng.gaussian(0.0, 1.0);
    CalibrationScores s(v);
    QuantileResult plain = conformal_quantile(s, 0.1);
    QuantileResult shifted = robust_quantile(s, 0.1, {Divergence::KL, 0.1});
    REQUIRE(plain.is_finite());
    REQUIRE(shifted.is_finite());
    CHECK(shifted.value() >= plain.value());
  }
}

TEST_CASE("degenerate robust level falls back to the max score, flagged", "[robust]") {
  std::vector<double> v{3.0, 1.0, 9.0, 4.0};
  QuantileResult q = robust_quantile(CalibrationScores(v), 0.05, {Divergence::TotalVariation, 0.95});
  REQUIRE(q.is_finite());
  CHECK(q.value() == 9.0);
  CHECK(q.level_saturated);
}

TEST_CASE("ShiftSpec validation", "[robust]") {
  CHECK_THROWS_AS(robust_adjusted_level(10, 0.1, {Divergence::TotalVariation, -0.1}),
                  std::invalid_argument);
}

#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "cat/rng.hpp"
#include "cat/stl.hpp"
#include "cat/stl_parse.hpp"

using namespace cat;

namespace {

Trace scalar_trace(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> s;
  for (double x : xs) s.push_back({x});
  return Trace(std::move(s));
}

SignalLayout xy_layout() { return SignalLayout{{"x", "y"}}; }

// random formula over a 2-d layout; depth-bounded
Formula random_formula(Rng& rng, int depth) {
  auto pick = rng.next_u64() % (depth <= 0 ? 2u : 9u);
  SignalLayout layout = xy_layout();
  switch (pick) {
    case 0: {
      Predicate::Affine f;
      f.a = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
      if (f.a[0] == 0.0 && f.a[1] == 0.0) f.a[0] = 1.0;
      f.b = rng.uniform(-1.0, 1.0);
      return Formula::atom(Predicate("p", std::move(f)));
    }
    case 1: {
      Predicate::Ball f;
      f.sel = {0, 1};
      f.center = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      f.radius = rng.uniform(0.2, 1.5);
      return Formula::atom(Predicate("b", std::move(f)));
    }
    case 2:
      return Formula::negation(random_formula(rng, depth - 1));
    case 3:
      return Formula::conj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 4:
      return Formula::disj(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 5:
      return Formula::implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    case 6: {
      int lo = static_cast<int>(rng.next_u64() % 3);
      int hi = lo + static_cast<int>(rng.next_u64() % 3);
      return Formula::always(lo, hi, random_formula(rng, depth - 1));
    }
    case 7: {
      int lo = static_cast<int>(rng.next_u64() % 3);
      int hi = lo + static_cast<int>(rng.next_u64() % 3);
      return Formula::eventually(lo, hi, random_formula(rng, depth - 1));
    }
    default: {
      int lo = static_cast<int>(rng.next_u64() % 2);
      int hi = lo + static_cast<int>(rng.next_u64() % 3);
      return Formula::until(lo, hi, random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    }
  }
}

Trace random_trace(Rng& rng, std::size_t len) {
  std::vector<std::vector<double>> s(len);
  for (auto& st : s) st = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  return Trace(std::move(s));
}

}  // namespace

TEST_CASE("parse_formula on the aircraft-style text", "[stl]") {
  SignalLayout layout{{"alt", "spd"}};
  Formula f = parse_formula("G[0,150](alt >= 100 and (alt <= 300 => spd <= 650))", layout);
  REQUIRE(f.kind() == FormulaKind::Always);
  CHECK(f.lo() == 0);
  CHECK(f.hi() == 150);
  const Formula& body = f.child(0);
  REQUIRE(body.kind() == FormulaKind::And);
  CHECK(body.child(0).kind() == FormulaKind::Atom);
  REQUIRE(body.child(1).kind() == FormulaKind::Implies);
  CHECK(body.child(1).child(0).kind() == FormulaKind::Atom);
  CHECK(body.child(1).child(1).kind() == FormulaKind::Atom);
  CHECK(horizon(f) == 150);
}

TEST_CASE("parse_formula basics", "[stl]") {
  SignalLayout layout{{"x"}};
  CHECK(parse_formula("true", layout).kind() == FormulaKind::True);

  Formula u = parse_formula("(x >= 0) U[0,2] (x >= 2)", layout);
  REQUIRE(u.kind() == FormulaKind::Until);
  CHECK(u.lo() == 0);
  CHECK(u.hi() == 2);
  CHECK(u.child(0).kind() == FormulaKind::Atom);
  CHECK(u.child(1).kind() == FormulaKind::Atom);

  SECTION("precedence: not > and > or > =>") {
    Formula f = parse_formula("not x >= 0 and x <= 1 or x >= 2 => x <= 3", layout);
    REQUIRE(f.kind() == FormulaKind::Implies);
    REQUIRE(f.child(0).kind() == FormulaKind::Or);
    REQUIRE(f.child(0).child(0).kind() == FormulaKind::And);
    CHECK(f.child(0).child(0).child(0).kind() == FormulaKind::Not);
  }
  SECTION("ball atom") {
    SignalLayout xy = xy_layout();
    Formula f = parse_formula("ball(x,y; 1.5,2.5; 0.6)", xy);
    REQUIRE(f.kind() == FormulaKind::Atom);
    const auto& b = f.predicate().ball();
    CHECK(b.sel == std::vector<std::size_t>{0, 1});
    CHECK(b.radius == 0.6);
    CHECK(f.predicate().lipschitz() == 1.0);
  }
  SECTION("errors carry positions and names") {
    CHECK_THROWS_AS(parse_formula("x >=", layout), ParseError);
    CHECK_THROWS_AS(parse_formula("z >= 0", layout), ParseError);
    CHECK_THROWS_AS(parse_formula("G[3,1] x >= 0", layout), ParseError);
    CHECK_THROWS_AS(parse_formula("x >= 0 x <= 1", layout), ParseError);
    CHECK_THROWS_WITH(parse_formula("spd >= 0", layout),
                      Catch::Matchers::ContainsSubstring("spd"));
  }
}

TEST_CASE("parser round-trips through print_formula", "[stl]") {
  SignalLayout layout = xy_layout();
  std::vector<std::string> texts = {
      "G[0,150](x >= 100 and (x <= 300 => y <= 650))",
      "(x >= 0) U[0,2] (x >= 2)",
      "not (x >= 0 or ball(x,y; 0,0; 1))",
      "F[2,5] G[0,3] (x <= 1 and y >= -1)",
      "true",
  };
  for (const auto& text : texts) {
    Formula f = parse_formula(text, layout);
    Formula g = parse_formula(print_formula(f), layout);
    CHECK(f == g);
  }
}

TEST_CASE("horizon recursion", "[stl]") {
  SignalLayout layout{{"x"}};
  CHECK(horizon(parse_formula("G[0,5] F[0,3] x >= 0", layout)) == 8);
  CHECK(horizon(parse_formula("x >= 0", layout)) == 0);
  CHECK(horizon(parse_formula("(x >= 0) U[2,4] (x >= 1)", layout)) == 4);
}

TEST_CASE("boolean and quantitative semantics on worked traces", "[stl]") {
  SignalLayout layout{{"x"}};
  Formula g = parse_formula("G[0,2] x >= 0", layout);
  Trace t1 = scalar_trace({1.0, 2.0, -0.5});
  CHECK_FALSE(boolean_sat(g, t1, 0));
  ExtReal r = robustness(g, t1, 0);
  REQUIRE(r.is_finite());
  CHECK(r.value() == -0.5);

  Formula f = parse_formula("F[0,2] x >= 1", layout);
  Trace t2 = scalar_trace({0.0, 0.5, 3.0});
  CHECK(boolean_sat(f, t2, 0));
  CHECK(robustness(f, t2, 0).value() == 2.0);

  Formula u = parse_formula("(x >= 0) U[0,2] (x >= 2)", layout);
  Trace t3 = scalar_trace({1.0, 0.5, 2.5});
  CHECK(robustness(u, t3, 0).value() == 0.5);
  CHECK(boolean_sat(u, t3, 0));

  SECTION("trace too short names the required length") {
    CHECK_THROWS_WITH(robustness(g, scalar_trace({1.0}), 0),
                      Catch::Matchers::ContainsSubstring("need length >= 3"));
  }
  SECTION("True gives the +inf marker") {
    CHECK(robustness(Formula::truth(), t1, 0).is_plus_inf());
  }
}

TEST_CASE("negation normal form", "[stl]") {
  SignalLayout layout = xy_layout();
  SECTION("De Morgan over conjunction") {
    Formula f = parse_formula("not (x >= 0 and y >= 0)", layout);
    Formula n = to_negation_normal_form(f);
    REQUIRE(n.kind() == FormulaKind::Or);
    CHECK(n.child(0).kind() == FormulaKind::Atom);
    CHECK(n.child(1).kind() == FormulaKind::Atom);
    CHECK(is_negation_normal(n));
  }
  SECTION("temporal duality") {
    Formula f = parse_formula("not F[0,3] x >= 0", layout);
    Formula n = to_negation_normal_form(f);
    REQUIRE(n.kind() == FormulaKind::Always);
    CHECK(n.lo() == 0);
    CHECK(n.hi() == 3);
    CHECK(n.child(0).kind() == FormulaKind::Atom);
  }
  SECTION("random formulas preserve robustness exactly") {
    Rng rng(31337);
    for (int it = 0; it < 1000; ++it) {
      Rng stream = rng.substream(static_cast<std::uint64_t>(it));
      Formula f = random_formula(stream, 3);
      Formula n = to_negation_normal_form(f);
      CHECK(is_negation_normal(n));
      CHECK(horizon(n) == horizon(f));
      Trace z = random_trace(stream, static_cast<std::size_t>(horizon(f)) + 2);
      CHECK(robustness(f, z, 0) == robustness(n, z, 0));
      CHECK(boolean_sat(f, z, 0) == boolean_sat(n, z, 0));
    }
  }
}

TEST_CASE("soundness: robustness sign matches boolean semantics", "[stl]") {
  Rng rng(909);
  int nonzero = 0;
  for (int it = 0; it < 1000; ++it) {
    Rng stream = rng.substream(static_cast<std::uint64_t>(it));
    Formula f = random_formula(stream, 3);
    Trace z = random_trace(stream, static_cast<std::size_t>(horizon(f)) + 3);
    bool sat = boolean_sat(f, z, 0);
    ExtReal rho = robustness(f, z, 0);
    if (rho.is_plus_inf()) {
      CHECK(sat);
      continue;
    }
    if (rho.is_minus_inf()) {
      CHECK_FALSE(sat);
      continue;
    }
    if (rho.value() > 0.0) {
      CHECK(sat);
      ++nonzero;
    } else if (rho.value() < 0.0) {
      CHECK_FALSE(sat);
      ++nonzero;
    }
  }
  CHECK(nonzero > 800);  // ties at exactly zero should be rare
}

TEST_CASE("horizon sufficiency: suffix states past t+horizon never matter", "[stl]") {
  Rng rng(515);
  for (int it = 0; it < 300; ++it) {
    Rng stream = rng.substream(static_cast<std::uint64_t>(it));
    Formula f = random_formula(stream, 3);
    int t = static_cast<int>(stream.next_u64() % 2);
    std::size_t need = static_cast<std::size_t>(t + horizon(f)) + 1;
    Trace z = random_trace(stream, need);
    ExtReal base = robustness(f, z, t);
    auto extended = z.states;
    for (int extra = 0; extra < 3; ++extra) extended.push_back({stream.uniform(-9, 9), stream.uniform(-9, 9)});
    CHECK(robustness(f, Trace(extended), t) == base);
  }
}

#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace cat {

// Extended real for robustness values: True contributes +inf, which is a tag
// propagated through min/max, never a float infinity in arithmetic.
class ExtReal {
 public:
  static ExtReal finite(double v) { return ExtReal(0, v); }
  static ExtReal plus_inf() { return ExtReal(+1, 0.0); }
  static ExtReal minus_inf() { return ExtReal(-1, 0.0); }

  bool is_finite() const { return tag_ == 0; }
  bool is_plus_inf() const { return tag_ > 0; }
  bool is_minus_inf() const { return tag_ < 0; }
  double value() const {
    if (tag_ != 0) throw std::logic_error("ExtReal: value() on infinite");
    return v_;
  }

  ExtReal negate() const { return ExtReal(-tag_, -v_); }

  // x - c for finite c; infinities absorb the shift
  ExtReal shift_down(double c) const { return tag_ == 0 ? finite(v_ - c) : *this; }

  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    if (a.tag_ != b.tag_) return a.tag_ < b.tag_;
    return a.tag_ == 0 && a.v_ < b.v_;
  }
  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    return a.tag_ == b.tag_ && (a.tag_ != 0 || a.v_ == b.v_);
  }
  friend ExtReal min(const ExtReal& a, const ExtReal& b) { return b < a ? b : a; }
  friend ExtReal max(const ExtReal& a, const ExtReal& b) { return a < b ? b : a; }

 private:
  ExtReal(int tag, double v) : tag_(tag), v_(v) {}
  int tag_;
  double v_;
};

// Atomic constraint h(z) >= 0 over a state vector, with its Lipschitz
// constant in z (Euclidean).
class Predicate {
 public:
  struct Affine {
    std::vector<double> a;
    double b;
  };
  struct Ball {
    std::vector<std::size_t> sel;
    std::vector<double> center;
    double radius;
    bool complement = false;  // complement: h = ||z[sel]-c|| - r
  };

  Predicate(std::string id, Affine f) : id_(std::move(id)), form_(std::move(f)) {
    const auto& a = std::get<Affine>(form_).a;
    double s = 0.0;
    for (double v : a) s += v * v;
    if (s <= 0.0) throw std::invalid_argument("Predicate: affine with zero gradient");
    lipschitz_ = std::sqrt(s);
  }
  Predicate(std::string id, Ball f) : id_(std::move(id)), form_(std::move(f)) {
    const auto& b = std::get<Ball>(form_);
    if (b.sel.size() != b.center.size()) throw std::invalid_argument("Predicate: ball selector/center mismatch");
    lipschitz_ = 1.0;
  }

  const std::string& id() const { return id_; }
  double lipschitz() const { return lipschitz_; }
  bool is_affine() const { return std::holds_alternative<Affine>(form_); }
  const Affine& affine() const { return std::get<Affine>(form_); }
  const Ball& ball() const { return std::get<Ball>(form_); }

  double eval(std::span<const double> z) const {
    if (const auto* f = std::get_if<Affine>(&form_)) {
      double s = f->b;
      if (f->a.size() > z.size()) throw std::invalid_argument("Predicate: state dimension too small");
      for (std::size_t i = 0; i < f->a.size(); ++i) s += f->a[i] * z[i];
      return s;
    }
    const auto& f = std::get<Ball>(form_);
    double s = 0.0;
    for (std::size_t i = 0; i < f.sel.size(); ++i) {
      if (f.sel[i] >= z.size()) throw std::invalid_argument("Predicate: selector out of range");
      double d = z[f.sel[i]] - f.center[i];
      s += d * d;
    }
    double h = f.radius - std::sqrt(s);
    return f.complement ? -h : h;
  }

  // h -> -h
  Predicate negated() const {
    if (const auto* f = std::get_if<Affine>(&form_)) {
      Affine g = *f;
      for (double& v : g.a) v = -v;
      g.b = -g.b;
      return Predicate("not (" + id_ + ")", std::move(g));
    }
    Ball g = std::get<Ball>(form_);
    g.complement = !g.complement;
    return Predicate("not (" + id_ + ")", std::move(g));
  }

  friend bool operator==(const Predicate& x, const Predicate& y) {
    if (x.form_.index() != y.form_.index()) return false;
    if (x.is_affine()) {
      return x.affine().a == y.affine().a && x.affine().b == y.affine().b;
    }
    const auto &a = x.ball(), &b = y.ball();
    return a.sel == b.sel && a.center == b.center && a.radius == b.radius && a.complement == b.complement;
  }

 private:
  std::string id_;
  std::variant<Affine, Ball> form_;
  double lipschitz_;
};

// Finite trace of uniform-dimension states, start time 0.
struct Trace {
  std::vector<std::vector<double>> states;

  explicit Trace(std::vector<std::vector<double>> s) : states(std::move(s)) {
    if (states.empty()) throw std::invalid_argument("Trace: empty");
    for (const auto& st : states) {
      if (st.size() != states.front().size()) throw std::invalid_argument("Trace: ragged states");
      for (double v : st)
        if (!std::isfinite(v)) throw std::invalid_argument("Trace: non-finite entry");
    }
  }

  std::size_t length() const { return states.size(); }
  std::size_t dim() const { return states.front().size(); }
};

enum class FormulaKind { True, False, Atom, Not, And, Or, Implies, Always, Eventually, Until };

// Immutable STL formula tree over discrete time with bounded integer
// intervals. False never appears in parsed formulas; it closes negation
// normal form over "not true".
class Formula {
  struct Node {
    FormulaKind kind;
    std::shared_ptr<const Predicate> pred;  // Atom
    std::vector<Formula> kids;
    int lo = 0, hi = 0;
  };

 public:
  static Formula truth() { return make(FormulaKind::True, nullptr, {}, 0, 0); }
  static Formula falsity() { return make(FormulaKind::False, nullptr, {}, 0, 0); }
  static Formula atom(Predicate p) {
    return make(FormulaKind::Atom, std::make_shared<const Predicate>(std::move(p)), {}, 0, 0);
  }
  static Formula negation(Formula f) { return make(FormulaKind::Not, nullptr, {std::move(f)}, 0, 0); }
  static Formula conj(Formula a, Formula b) {
    return make(FormulaKind::And, nullptr, {std::move(a), std::move(b)}, 0, 0);
  }
  static Formula disj(Formula a, Formula b) {
    return make(FormulaKind::Or, nullptr, {std::move(a), std::move(b)}, 0, 0);
  }
  static Formula implies(Formula a, Formula b) {
    return make(FormulaKind::Implies, nullptr, {std::move(a), std::move(b)}, 0, 0);
  }
  static Formula always(int lo, int hi, Formula f) {
    check_interval(lo, hi);
    return make(FormulaKind::Always, nullptr, {std::move(f)}, lo, hi);
  }
  static Formula eventually(int lo, int hi, Formula f) {
    check_interval(lo, hi);
    return make(FormulaKind::Eventually, nullptr, {std::move(f)}, lo, hi);
  }
  static Formula until(int lo, int hi, Formula a, Formula b) {
    check_interval(lo, hi);
    return make(FormulaKind::Until, nullptr, {std::move(a), std::move(b)}, lo, hi);
  }

  FormulaKind kind() const { return node_->kind; }
  const Predicate& predicate() const {
    if (!node_->pred) throw std::logic_error("Formula: predicate() on non-atom");
    return *node_->pred;
  }
  const Formula& child(std::size_t i) const { return node_->kids.at(i); }
  std::size_t arity() const { return node_->kids.size(); }
  int lo() const { return node_->lo; }
  int hi() const { return node_->hi; }

  friend bool operator==(const Formula& x, const Formula& y) {
    if (x.kind() != y.kind() || x.arity() != y.arity() || x.lo() != y.lo() || x.hi() != y.hi()) return false;
    if (x.kind() == FormulaKind::Atom && !(x.predicate() == y.predicate())) return false;
    for (std::size_t i = 0; i < x.arity(); ++i)
      if (!(x.child(i) == y.child(i))) return false;
    return true;
  }

 private:
  static void check_interval(int lo, int hi) {
    if (lo < 0 || hi < lo) throw std::invalid_argument("Formula: malformed interval");
  }
  static Formula make(FormulaKind k, std::shared_ptr<const Predicate> p, std::vector<Formula> kids, int lo,
                      int hi) {
    Formula f;
    f.node_ = std::make_shared<const Node>(Node{k, std::move(p), std::move(kids), lo, hi});
    return f;
  }
  std::shared_ptr<const Node> node_;
};

// T^phi: number of additional steps beyond t needed to evaluate the formula.
inline int horizon(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Atom:
      return 0;
    case FormulaKind::Not:
      return horizon(f.child(0));
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
      return std::max(horizon(f.child(0)), horizon(f.child(1)));
    case FormulaKind::Always:
    case FormulaKind::Eventually:
      return f.hi() + horizon(f.child(0));
    case FormulaKind::Until:
      return f.hi() + std::max(horizon(f.child(0)), horizon(f.child(1)));
  }
  throw std::logic_error("horizon: unreachable");
}

namespace detail {

inline void require_trace(const Formula& f, const Trace& z, int t) {
  int need = t + horizon(f) + 1;
  if (t < 0 || static_cast<int>(z.length()) < need)
    throw std::invalid_argument("trace too short: need length >= " + std::to_string(need) + ", have " +
                                std::to_string(z.length()));
}

inline bool sat_rec(const Formula& f, const Trace& z, int t) {
  switch (f.kind()) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom:
      return f.predicate().eval(z.states[static_cast<std::size_t>(t)]) >= 0.0;
    case FormulaKind::Not:
      return !sat_rec(f.child(0), z, t);
    case FormulaKind::And:
      return sat_rec(f.child(0), z, t) && sat_rec(f.child(1), z, t);
    case FormulaKind::Or:
      return sat_rec(f.child(0), z, t) || sat_rec(f.child(1), z, t);
    case FormulaKind::Implies:
      return !sat_rec(f.child(0), z, t) || sat_rec(f.child(1), z, t);
    case FormulaKind::Always: {
      for (int u = t + f.lo(); u <= t + f.hi(); ++u)
        if (!sat_rec(f.child(0), z, u)) return false;
      return true;
    }
    case FormulaKind::Eventually: {
      for (int u = t + f.lo(); u <= t + f.hi(); ++u)
        if (sat_rec(f.child(0), z, u)) return true;
      return false;
    }
    case FormulaKind::Until: {
      for (int u2 = t + f.lo(); u2 <= t + f.hi(); ++u2) {
        if (!sat_rec(f.child(1), z, u2)) continue;
        bool all = true;
        for (int u1 = t; u1 <= u2; ++u1) {
          if (!sat_rec(f.child(0), z, u1)) {
            all = false;
            break;
          }
        }
        if (all) return true;
      }
      return false;
    }
  }
  throw std::logic_error("sat_rec: unreachable");
}

inline ExtReal rho_rec(const Formula& f, const Trace& z, int t) {
  switch (f.kind()) {
    case FormulaKind::True:
      return ExtReal::plus_inf();
    case FormulaKind::False:
      return ExtReal::minus_inf();
    case FormulaKind::Atom:
      return ExtReal::finite(f.predicate().eval(z.states[static_cast<std::size_t>(t)]));
    case FormulaKind::Not:
      return rho_rec(f.child(0), z, t).negate();
    case FormulaKind::And:
      return min(rho_rec(f.child(0), z, t), rho_rec(f.child(1), z, t));
    case FormulaKind::Or:
      return max(rho_rec(f.child(0), z, t), rho_rec(f.child(1), z, t));
    case FormulaKind::Implies:
      return max(rho_rec(f.child(0), z, t).negate(), rho_rec(f.child(1), z, t));
    case FormulaKind::Always: {
      ExtReal r = ExtReal::plus_inf();
      for (int u = t + f.lo(); u <= t + f.hi(); ++u) r = min(r, rho_rec(f.child(0), z, u));
      return r;
    }
    case FormulaKind::Eventually: {
      ExtReal r = ExtReal::minus_inf();
      for (int u = t + f.lo(); u <= t + f.hi(); ++u) r = max(r, rho_rec(f.child(0), z, u));
      return r;
    }
    case FormulaKind::Until: {
      ExtReal r = ExtReal::minus_inf();
      ExtReal run = ExtReal::plus_inf();
      int u1 = t;
      for (int u2 = t + f.lo(); u2 <= t + f.hi(); ++u2) {
        for (; u1 <= u2; ++u1) run = min(run, rho_rec(f.child(0), z, u1));
        r = max(r, min(rho_rec(f.child(1), z, u2), run));
      }
      return r;
    }
  }
  throw std::logic_error("rho_rec: unreachable");
}

}  // namespace detail

inline bool boolean_sat(const Formula& f, const Trace& z, int t = 0) {
  detail::require_trace(f, z, t);
  return detail::sat_rec(f, z, t);
}

inline ExtReal robustness(const Formula& f, const Trace& z, int t = 0) {
  detail::require_trace(f, z, t);
  return detail::rho_rec(f, z, t);
}

namespace detail {

inline Formula nnf_rec(const Formula& f, bool neg);

// not (a U[l,h] b)  ==  and over u in [l,h] of ( G[u,u] not b  or  F[0,u] not a );
// exact under the quantitative semantics.
inline Formula negate_until(const Formula& f) {
  Formula acc = Formula::truth();
  bool first = true;
  for (int u = f.lo(); u <= f.hi(); ++u) {
    Formula part = Formula::disj(Formula::always(u, u, nnf_rec(f.child(1), true)),
                                 Formula::eventually(0, u, nnf_rec(f.child(0), true)));
    acc = first ? part : Formula::conj(std::move(acc), std::move(part));
    first = false;
  }
  return acc;
}

inline Formula nnf_rec(const Formula& f, bool neg) {
  switch (f.kind()) {
    case FormulaKind::True:
      return neg ? Formula::falsity() : Formula::truth();
    case FormulaKind::False:
      return neg ? Formula::truth() : Formula::falsity();
    case FormulaKind::Atom:
      return neg ? Formula::atom(f.predicate().negated()) : f;
    case FormulaKind::Not:
      return nnf_rec(f.child(0), !neg);
    case FormulaKind::And: {
      Formula a = nnf_rec(f.child(0), neg), b = nnf_rec(f.child(1), neg);
      return neg ? Formula::disj(std::move(a), std::move(b)) : Formula::conj(std::move(a), std::move(b));
    }
    case FormulaKind::Or: {
      Formula a = nnf_rec(f.child(0), neg), b = nnf_rec(f.child(1), neg);
      return neg ? Formula::conj(std::move(a), std::move(b)) : Formula::disj(std::move(a), std::move(b));
    }
    case FormulaKind::Implies: {
      // a => b == (not a) or b
      Formula a = nnf_rec(f.child(0), !neg), b = nnf_rec(f.child(1), neg);
      return neg ? Formula::conj(std::move(a), std::move(b)) : Formula::disj(std::move(a), std::move(b));
    }
    case FormulaKind::Always: {
      Formula a = nnf_rec(f.child(0), neg);
      return neg ? Formula::eventually(f.lo(), f.hi(), std::move(a))
                 : Formula::always(f.lo(), f.hi(), std::move(a));
    }
    case FormulaKind::Eventually: {
      Formula a = nnf_rec(f.child(0), neg);
      return neg ? Formula::always(f.lo(), f.hi(), std::move(a))
                 : Formula::eventually(f.lo(), f.hi(), std::move(a));
    }
    case FormulaKind::Until: {
      if (!neg)
        return Formula::until(f.lo(), f.hi(), nnf_rec(f.child(0), false), nnf_rec(f.child(1), false));
      return negate_until(f);
    }
  }
  throw std::logic_error("nnf_rec: unreachable");
}

}  // namespace detail

// Equivalent formula with negations absorbed into the predicates; robustness
// is preserved exactly.
inline Formula to_negation_normal_form(const Formula& f) { return detail::nnf_rec(f, false); }

inline bool is_negation_normal(const Formula& f) {
  if (f.kind() == FormulaKind::Not) return false;
  for (std::size_t i = 0; i < f.arity(); ++i)
    if (!is_negation_normal(f.child(i))) return false;
  return true;
}

}  // namespace cat

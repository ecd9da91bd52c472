#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cat/stl.hpp"

namespace cat {

// Named signal components of a trace; atoms in formula text resolve against
// this table.
struct SignalLayout {
  std::vector<std::string> names;

  std::size_t dim() const { return names.size(); }
  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == id) return i;
    throw std::invalid_argument("unknown signal component '" + std::string(id) + "'");
  }
  bool contains(std::string_view id) const {
    for (const auto& n : names)
      if (n == id) return true;
    return false;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

namespace detail {

struct Lexer {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool try_symbol(std::string_view sym) {
    skip_ws();
    if (text.substr(pos, sym.size()) == sym) {
      pos += sym.size();
      return true;
    }
    return false;
  }
  void expect_symbol(std::string_view sym) {
    if (!try_symbol(sym)) throw ParseError("expected '" + std::string(sym) + "'", pos);
  }
  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  // peek an identifier without consuming
  std::string peek_ident() {
    skip_ws();
    if (pos >= text.size() || !ident_start(text[pos])) return {};
    std::size_t e = pos;
    while (e < text.size() && ident_char(text[e])) ++e;
    return std::string(text.substr(pos, e - pos));
  }
  std::string take_ident() {
    std::string id = peek_ident();
    if (id.empty()) throw ParseError("expected identifier", pos);
    pos += id.size();
    return id;
  }
  bool try_keyword(std::string_view kw) {
    if (peek_ident() == kw) {
      pos += kw.size();
      return true;
    }
    return false;
  }
  double take_number() {
    skip_ws();
    std::size_t start = pos;
    std::size_t e = pos;
    if (e < text.size() && (text[e] == '-' || text[e] == '+')) ++e;
    bool digits = false;
    while (e < text.size() && (std::isdigit(static_cast<unsigned char>(text[e])) || text[e] == '.')) {
      digits = digits || std::isdigit(static_cast<unsigned char>(text[e]));
      ++e;
    }
    if (e < text.size() && (text[e] == 'e' || text[e] == 'E')) {
      std::size_t m = e + 1;
      if (m < text.size() && (text[m] == '-' || text[m] == '+')) ++m;
      while (m < text.size() && std::isdigit(static_cast<unsigned char>(text[m]))) ++m;
      e = m;
    }
    if (!digits) throw ParseError("expected number", pos);
    double v = std::stod(std::string(text.substr(start, e - start)));
    pos = e;
    return v;
  }
  int take_int() {
    skip_ws();
    std::size_t start = pos;
    double v = take_number();
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v || i < 0) throw ParseError("expected nonnegative integer", start);
    return i;
  }
};

struct Parser {
  Lexer lex;
  const SignalLayout& layout;

  Formula expr() {
    Formula a = or_expr();
    if (lex.try_symbol("=>")) return Formula::implies(std::move(a), expr());
    return a;
  }
  Formula or_expr() {
    Formula a = and_expr();
    while (lex.try_keyword("or")) a = Formula::disj(std::move(a), and_expr());
    return a;
  }
  Formula and_expr() {
    Formula a = until_expr();
    while (lex.try_keyword("and")) a = Formula::conj(std::move(a), until_expr());
    return a;
  }
  Formula until_expr() {
    Formula a = unary();
    if (lex.peek_ident() == "U") {
      lex.pos += 1;
      auto [lo, hi] = interval();
      return Formula::until(lo, hi, std::move(a), until_expr());
    }
    return a;
  }
  Formula unary() {
    std::string id = lex.peek_ident();
    if (id == "not") {
      lex.pos += 3;
      return Formula::negation(unary());
    }
    if (id == "G" || id == "F") {
      lex.pos += 1;
      auto [lo, hi] = interval();
      Formula a = unary();
      return id == "G" ? Formula::always(lo, hi, std::move(a)) : Formula::eventually(lo, hi, std::move(a));
    }
    return primary();
  }
  Formula primary() {
    if (lex.try_symbol("(")) {
      Formula a = expr();
      lex.expect_symbol(")");
      return a;
    }
    std::string id = lex.peek_ident();
    if (id == "true") {
      lex.pos += 4;
      return Formula::truth();
    }
    if (id == "ball") {
      lex.pos += 4;
      return ball_atom();
    }
    if (id.empty()) throw ParseError("expected formula", lex.pos);
    return affine_atom();
  }

  std::pair<int, int> interval() {
    lex.expect_symbol("[");
    std::size_t at = lex.pos;
    int lo = lex.take_int();
    lex.expect_symbol(",");
    int hi = lex.take_int();
    lex.expect_symbol("]");
    if (lo > hi) throw ParseError("malformed interval: lower bound exceeds upper bound", at);
    return {lo, hi};
  }

  // ident (">="|"<=") number
  Formula affine_atom() {
    std::size_t at = lex.pos;
    std::string id = lex.take_ident();
    std::size_t comp = lookup(id, at);
    bool ge;
    if (lex.try_symbol(">="))
      ge = true;
    else if (lex.try_symbol("<="))
      ge = false;
    else
      throw ParseError("expected '>=' or '<='", lex.pos);
    double c = lex.take_number();
    Predicate::Affine f;
    f.a.assign(layout.dim(), 0.0);
    if (ge) {
      f.a[comp] = 1.0;
      f.b = -c;
    } else {
      f.a[comp] = -1.0;
      f.b = c;
    }
    std::ostringstream name;
    name << id << (ge ? " >= " : " <= ") << format_number(c);
    return Formula::atom(Predicate(name.str(), std::move(f)));
  }

  // ball ( ident-list ; number-list ; number )
  Formula ball_atom() {
    lex.expect_symbol("(");
    Predicate::Ball f;
    std::vector<std::string> ids;
    do {
      std::size_t at = lex.pos;
      std::string id = lex.take_ident();
      f.sel.push_back(lookup(id, at));
      ids.push_back(id);
    } while (lex.try_symbol(","));
    lex.expect_symbol(";");
    do {
      f.center.push_back(lex.take_number());
    } while (lex.try_symbol(","));
    lex.expect_symbol(";");
    std::size_t at = lex.pos;
    f.radius = lex.take_number();
    if (f.center.size() != f.sel.size())
      throw ParseError("ball atom: center dimension does not match selector", at);
    if (!(f.radius > 0.0)) throw ParseError("ball atom: radius must be positive", at);
    lex.expect_symbol(")");
    std::ostringstream name;
    name << "ball(";
    for (std::size_t i = 0; i < ids.size(); ++i) name << (i ? "," : "") << ids[i];
    name << "; ";
    for (std::size_t i = 0; i < f.center.size(); ++i) name << (i ? "," : "") << format_number(f.center[i]);
    name << "; " << format_number(f.radius) << ")";
    return Formula::atom(Predicate(name.str(), std::move(f)));
  }

  std::size_t lookup(const std::string& id, std::size_t at) {
    if (!layout.contains(id)) throw ParseError("unknown predicate identifier '" + id + "'", at);
    return layout.index_of(id);
  }

  static std::string format_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  }
};

}  // namespace detail

inline Formula parse_formula(std::string_view text, const SignalLayout& layout) {
  detail::Parser p{detail::Lexer{text, 0}, layout};
  Formula f = p.expr();
  if (!p.lex.eof()) throw ParseError("trailing input", p.lex.pos);
  return f;
}

// Fully parenthesized text; parse(print(f)) is structurally identical to f
// for parser-produced formulas.
inline std::string print_formula(const Formula& f) {
  using K = FormulaKind;
  auto ivl = [&] {
    return "[" + std::to_string(f.lo()) + "," + std::to_string(f.hi()) + "]";
  };
  switch (f.kind()) {
    case K::True:
      return "true";
    case K::False:
      return "not true";
    case K::Atom:
      return f.predicate().id();
    case K::Not:
      return "not (" + print_formula(f.child(0)) + ")";
    case K::And:
      return "(" + print_formula(f.child(0)) + " and " + print_formula(f.child(1)) + ")";
    case K::Or:
      return "(" + print_formula(f.child(0)) + " or " + print_formula(f.child(1)) + ")";
    case K::Implies:
      return "(" + print_formula(f.child(0)) + " => " + print_formula(f.child(1)) + ")";
    case K::Always:
      return "G" + ivl() + " (" + print_formula(f.child(0)) + ")";
    case K::Eventually:
      return "F" + ivl() + " (" + print_formula(f.child(0)) + ")";
    case K::Until:
      return "((" + print_formula(f.child(0)) + ") U" + ivl() + " (" + print_formula(f.child(1)) + "))";
  }
  throw std::logic_error("print_formula: unreachable");
}

}  // namespace cat

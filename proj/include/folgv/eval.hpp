// Binary-64 evaluation of canonical expressions at a point.
#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "folgv/print.hpp"
#include "folgv/symbolic.hpp"

namespace folgv {

using Point = std::map<std::string, double>;

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, std::string subexpression)
      : std::runtime_error(what + ": " + subexpression), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

inline double psi0_value(double t) {
  if (t == 0.0) return 0.0;
  double e = std::exp(-1.0 / (t * t));
  return e / (1.0 + e);
}

// e^{-1/u} for u > 0, exactly 0 for u <= 0.  Underflows to 0 for tiny u.
inline double flatexp_value(double u) {
  if (!(u > 0.0)) return 0.0;
  return std::exp(-1.0 / u);
}

double eval(const Expr& e, const Point& p);

namespace detail {

inline double eval_base(const Base& b, const Point& p) {
  switch (b.kind) {
    case Base::Kind::Coord: {
      auto it = p.find(b.name);
      if (it == p.end()) throw EvalError("unbound coordinate", b.name);
      return it->second;
    }
    case Base::Kind::Poly:
      return eval(b.arg, p);
    case Base::Kind::Atom: {
      double u = eval(b.arg, p);
      switch (b.atom) {
        case AtomKind::Exp: return u;  // exponent applied by the caller
        case AtomKind::Log:
          if (!(u > 0.0)) throw EvalError("log of non-positive value", "log(" + to_string(b.arg) + ")");
          return std::log(u);
        case AtomKind::Psi0: return psi0_value(u);
        case AtomKind::FlatExp: return flatexp_value(u);
      }
    }
  }
  return 0.0;
}

inline double factor_value(const Factor& f, const Point& p) {
  double v = eval_base(f.base, p);
  double k = f.exp.get_d();
  if (f.base.kind == Base::Kind::Atom && f.base.atom == AtomKind::Exp) return std::exp(k * v);
  if (v == 0.0 && f.exp < 0) {
    std::string s = f.base.kind == Base::Kind::Coord ? f.base.name : to_string(f.base.arg);
    throw EvalError("division by zero", s);
  }
  if (is_integer(f.exp)) {
    long n = f.exp.get_num().get_si();
    if (n == 1) return v;
    return std::pow(v, static_cast<double>(n));
  }
  return std::pow(v, k);
}

}  // namespace detail

// Terms carrying a flat atom (psi0, flatexp) that evaluates to exactly 0 are
// 0 regardless of their other factors: such terms are the flat extension of
// derivative rewrites like flatexp(u)/u^2 across u = 0.
inline double term_value(const Term& t, const Point& p) {
  for (const auto& f : t.mono)
    if (f.base.is_flat_atom() && f.exp > 0 && detail::eval_base(f.base, p) == 0.0) return 0.0;
  double v = t.coeff.get_d();
  for (const auto& f : t.mono) {
    if (f.base.is_flat_atom() && f.exp > 0 && is_integer(f.exp)) {
      v *= std::pow(detail::eval_base(f.base, p), f.exp.get_d());
      continue;
    }
    v *= detail::factor_value(f, p);
  }
  return v;
}

inline double eval(const Expr& e, const Point& p) {
  double s = 0.0;
  for (const auto& t : e.terms()) s += term_value(t, p);
  return s;
}

// Sum of absolute term values: the magnitude scale used by zero tests.
inline double magnitude(const Expr& e, const Point& p) {
  double s = 0.0;
  for (const auto& t : e.terms()) s += std::fabs(term_value(t, p));
  return s;
}

}  // namespace folgv

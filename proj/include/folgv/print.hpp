// Infix and LaTeX rendering of canonical expressions.  The infix form is
// accepted back by the document parser.
#pragma once

#include <sstream>
#include <string>

#include "folgv/symbolic.hpp"

namespace folgv {

std::string to_string(const Expr& e);
std::string to_latex(const Expr& e);

namespace detail {

inline std::string exponent_suffix(const Rational& e) {
  if (e == 1) return "";
  if (is_integer(e)) return "^" + e.get_str();
  return "^(" + e.get_str() + ")";
}

// Renders a monomial with positive exponents only; exp factors are regrouped
// into a single exp(...) so the output parses back.
template <bool Latex>
std::string render_monomial(const Monomial& m) {
  std::vector<std::string> parts;
  Expr exp_arg;
  for (const auto& f : m) {
    const Base& b = f.base;
    if (b.kind == Base::Kind::Atom && b.atom == AtomKind::Exp) {
      exp_arg = exp_arg + Expr(f.exp) * b.arg;
      continue;
    }
    std::string s;
    if (b.kind == Base::Kind::Coord) {
      s = b.name;
    } else if (b.kind == Base::Kind::Poly) {
      s = Latex ? "\\left(" + to_latex(b.arg) + "\\right)" : "(" + to_string(b.arg) + ")";
    } else if (Latex) {
      const char* head = b.atom == AtomKind::Log    ? "\\log"
                         : b.atom == AtomKind::Psi0 ? "\\psi_0"
                                                    : "\\operatorname{flatexp}";
      s = std::string(head) + "\\left(" + to_latex(b.arg) + "\\right)";
    } else {
      s = std::string(atom_name(b.atom)) + "(" + to_string(b.arg) + ")";
    }
    if (Latex) {
      if (f.exp != 1) s += "^{" + f.exp.get_str() + "}";
    } else {
      s += exponent_suffix(f.exp);
    }
    parts.push_back(std::move(s));
  }
  if (!exp_arg.is_zero()) {
    parts.push_back(Latex ? "e^{" + to_latex(exp_arg) + "}" : "exp(" + to_string(exp_arg) + ")");
  }
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out += Latex ? " " : "*";
    out += parts[k];
  }
  return out;
}

template <bool Latex>
std::string render_term_magnitude(const Term& t) {
  Monomial num, den;
  for (const auto& f : t.mono) {
    if (f.exp < 0 && !(f.base.kind == Base::Kind::Atom && f.base.atom == AtomKind::Exp)) {
      den.push_back(Factor{f.base, -f.exp});
    } else {
      num.push_back(f);
    }
  }
  Rational c = abs(t.coeff);
  std::string ns = render_monomial<Latex>(num);
  std::string ds = render_monomial<Latex>(den);
  if (Latex) {
    std::string top = ns;
    std::string cnum = c.get_num().get_str(), cden = c.get_den().get_str();
    if (cnum != "1" || top.empty()) top = top.empty() ? cnum : cnum + " " + top;
    std::string bottom = ds;
    if (cden != "1") bottom = bottom.empty() ? cden : cden + " " + bottom;
    if (bottom.empty()) return top;
    return "\\frac{" + top + "}{" + bottom + "}";
  }
  std::string cnum = c.get_num().get_str(), cden = c.get_den().get_str();
  std::string s;
  if (cnum != "1" || ns.empty()) {
    s = cnum;
    if (!ns.empty()) s += "*" + ns;
  } else {
    s = ns;
  }
  std::vector<std::string> below;
  if (cden != "1") below.push_back(cden);
  if (!ds.empty()) below.push_back(ds);
  if (!below.empty()) {
    bool single = below.size() == 1 && (den.size() <= 1 || ds.empty());
    std::string b = below.size() == 2 ? below[0] + "*" + below[1] : below[0];
    s += "/" + (single ? b : "(" + b + ")");
  }
  return s;
}

template <bool Latex>
std::string render(const Expr& e) {
  const auto& ts = e.terms();
  if (ts.empty()) return "0";
  std::string out;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    bool neg = ts[k].coeff < 0;
    if (k == 0) out += neg ? "-" : "";
    else out += neg ? " - " : " + ";
    out += render_term_magnitude<Latex>(ts[k]);
  }
  return out;
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::render<false>(e); }
inline std::string to_latex(const Expr& e) { return detail::render<true>(e); }

inline std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << to_string(e); }

}  // namespace folgv

// Exact symbolic scalar fields over named coordinates.
//
// Every Expr is held in canonical form: a sum of terms, each term a rational
// coefficient times a monomial.  A monomial is a sorted product of factors
// base^exponent where a base is a coordinate, a transcendental atom
// (exp, log, psi0, flatexp) or a multi-term polynomial factor.  Polynomial
// factors only ever appear with negative exponents (they are denominators);
// positive powers are expanded.  exp(u) is split over the terms of u, so
// exp(2x + y) is stored as exp(x)^2 * exp(y) and exp(x)*exp(y) == exp(x + y)
// structurally.
#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace folgv {

using Rational = mpq_class;

struct Node;
struct Term;

enum class AtomKind : std::uint8_t { Exp, Log, Psi0, FlatExp };

inline const char* atom_name(AtomKind k) {
  switch (k) {
    case AtomKind::Exp: return "exp";
    case AtomKind::Log: return "log";
    case AtomKind::Psi0: return "psi0";
    case AtomKind::FlatExp: return "flatexp";
  }
  return "?";
}

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Expr {
 public:
  Expr();
  Expr(long v);  // NOLINT(google-explicit-constructor)
  explicit Expr(Rational v);

  static Expr coordinate(const std::string& name);

  const std::vector<Term>& terms() const;
  bool is_zero() const;
  std::optional<Rational> constant_value() const;
  bool is_constant() const { return constant_value().has_value(); }

  const Node* node() const { return node_.get(); }

 private:
  friend Expr make_expr(std::vector<Term> terms);
  std::shared_ptr<const Node> node_;
};

struct Base {
  enum class Kind : std::uint8_t { Coord, Atom, Poly };
  Kind kind = Kind::Coord;
  AtomKind atom = AtomKind::Exp;
  std::string name;  // Coord
  Expr arg;          // Atom argument, or the Poly factor itself

  bool is_flat_atom() const {
    return kind == Kind::Atom && (atom == AtomKind::Psi0 || atom == AtomKind::FlatExp);
  }
};

struct Factor {
  Base base;
  Rational exp;
};

using Monomial = std::vector<Factor>;

struct Term {
  Rational coeff;
  Monomial mono;
};

struct Node {
  std::vector<Term> terms;
};

// ---------------------------------------------------------------------------
// Ordering

int compare(const Expr& a, const Expr& b);

inline int compare_rational(const Rational& a, const Rational& b) {
  int c = cmp(a, b);
  return (c > 0) - (c < 0);
}

inline int compare(const Base& a, const Base& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case Base::Kind::Coord: {
      int c = a.name.compare(b.name);
      return (c > 0) - (c < 0);
    }
    case Base::Kind::Atom:
      if (a.atom != b.atom) return a.atom < b.atom ? -1 : 1;
      return compare(a.arg, b.arg);
    case Base::Kind::Poly:
      return compare(a.arg, b.arg);
  }
  return 0;
}

// Lexicographic monomial order: bases sorted ascending are the variables in
// decreasing significance; at the first base where the exponents differ the
// larger exponent wins.  This is a total order compatible with multiplication.
inline int compare(const Monomial& a, const Monomial& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && compare(a[i].base, b[j].base) < 0)) {
      return sgn(a[i].exp);
    }
    if (i == a.size() || compare(a[i].base, b[j].base) > 0) {
      return -sgn(b[j].exp);
    }
    int c = compare_rational(a[i].exp, b[j].exp);
    if (c != 0) return c;
    ++i;
    ++j;
  }
  return 0;
}

inline int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
  for (std::size_t k = 0; k < ta.size(); ++k) {
    int c = compare(ta[k].mono, tb[k].mono);
    if (c != 0) return c;
    c = compare_rational(ta[k].coeff, tb[k].coeff);
    if (c != 0) return c;
  }
  return 0;
}

inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
inline bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }
inline bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Expr basics

inline Expr make_expr(std::vector<Term> terms) {
  Expr e;
  auto n = std::make_shared<Node>();
  n->terms = std::move(terms);
  e.node_ = std::move(n);
  return e;
}

namespace detail {
inline const std::shared_ptr<const Node>& zero_node() {
  static const std::shared_ptr<const Node> z = std::make_shared<Node>();
  return z;
}
}  // namespace detail

inline Expr::Expr() : node_(detail::zero_node()) {}

inline Expr::Expr(Rational v) : Expr() {
  v.canonicalize();
  if (v != 0) *this = make_expr({Term{v, {}}});
}

inline Expr::Expr(long v) : Expr(Rational(v)) {}

inline const std::vector<Term>& Expr::terms() const { return node_->terms; }

inline bool Expr::is_zero() const { return node_->terms.empty(); }

inline std::optional<Rational> Expr::constant_value() const {
  const auto& t = terms();
  if (t.empty()) return Rational(0);
  if (t.size() == 1 && t[0].mono.empty()) return t[0].coeff;
  return std::nullopt;
}

inline Expr Expr::coordinate(const std::string& name) {
  Base b;
  b.kind = Base::Kind::Coord;
  b.name = name;
  return make_expr({Term{Rational(1), {Factor{std::move(b), Rational(1)}}}});
}

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

inline Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && compare(a[i].base, b[j].base) < 0)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || compare(a[i].base, b[j].base) > 0) {
      out.push_back(b[j++]);
    } else {
      Rational e = a[i].exp + b[j].exp;
      if (e != 0) out.push_back(Factor{a[i].base, e});
      ++i;
      ++j;
    }
  }
  return out;
}

inline Monomial power(const Monomial& m, const Rational& k) {
  if (k == 0) return {};
  Monomial out = m;
  for (auto& f : out) f.exp *= k;
  return out;
}

// ---------------------------------------------------------------------------
// Canonical sums

Expr operator+(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr pow(const Expr& a, long n);
Expr reciprocal(const Expr& a);

namespace detail {

using TermMap = std::map<Monomial, Rational, MonomialLess>;

inline void accumulate(TermMap& acc, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = acc.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) acc.erase(it);
  }
}

// Terms sorted descending by the monomial order, so the leading term is first.
inline std::vector<Term> to_terms(const TermMap& acc) {
  std::vector<Term> out;
  out.reserve(acc.size());
  for (auto it = acc.rbegin(); it != acc.rend(); ++it) out.push_back(Term{it->second, it->first});
  return out;
}

inline bool has_positive_poly(const Monomial& m) {
  return std::any_of(m.begin(), m.end(), [](const Factor& f) {
    return f.base.kind == Base::Kind::Poly && f.exp > 0;
  });
}

inline Expr single(const Rational& c, Monomial m) {
  if (c == 0) return Expr();
  std::erase_if(m, [](const Factor& f) { return f.exp == 0; });
  return make_expr({Term{c, std::move(m)}});
}

// Product of a coefficient and a monomial that may carry positive powers of
// polynomial factors; those are expanded.
void expand_into(TermMap& acc, const Rational& c, const Monomial& m);

// Exact polynomial division of `num` by the polynomial factor `g` (no
// denominators inside g).  Exponents of num may be negative or fractional;
// num is shifted by its minimal monomial first.  Returns nullopt when g does
// not divide num.
inline std::optional<TermMap> divide(const TermMap& num, const Expr& g) {
  if (num.empty()) return TermMap{};
  // minimal exponent per base over all terms, absent bases counting as 0
  std::map<Base, Rational, bool (*)(const Base&, const Base&)> mins(
      +[](const Base& a, const Base& b) { return compare(a, b) < 0; });
  for (const auto& [m, c] : num)
    for (const auto& f : m) {
      auto it = mins.find(f.base);
      if (it == mins.end()) mins.emplace(f.base, f.exp < 0 ? f.exp : Rational(0));
      else if (f.exp < it->second) it->second = f.exp;
    }
  Monomial shift;
  for (const auto& [b, e] : mins)
    if (e != 0) shift.push_back(Factor{b, e});
  Monomial unshift = power(shift, -1);

  TermMap rem;
  for (const auto& [m, c] : num) rem.emplace(multiply(m, unshift), c);

  const auto& gt = g.terms();
  const Term& lead = gt.front();
  Monomial lead_inv = power(lead.mono, -1);
  TermMap quot;
  for (int guard = 0; !rem.empty(); ++guard) {
    if (guard > 4000) return std::nullopt;
    auto top = std::prev(rem.end());
    Monomial qm = multiply(top->first, lead_inv);
    for (const auto& f : qm)
      if (f.exp < 0) return std::nullopt;
    Rational qc = top->second / lead.coeff;
    accumulate(quot, qm, qc);
    for (const auto& t : gt) accumulate(rem, multiply(qm, t.mono), -qc * t.coeff);
  }
  TermMap out;
  for (const auto& [m, c] : quot) out.emplace(multiply(m, shift), c);
  return out;
}

inline Monomial denominator_key(const Monomial& m, Monomial* rest) {
  Monomial key;
  for (const auto& f : m) {
    if (f.base.kind == Base::Kind::Poly) key.push_back(f);
    else if (rest) rest->push_back(f);
  }
  return key;
}

// Cancels polynomial denominators against the numerators sharing them until
// nothing more divides.
inline std::vector<Term> canonicalize(TermMap acc) {
  for (int round = 0; round < 64; ++round) {
    std::map<Monomial, TermMap, MonomialLess> groups;
    for (const auto& [m, c] : acc) {
      Monomial rest;
      Monomial key = denominator_key(m, &rest);
      if (!key.empty()) groups[key].emplace(std::move(rest), c);
    }
    bool changed = false;
    for (auto& [key, numer] : groups) {
      if (numer.size() < 2) continue;
      Monomial new_key = key;
      TermMap cur = numer;
      bool divided = false;
      for (auto& f : new_key) {
        while (f.exp < 0 && cur.size() >= 2) {
          auto q = divide(cur, f.base.arg);
          if (!q) break;
          cur = std::move(*q);
          f.exp += 1;
          divided = true;
        }
      }
      if (!divided) continue;
      changed = true;
      for (const auto& [m, c] : numer) acc.erase(multiply(m, key));
      Monomial kept;
      for (const auto& f : new_key)
        if (f.exp != 0) kept.push_back(f);
      for (const auto& [m, c] : cur) accumulate(acc, multiply(m, kept), c);
    }
    if (!changed) break;
  }
  return to_terms(acc);
}

inline Expr from_map(TermMap acc) { return make_expr(canonicalize(std::move(acc))); }

}  // namespace detail

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  detail::TermMap acc;
  for (const auto& t : a.terms()) detail::accumulate(acc, t.mono, t.coeff);
  for (const auto& t : b.terms()) detail::accumulate(acc, t.mono, t.coeff);
  return detail::from_map(std::move(acc));
}

inline Expr operator-(const Expr& a) {
  std::vector<Term> t = a.terms();
  for (auto& x : t) x.coeff = -x.coeff;
  return t.empty() ? Expr() : make_expr(std::move(t));
}

inline Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

inline void detail::expand_into(TermMap& acc, const Rational& c, const Monomial& m) {
  if (!has_positive_poly(m)) {
    accumulate(acc, m, c);
    return;
  }
  Monomial rest;
  Expr prod = single(c, {});
  for (const auto& f : m) {
    if (f.base.kind == Base::Kind::Poly && f.exp > 0) {
      prod = prod * pow(f.base.arg, f.exp.get_num().get_si());
    } else {
      rest.push_back(f);
    }
  }
  for (const auto& t : prod.terms()) accumulate(acc, multiply(t.mono, rest), t.coeff);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (auto c = a.constant_value(); c && *c == 1) return b;
  if (auto c = b.constant_value(); c && *c == 1) return a;
  detail::TermMap acc;
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms())
      detail::expand_into(acc, ta.coeff * tb.coeff, multiply(ta.mono, tb.mono));
  return detail::from_map(std::move(acc));
}

inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

// Splits a multi-term sum without denominators into content * monomial * P
// with P primitive: rational content 1, positive leading coefficient and no
// monomial factor.
struct PolyParts {
  Rational content;
  Monomial mono;
  Expr primitive;
};

inline PolyParts split_polynomial(const Expr& sum) {
  const auto& ts = sum.terms();
  mpz_class num_gcd = 0, den_lcm = 1;
  for (const auto& t : ts) {
    mpz_class n = abs(t.coeff.get_num());
    num_gcd = gcd(num_gcd, n);
    den_lcm = lcm(den_lcm, t.coeff.get_den());
  }
  Rational content(num_gcd, den_lcm);
  content.canonicalize();
  if (ts.front().coeff < 0) content = -content;

  // per base: minimum exponent over the terms, where a term lacking the base
  // counts as exponent 0
  std::map<Base, std::pair<Rational, std::size_t>, bool (*)(const Base&, const Base&)> mins(
      +[](const Base& a, const Base& b) { return compare(a, b) < 0; });
  for (const auto& t : ts)
    for (const auto& f : t.mono) {
      auto [it, inserted] = mins.try_emplace(f.base, f.exp, 0);
      if (!inserted && f.exp < it->second.first) it->second.first = f.exp;
      ++it->second.second;
    }
  Monomial mono;
  for (const auto& [b, info] : mins) {
    Rational e = info.first;
    if (info.second < ts.size() && e > 0) e = 0;
    if (e != 0) mono.push_back(Factor{b, e});
  }
  Monomial inv = power(mono, -1);
  detail::TermMap acc;
  for (const auto& t : ts) detail::accumulate(acc, multiply(t.mono, inv), t.coeff / content);
  return PolyParts{content, mono, make_expr(detail::to_terms(acc))};
}

// Multiplies every term by the least common polynomial denominator and
// returns (numerator, denominator), both free of polynomial denominators.
inline std::pair<Expr, Expr> clear_denominators(const Expr& a) {
  std::map<Base, Rational, bool (*)(const Base&, const Base&)> need(
      +[](const Base& x, const Base& y) { return compare(x, y) < 0; });
  for (const auto& t : a.terms())
    for (const auto& f : t.mono)
      if (f.base.kind == Base::Kind::Poly) {
        Rational k = -f.exp;
        auto it = need.find(f.base);
        if (it == need.end()) need.emplace(f.base, k);
        else if (k > it->second) it->second = k;
      }
  if (need.empty()) return {a, Expr(1)};
  Monomial dmono;
  for (const auto& [b, k] : need) dmono.push_back(Factor{b, k});
  detail::TermMap acc;
  for (const auto& t : a.terms()) detail::expand_into(acc, t.coeff, multiply(t.mono, dmono));
  detail::TermMap den;
  detail::expand_into(den, Rational(1), dmono);
  return {make_expr(detail::to_terms(acc)), make_expr(detail::to_terms(den))};
}

inline Expr reciprocal(const Expr& a) {
  if (a.is_zero()) throw DomainError("division by the zero expression");
  const auto& ts = a.terms();
  if (ts.size() == 1) {
    detail::TermMap acc;
    detail::expand_into(acc, 1 / ts[0].coeff, power(ts[0].mono, -1));
    return detail::from_map(std::move(acc));
  }
  auto [num, den] = clear_denominators(a);
  if (num.terms().size() == 1) return den * reciprocal(num);
  PolyParts parts = split_polynomial(num);
  Base b;
  b.kind = Base::Kind::Poly;
  b.arg = parts.primitive;
  Monomial m = power(parts.mono, -1);
  m = multiply(m, Monomial{Factor{std::move(b), Rational(-1)}});
  return den * detail::single(1 / parts.content, m);
}

inline Expr operator/(const Expr& a, const Expr& b) { return a * reciprocal(b); }

inline Expr pow(const Expr& a, long n) {
  if (n == 0) return Expr(1);
  if (n < 0) return pow(reciprocal(a), -n);
  if (a.terms().size() == 1) {
    const Term& t = a.terms()[0];
    Rational c;
    mpz_pow_ui(c.get_num_mpz_t(), t.coeff.get_num_mpz_t(), static_cast<unsigned long>(n));
    mpz_pow_ui(c.get_den_mpz_t(), t.coeff.get_den_mpz_t(), static_cast<unsigned long>(n));
    c.canonicalize();
    detail::TermMap acc;
    detail::expand_into(acc, c, power(t.mono, Rational(n)));
    return detail::from_map(std::move(acc));
  }
  Expr result(1), base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Atoms

inline Expr atom_power(AtomKind kind, const Expr& arg, const Rational& e) {
  Base b;
  b.kind = Base::Kind::Atom;
  b.atom = kind;
  b.arg = arg;
  return detail::single(Rational(1), Monomial{Factor{std::move(b), e}});
}

Expr log(const Expr& u);

inline Expr exp(const Expr& u) {
  Expr out(1);
  Monomial factors;
  for (const auto& t : u.terms()) {
    if (t.mono.empty()) {
      factors.push_back(Factor{Base{Base::Kind::Atom, AtomKind::Exp, {}, Expr(1)}, t.coeff});
      continue;
    }
    if (t.mono.size() == 1 && t.mono[0].exp == 1 && t.mono[0].base.kind == Base::Kind::Atom &&
        t.mono[0].base.atom == AtomKind::Log && is_integer(t.coeff)) {
      out = out * pow(t.mono[0].base.arg, t.coeff.get_num().get_si());
      continue;
    }
    Base b{Base::Kind::Atom, AtomKind::Exp, {}, detail::single(Rational(1), t.mono)};
    factors.push_back(Factor{std::move(b), t.coeff});
  }
  std::sort(factors.begin(), factors.end(),
            [](const Factor& x, const Factor& y) { return compare(x.base, y.base) < 0; });
  return out * detail::single(Rational(1), factors);
}

inline Expr log(const Expr& u) {
  if (auto c = u.constant_value()) {
    if (*c == 1) return Expr();
    if (*c <= 0) throw DomainError("log of a non-positive constant");
  }
  const auto& ts = u.terms();
  if (ts.size() == 1 && ts[0].coeff == 1 && !ts[0].mono.empty() &&
      std::all_of(ts[0].mono.begin(), ts[0].mono.end(), [](const Factor& f) {
        return f.base.kind == Base::Kind::Atom && f.base.atom == AtomKind::Exp;
      })) {
    Expr s;
    for (const auto& f : ts[0].mono) s = s + Expr(f.exp) * f.base.arg;
    return s;
  }
  return atom_power(AtomKind::Log, u, Rational(1));
}

inline Expr psi0(const Expr& u) {
  if (u.is_zero()) return Expr();
  // psi0 is even; keep the argument with a positive leading coefficient
  if (u.terms().front().coeff < 0) return atom_power(AtomKind::Psi0, -u, Rational(1));
  return atom_power(AtomKind::Psi0, u, Rational(1));
}

inline Expr flatexp(const Expr& u) {
  if (auto c = u.constant_value(); c && *c <= 0) return Expr();
  return atom_power(AtomKind::FlatExp, u, Rational(1));
}

// ---------------------------------------------------------------------------
// Structural queries and rebuilding

inline void collect_coordinates(const Expr& e, std::set<std::string>& out) {
  for (const auto& t : e.terms())
    for (const auto& f : t.mono) {
      if (f.base.kind == Base::Kind::Coord) out.insert(f.base.name);
      else collect_coordinates(f.base.arg, out);
    }
}

inline std::set<std::string> coordinates_of(const Expr& e) {
  std::set<std::string> out;
  collect_coordinates(e, out);
  return out;
}

inline bool mentions(const Expr& e, const std::string& coord) {
  return coordinates_of(e).count(coord) > 0;
}

// Rebuilds `e` bottom-up, letting `leaf` replace individual bases.  `leaf`
// returns the replacement for base^1 or nullopt to keep the base (with its
// argument rebuilt recursively).
template <class Leaf>
Expr rebuild(const Expr& e, const Leaf& leaf);

namespace detail {
template <class Leaf>
Expr rebuild_factor(const Factor& f, const Leaf& leaf) {
  const Base& b = f.base;
  if (auto r = leaf(b)) {
    if (!is_integer(f.exp)) throw DomainError("fractional power of a substituted base");
    return pow(*r, f.exp.get_num().get_si());
  }
  switch (b.kind) {
    case Base::Kind::Coord:
      return single(Rational(1), Monomial{f});
    case Base::Kind::Poly:
      return pow(rebuild(b.arg, leaf), f.exp.get_num().get_si());
    case Base::Kind::Atom: {
      Expr a = rebuild(b.arg, leaf);
      switch (b.atom) {
        case AtomKind::Exp: return exp(Expr(f.exp) * a);
        case AtomKind::Log: return pow(log(a), f.exp.get_num().get_si());
        case AtomKind::Psi0: return pow(psi0(a), f.exp.get_num().get_si());
        case AtomKind::FlatExp: return pow(flatexp(a), f.exp.get_num().get_si());
      }
    }
  }
  return Expr();
}
}  // namespace detail

template <class Leaf>
Expr rebuild(const Expr& e, const Leaf& leaf) {
  Expr out;
  for (const auto& t : e.terms()) {
    Expr prod(t.coeff);
    for (const auto& f : t.mono) {
      prod = prod * detail::rebuild_factor(f, leaf);
      if (prod.is_zero()) break;
    }
    out = out + prod;
  }
  return out;
}

// Simultaneous substitution of coordinates.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& values) {
  return rebuild(e, [&](const Base& b) -> std::optional<Expr> {
    if (b.kind != Base::Kind::Coord) return std::nullopt;
    auto it = values.find(b.name);
    if (it == values.end()) return std::nullopt;
    return it->second;
  });
}

// ---------------------------------------------------------------------------
// Differentiation

Expr partial(const Expr& e, const std::string& coord);

namespace detail {
inline Expr term_expr(const Rational& c, const Monomial& m) {
  TermMap acc;
  expand_into(acc, c, m);
  return from_map(std::move(acc));
}

inline Monomial without(const Monomial& m, std::size_t idx) {
  Monomial out;
  out.reserve(m.size() - 1);
  for (std::size_t k = 0; k < m.size(); ++k)
    if (k != idx) out.push_back(m[k]);
  return out;
}
}  // namespace detail

inline Expr partial(const Expr& e, const std::string& coord) {
  Expr out;
  for (const auto& t : e.terms()) {
    for (std::size_t k = 0; k < t.mono.size(); ++k) {
      const Factor& f = t.mono[k];
      const Base& b = f.base;
      if (b.kind == Base::Kind::Coord) {
        if (b.name != coord) continue;
        Monomial m = t.mono;
        m[k].exp -= 1;
        if (m[k].exp == 0) m.erase(m.begin() + static_cast<long>(k));
        out = out + detail::single(t.coeff * f.exp, m);
        continue;
      }
      Expr du = partial(b.arg, coord);
      if (du.is_zero()) continue;
      Expr whole = detail::single(t.coeff, t.mono);
      Expr rest = detail::single(t.coeff, detail::without(t.mono, k));
      Expr bpow = detail::single(Rational(1), Monomial{f});
      switch (b.kind) {
        case Base::Kind::Coord: break;
        case Base::Kind::Poly:
          // e * g^(e-1) * g'
          out = out + Expr(f.exp) * whole * du * reciprocal(b.arg);
          break;
        case Base::Kind::Atom:
          switch (b.atom) {
            case AtomKind::Exp:
              out = out + Expr(f.exp) * whole * du;
              break;
            case AtomKind::Log:
              out = out + Expr(f.exp) * rest *
                              detail::single(Rational(1), Monomial{Factor{b, f.exp - 1}}) * du *
                              reciprocal(b.arg);
              break;
            case AtomKind::Psi0: {
              // psi0'(u) = 2 u^-3 psi0(u) (1 - psi0(u))
              Expr psi = detail::single(Rational(1), Monomial{Factor{b, Rational(1)}});
              out = out + Expr(f.exp) * Expr(2) * whole * du * pow(b.arg, -3) * (Expr(1) - psi);
              break;
            }
            case AtomKind::FlatExp:
              // flatexp'(u) = flatexp(u) / u^2, extended by 0 for u <= 0
              out = out + Expr(f.exp) * whole * du * pow(b.arg, -2);
              break;
          }
          break;
      }
    }
  }
  return out;
}

}  // namespace folgv

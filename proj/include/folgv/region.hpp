// Open coordinate regions, seeded rejection sampling and the tri-state zero
// test used throughout the engine.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "folgv/eval.hpp"
#include "folgv/symbolic.hpp"

namespace folgv {

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChartError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct ZeroTestConfig {
  std::size_t sample_count = 32;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  std::uint64_t rng_seed = 0x5eed5eedULL;
  int max_attempts = 4000;

  void validate() const {
    if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw std::invalid_argument("tolerances must be > 0");
  }
};

// {x in box : g(x) > 0 for every constraint g}.  The box is finite and is the
// sampling domain; an empty constraint list means the whole box.
struct Region {
  std::string name;
  std::vector<std::string> coords;
  std::vector<Interval> box;
  std::vector<Expr> constraints;

  bool satisfies_constraints(const Point& p) const {
    for (const auto& g : constraints) {
      try {
        if (!(eval(g, p) > 0.0)) return false;
      } catch (const EvalError&) {
        return false;
      }
    }
    return true;
  }

  bool in_box(const Point& p) const {
    for (std::size_t k = 0; k < coords.size(); ++k) {
      auto it = p.find(coords[k]);
      if (it == p.end() || it->second < box[k].lo || it->second > box[k].hi) return false;
    }
    return true;
  }

  bool contains(const Point& p) const { return in_box(p) && satisfies_constraints(p); }
};

inline Region whole_box(std::vector<std::string> coords, std::vector<Interval> box,
                        std::string name = "box") {
  Region r;
  r.name = std::move(name);
  r.coords = std::move(coords);
  r.box = std::move(box);
  return r;
}

inline Region intersect(const Region& a, const Region& b) {
  if (a.coords != b.coords) throw ChartError("intersecting regions on different charts");
  Region r;
  r.name = a.name + "&" + b.name;
  r.coords = a.coords;
  for (std::size_t k = 0; k < a.box.size(); ++k)
    r.box.push_back(Interval{std::max(a.box[k].lo, b.box[k].lo), std::min(a.box[k].hi, b.box[k].hi)});
  r.constraints = a.constraints;
  r.constraints.insert(r.constraints.end(), b.constraints.begin(), b.constraints.end());
  return r;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sample `index` depends only on (seed, salt, index).
inline std::optional<Point> sample_point(const Region& r, std::uint64_t seed, std::uint64_t index,
                                         int max_attempts) {
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(index + 0x1234567ULL)));
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Point p;
    for (std::size_t k = 0; k < r.coords.size(); ++k) {
      const Interval& iv = r.box[k];
      if (!(iv.hi >= iv.lo)) return std::nullopt;
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p[r.coords[k]] = iv.lo + u * (iv.hi - iv.lo);
    }
    if (r.satisfies_constraints(p)) return p;
  }
  return std::nullopt;
}

inline std::vector<Point> sample_region(const Region& r, const ZeroTestConfig& cfg, std::size_t count,
                                        std::uint64_t salt = 0) {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto p = sample_point(r, cfg.rng_seed ^ splitmix64(salt), i, cfg.max_attempts);
    if (!p) throw SamplingError("sampler exhausted on region '" + r.name + "'");
    out.push_back(std::move(*p));
  }
  return out;
}

// Same as sample_region but reports emptiness instead of throwing.
inline std::optional<std::vector<Point>> try_sample_region(const Region& r, const ZeroTestConfig& cfg,
                                                           std::size_t count, std::uint64_t salt = 0) {
  try {
    return sample_region(r, cfg, count, salt);
  } catch (const SamplingError&) {
    return std::nullopt;
  }
}

inline std::string point_string(const Point& p) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : p) {
    if (!first) s += ", ";
    first = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    s += k + ": " + buf;
  }
  return s + "}";
}

// ---------------------------------------------------------------------------
// Zero test

enum class Verdict { ProvedZero, NonZero, Undecided };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ProvedZero: return "PROVED-ZERO";
    case Verdict::NonZero: return "NONZERO";
    case Verdict::Undecided: return "UNDECIDED";
  }
  return "?";
}

struct ZeroResult {
  Verdict verdict = Verdict::Undecided;
  Expr residual;  // normal form that was tested
  std::optional<Point> witness;
  double witness_value = 0.0;
  std::string method;

  bool proved() const { return verdict == Verdict::ProvedZero; }
  bool nonzero() const { return verdict == Verdict::NonZero; }
};

// Combines verdicts of independent components: any NONZERO wins, then any
// UNDECIDED, else PROVED-ZERO.
inline Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::NonZero || b == Verdict::NonZero) return Verdict::NonZero;
  if (a == Verdict::Undecided || b == Verdict::Undecided) return Verdict::Undecided;
  return Verdict::ProvedZero;
}

// True when the region's constraints force u <= 0, i.e. u = k - c*g with
// c > 0, k <= 0 for some constraint g > 0.
inline bool provably_nonpositive(const Expr& u, const Region& r) {
  if (auto c = u.constant_value()) return *c <= 0;
  const Term& lu = u.terms().front();
  for (const auto& g : r.constraints) {
    if (g.is_zero()) continue;
    const Term& lg = g.terms().front();
    if (compare(lu.mono, lg.mono) != 0) continue;
    Rational c = -lu.coeff / lg.coeff;
    if (c <= 0) continue;
    if (auto k = (u + Expr(c) * g).constant_value(); k && *k <= 0) return true;
  }
  return false;
}

// Replaces flatexp(u) by 0 wherever the region forces u <= 0.
inline Expr vanish_flat_atoms(const Expr& e, const Region& r) {
  bool any = false;
  std::function<void(const Expr&)> scan = [&](const Expr& x) {
    for (const auto& t : x.terms())
      for (const auto& f : t.mono) {
        if (f.base.kind == Base::Kind::Atom && f.base.atom == AtomKind::FlatExp) any = true;
        if (f.base.kind != Base::Kind::Coord) scan(f.base.arg);
      }
  };
  scan(e);
  if (!any || r.constraints.empty()) return e;
  return rebuild(e, [&](const Base& b) -> std::optional<Expr> {
    if (b.kind == Base::Kind::Atom && b.atom == AtomKind::FlatExp && provably_nonpositive(b.arg, r))
      return Expr();
    return std::nullopt;
  });
}

// psi0(u) -> E/(1 + E) with E = exp(-1/u^2); an identity for every u (both
// sides tend to 0 at u = 0).
inline Expr expand_psi0(const Expr& e) {
  return rebuild(e, [](const Base& b) -> std::optional<Expr> {
    if (b.kind == Base::Kind::Atom && b.atom == AtomKind::Psi0) {
      Expr u = expand_psi0(b.arg);
      Expr E = exp(-pow(u, -2));
      return E / (Expr(1) + E);
    }
    return std::nullopt;
  });
}

inline bool has_atom(const Expr& e, AtomKind kind) {
  for (const auto& t : e.terms())
    for (const auto& f : t.mono) {
      if (f.base.kind == Base::Kind::Atom && f.base.atom == kind) return true;
      if (f.base.kind != Base::Kind::Coord && has_atom(f.base.arg, kind)) return true;
    }
  return false;
}

// Symbolic stages only; nullopt when none of them proves e == 0.
inline std::optional<std::string> prove_zero(const Expr& e, const Region& r, Expr* residual = nullptr) {
  if (e.is_zero()) return "normal-form";
  Expr v = e;
  try {
    v = vanish_flat_atoms(e, r);
  } catch (const DomainError&) {
  }
  if (residual) *residual = v;
  if (v.is_zero()) return "region-flat-vanishing";
  if (clear_denominators(v).first.is_zero()) return "common-denominator";
  if (has_atom(v, AtomKind::Psi0)) {
    Expr w = expand_psi0(v);
    if (w.is_zero() || clear_denominators(w).first.is_zero()) return "psi0-rewrite";
  }
  return std::nullopt;
}

inline ZeroResult is_zero_on(const Expr& e, const Region& r, const ZeroTestConfig& cfg) {
  cfg.validate();
  ZeroResult res;
  res.residual = e;
  if (auto how = prove_zero(e, r, &res.residual)) {
    res.verdict = Verdict::ProvedZero;
    res.method = *how;
    return res;
  }
  auto pts = sample_region(r, cfg, cfg.sample_count);
  res.method = "sampling";
  for (const auto& p : pts) {
    double v, scale;
    try {
      v = eval(res.residual, p);
      scale = magnitude(res.residual, p);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(v)) continue;
    if (std::fabs(v) > cfg.abs_tol + cfg.rel_tol * scale) {
      res.verdict = Verdict::NonZero;
      res.witness = p;
      res.witness_value = v;
      return res;
    }
  }
  res.verdict = Verdict::Undecided;
  return res;
}

}  // namespace folgv

// Weak and strong test functions: psi0 strengthening, flat bumps, finite
// cover sums and a finite-difference flatness check.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "folgv/findings.hpp"
#include "folgv/foliation.hpp"
#include "folgv/region.hpp"

namespace folgv {

// Simplest rational that rounds to exactly v; falls back to the exact binary value.
inline Rational to_rational(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite constant");
  Rational exact(v);
  // candidates inside [lo, hi] round to |v| (mpq get_d truncates, so compare exactly)
  const double av = std::fabs(v);
  const Rational lo = (Rational(std::nextafter(av, 0.0)) + Rational(av)) / 2;
  const Rational hi = (Rational(av) + Rational(std::nextafter(av, HUGE_VAL))) / 2;
  mpz_class h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  Rational x = abs(exact);
  for (int it = 0; it < 64; ++it) {
    mpz_class a = x.get_num() / x.get_den();
    mpz_class h2 = a * h1 + h0, k2 = a * k1 + k0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    Rational cand(h1, k1);
    cand.canonicalize();
    if (cand >= lo && cand <= hi) return v < 0 ? Rational(-cand) : cand;
    Rational frac = x - Rational(a);
    if (frac == 0) break;
    x = 1 / frac;
  }
  return exact;
}

inline Expr strengthen(const Expr& f) { return psi0(f); }

// 0 for u <= 0, 1 for u >= 1, smooth and flat at both ends.
inline Expr smooth_step(const Expr& u) {
  Expr a = flatexp(u);
  Expr b = flatexp(Expr(1) - u);
  return a / (a + b);
}

struct BumpSpec {
  Point center;
  double r = 1.0;  // inner radius; the support is the closed ball of radius 2r
};

inline Expr squared_distance(const Point& center) {
  Expr s;
  for (const auto& [name, c] : center) {
    Expr d = Expr::coordinate(name) - Expr(to_rational(c));
    s += d * d;
  }
  return s;
}

// 1 on the closed ball of radius r, 0 outside the open ball of radius 2r.
inline Expr bump(const BumpSpec& b) {
  if (!(b.r > 0)) throw DomainError("bump radius must be positive");
  Rational r2 = to_rational(b.r) * to_rational(b.r);
  Expr u = (Expr(4 * r2) - squared_distance(b.center)) * Expr(Rational(1) / (3 * r2));
  return smooth_step(u);
}

// 1 on [-eps, eps], 0 for |t| >= eps_outer.
inline Expr cutoff(const std::string& t, double eps, double eps_outer) {
  if (!(eps > 0) || !(eps_outer > eps)) throw DomainError("cutoff needs 0 < eps < eps_outer");
  Rational e2 = to_rational(eps) * to_rational(eps), o2 = to_rational(eps_outer) * to_rational(eps_outer);
  Expr tt = Expr::coordinate(t);
  return smooth_step((Expr(o2) - tt * tt) * Expr(Rational(1) / (o2 - e2)));
}

struct Ball {
  Point center;
  double radius = 1.0;

  bool contains(const Point& p) const {
    double s = 0.0;
    for (const auto& [k, c] : center) {
      auto it = p.find(k);
      double d = (it == p.end() ? 0.0 : it->second) - c;
      s += d * d;
    }
    return s < radius * radius;
  }
};

// A closed subset of the working box: the zero set of a reference
// expression, or the box minus finitely many open balls.
struct ClosedSetSpec {
  enum class Kind { ZeroSet, BoxMinusBalls };
  Kind kind = Kind::ZeroSet;
  Chart chart;
  std::vector<Interval> box;
  Expr reference;
  std::vector<Ball> removed;
  double zero_tol = 1e-12;

  static ClosedSetSpec zero_set(Chart c, std::vector<Interval> box, Expr ref) {
    ClosedSetSpec s;
    s.kind = Kind::ZeroSet;
    s.chart = std::move(c);
    s.box = std::move(box);
    s.reference = std::move(ref);
    return s;
  }

  static ClosedSetSpec box_minus_balls(Chart c, std::vector<Interval> box, std::vector<Ball> balls) {
    ClosedSetSpec s;
    s.kind = Kind::BoxMinusBalls;
    s.chart = std::move(c);
    s.box = std::move(box);
    s.removed = std::move(balls);
    return s;
  }

  Region working_box() const { return whole_box(chart, box, "M0.box"); }

  bool contains(const Point& p) const {
    if (!working_box().in_box(p)) return false;
    if (kind == Kind::BoxMinusBalls) {
      for (const auto& b : removed)
        if (b.contains(p)) return false;
      return true;
    }
    try {
      return std::fabs(eval(reference, p)) <= zero_tol;
    } catch (const EvalError&) {
      return false;
    }
  }
};

namespace detail {

// Newton steps towards reference == 0 from p.
inline std::optional<Point> project_to_zero_set(const ClosedSetSpec& M0, Point p) {
  std::vector<Expr> grad;
  for (const auto& c : M0.chart) grad.push_back(partial(M0.reference, c));
  for (int it = 0; it < 400; ++it) {
    if (M0.contains(p)) return p;
    double v, g2 = 0.0;
    std::vector<double> g;
    try {
      v = eval(M0.reference, p);
      for (const auto& e : grad) g.push_back(eval(e, p));
    } catch (const EvalError&) {
      return std::nullopt;
    }
    for (double x : g) g2 += x * x;
    if (!(g2 > 0) || !std::isfinite(g2)) return std::nullopt;
    for (std::size_t k = 0; k < g.size(); ++k) p[M0.chart[k]] -= v * g[k] / g2;
  }
  return std::nullopt;
}

}  // namespace detail

// Points of M0; the zero-set variant projects random box points onto it.
inline std::vector<Point> sample_closed_set(const ClosedSetSpec& M0, const ZeroTestConfig& cfg, std::size_t n,
                                            std::uint64_t salt = 0x30) {
  std::vector<Point> out;
  Region box = M0.working_box();
  for (std::uint64_t i = 0; out.size() < n && i < n * 64; ++i) {
    auto p = sample_point(box, cfg.rng_seed ^ splitmix64(salt), i, 1);
    if (!p) break;
    if (M0.contains(*p)) {
      out.push_back(*p);
    } else if (M0.kind == ClosedSetSpec::Kind::ZeroSet) {
      if (auto q = detail::project_to_zero_set(M0, *p)) out.push_back(*q);
    }
  }
  return out;
}

inline std::vector<Point> sample_complement(const ClosedSetSpec& M0, const ZeroTestConfig& cfg, std::size_t n,
                                            std::uint64_t salt = 0x31) {
  std::vector<Point> out;
  Region box = M0.working_box();
  for (std::uint64_t i = 0; out.size() < n && i < n * 64; ++i) {
    auto p = sample_point(box, cfg.rng_seed ^ splitmix64(salt), i, 1);
    if (!p) break;
    if (!M0.contains(*p)) out.push_back(*p);
  }
  return out;
}

// Sum of the bumps.  Every complement sample must lie in the open support
// ball of some bump, otherwise the sum vanishes there.
inline Expr weak_test_from_cover(const std::vector<BumpSpec>& balls, const ClosedSetSpec& M0, const ZeroTestConfig& cfg) {
  for (const auto& p : sample_complement(M0, cfg, cfg.sample_count)) {
    bool covered = false;
    for (const auto& b : balls)
      if (Ball{b.center, 2 * b.r}.contains(p)) covered = true;
    if (!covered) throw CoverageError("complement point not covered by any bump", p);
  }
  Expr phi;
  for (const auto& b : balls) phi += bump(b);
  return phi;
}

// Zero at n points of M0 and positive at n points of the complement.
inline CheckReport verify_weak_test(const Expr& phi, const ClosedSetSpec& M0, const ZeroTestConfig& cfg,
                                    std::size_t n = 64) {
  CheckReport rep;
  auto zeros = sample_closed_set(M0, cfg, n);
  auto outside = sample_complement(M0, cfg, n);
  Finding z{"zero-set", Status::Pass, std::to_string(zeros.size()) + " points of the closed set", std::nullopt, {}};
  if (zeros.size() < n) {
    z.status = Status::Undecided;
    z.detail = "only " + std::to_string(zeros.size()) + " of " + std::to_string(n) + " closed-set points found";
  }
  for (const auto& p : zeros) {
    double v = eval(phi, p);
    if (!(std::fabs(v) <= cfg.abs_tol)) {
      z = Finding{"zero-set", Status::Fail, "value " + std::to_string(v) + " on the closed set", p, {}};
      break;
    }
  }
  rep.add(std::move(z));
  Finding pos{"positivity", Status::Pass, std::to_string(outside.size()) + " complement points", std::nullopt, {}};
  if (outside.size() < n) {
    pos.status = outside.empty() && M0.kind == ClosedSetSpec::Kind::BoxMinusBalls && M0.removed.empty()
                     ? Status::Pass
                     : Status::Undecided;
    pos.detail = "only " + std::to_string(outside.size()) + " complement points found";
  }
  for (const auto& p : outside) {
    double v = eval(phi, p);
    if (!(v > 0)) {
      pos = Finding{"positivity", Status::Fail, "value " + std::to_string(v) + " off the closed set", p, {}};
      break;
    }
  }
  rep.add(std::move(pos));
  return rep;
}

// ---------------------------------------------------------------------------
// Flatness

inline constexpr std::array<double, 3> kFlatnessDistances{1e-1, 1e-2, 1e-3};
inline constexpr double kFlatnessBound = 1e-6;

struct FlatnessReport {
  Status status = Status::Pass;
  bool flat_structure = false;  // every term carries a flat atom
  std::size_t boundary_points = 0;
  // max over boundary points of |d^k phi / dn^k|, [order-1][distance]
  std::array<std::array<double, 3>, 3> estimates{};
  std::optional<Point> witness;
  std::string detail;
};

inline bool built_from_flat_atoms(const Expr& e) {
  if (e.is_zero()) return true;
  for (const auto& t : e.terms()) {
    bool flat = false;
    for (const auto& f : t.mono)
      if (f.base.is_flat_atom() && f.exp > 0) flat = true;
    if (!flat) return false;
  }
  return true;
}

namespace detail {

struct BoundaryPoint {
  Point at;
  std::vector<double> normal;  // unit, pointing out of M0
};

inline Point shifted(const Point& p, const Chart& c, const std::vector<double>& n, double s) {
  Point q = p;
  for (std::size_t k = 0; k < c.size(); ++k) q[c[k]] += s * n[k];
  return q;
}

inline std::vector<BoundaryPoint> boundary_points(const ClosedSetSpec& M0, const ZeroTestConfig& cfg, std::size_t n) {
  std::vector<BoundaryPoint> out;
  auto inside = sample_closed_set(M0, cfg, n, 0xb0);
  std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ 0xb1));
  std::normal_distribution<double> gauss;
  Region box = M0.working_box();
  for (const auto& p0 : inside) {
    std::vector<double> dir(M0.chart.size());
    double norm = 0.0;
    for (auto& x : dir) {
      x = gauss(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (!(norm > 0)) continue;
    for (auto& x : dir) x /= norm;
    double lo = 0.0, hi = -1.0;
    for (double t = 1e-3; t < 1e3; t *= 2) {
      Point q = shifted(p0, M0.chart, dir, t);
      if (!box.in_box(q)) break;
      if (!M0.contains(q)) {
        hi = t;
        break;
      }
      lo = t;
    }
    if (hi < 0) continue;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (M0.contains(shifted(p0, M0.chart, dir, mid)) ? lo : hi) = mid;
    }
    out.push_back(BoundaryPoint{shifted(p0, M0.chart, dir, lo), dir});
  }
  return out;
}

}  // namespace detail

// Central-difference derivative estimates of orders 1..3 along the outward
// normal at distances 1e-1, 1e-2, 1e-3 from sampled boundary points of M0.
// PASS when each order decays across the decades and ends below 1e-6.
inline FlatnessReport flatness_check(const Expr& phi, const ClosedSetSpec& M0, const ZeroTestConfig& cfg,
                                     std::size_t boundary_samples = 8) {
  FlatnessReport rep;
  rep.flat_structure = built_from_flat_atoms(phi);
  auto bps = detail::boundary_points(M0, cfg, boundary_samples);
  rep.boundary_points = bps.size();
  if (bps.empty()) {
    rep.detail = "no boundary points of the closed set inside the box";
    return rep;
  }
  bool eval_failed = false;
  for (const auto& bp : bps) {
    for (std::size_t di = 0; di < kFlatnessDistances.size(); ++di) {
      double d = kFlatnessDistances[di], h = d / 10;
      auto f = [&](double s) { return eval(phi, detail::shifted(bp.at, M0.chart, bp.normal, d + s)); };
      std::array<double, 3> est{};
      try {
        double fm2 = f(-2 * h), fm1 = f(-h), f0 = f(0), fp1 = f(h), fp2 = f(2 * h);
        est[0] = (fp1 - fm1) / (2 * h);
        est[1] = (fp1 - 2 * f0 + fm1) / (h * h);
        est[2] = (fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h * h * h);
      } catch (const EvalError&) {
        eval_failed = true;
        continue;
      }
      for (int k = 0; k < 3; ++k) {
        double a = std::fabs(est[static_cast<std::size_t>(k)]);
        if (!std::isfinite(a)) eval_failed = true;
        auto& slot = rep.estimates[static_cast<std::size_t>(k)][di];
        if (a > slot) {
          slot = a;
          if (di + 1 == kFlatnessDistances.size() && a >= kFlatnessBound) rep.witness = bp.at;
        }
      }
    }
  }
  bool decays = true, small = true;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& e = rep.estimates[k];
    for (std::size_t di = 1; di < e.size(); ++di)
      if (e[di] > e[di - 1] + kFlatnessBound) decays = false;
    if (!(e.back() < kFlatnessBound)) small = false;
  }
  if (eval_failed) {
    rep.status = rep.flat_structure ? Status::Pass : Status::Undecided;
    rep.detail = rep.flat_structure ? "structural: built from flat atoms (numeric estimates unavailable)"
                                    : "derivative estimates could not be evaluated";
    return rep;
  }
  rep.status = decays && small ? Status::Pass : Status::Fail;
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |d^k| at d=1e-3: %.3g, %.3g, %.3g", rep.estimates[0][2], rep.estimates[1][2],
                rep.estimates[2][2]);
  rep.detail = buf;
  if (!decays) rep.detail += "; estimates do not decay";
  return rep;
}

}  // namespace folgv

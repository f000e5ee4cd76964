// The twisted complex d_f, the map Phi(alpha, beta) with collar extension,
// and the exactness pipeline for a basic regular test function.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "folgv/findings.hpp"
#include "folgv/foliation.hpp"
#include "folgv/forms.hpp"
#include "folgv/gv.hpp"
#include "folgv/test_functions.hpp"

namespace folgv {

// f d(omega) - p df ^ omega
inline DiffForm d_f(const Expr& f, const DiffForm& omega) {
  return f * ext_d(omega) - Expr(omega.degree()) * wedge(ext_d(omega.chart(), f), omega);
}

inline DiffForm phi_map(const Expr& f, const DiffForm& omega) { return pow(f, omega.degree()) * omega; }

// Collar of S = {t = 0}: the chart minus t are the coordinates of S.
struct TubularData {
  Expr f;
  std::string t;
  double eps = 0.5;
  double eps_outer = 1.0;
  Expr rho;
  Chart chart;
  Chart slice;
  CoordinateMap projection;  // chart -> slice, forgetting t
};

inline TubularData make_tubular(const Chart& chart, const Expr& f, const std::string& t, double eps, double eps_outer) {
  auto it = std::find(chart.begin(), chart.end(), t);
  if (it == chart.end()) throw ChartError("transverse coordinate '" + t + "' is not in the chart");
  TubularData td;
  td.f = f;
  td.t = t;
  td.eps = eps;
  td.eps_outer = eps_outer;
  td.rho = cutoff(t, eps, eps_outer);
  td.chart = chart;
  for (const auto& c : chart)
    if (c != t) td.slice.push_back(c);
  td.projection.source = chart;
  td.projection.target = td.slice;
  for (const auto& c : td.slice) td.projection.components.push_back(Expr::coordinate(c));
  return td;
}

// rho(t) = 1 on |t| <= eps and 0 on |t| >= eps_outer at sampled t.
inline CheckReport validate_tubular(const TubularData& td, const ZeroTestConfig& cfg) {
  CheckReport rep;
  std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ 0x7b));
  std::uniform_real_distribution<double> in(-td.eps, td.eps), out(td.eps_outer, 4 * td.eps_outer);
  Finding one{"rho-inner", Status::Pass, "rho = 1 on the inner collar", std::nullopt, {}};
  Finding zero{"rho-support", Status::Pass, "rho = 0 outside the outer collar", std::nullopt, {}};
  for (std::size_t i = 0; i < cfg.sample_count; ++i) {
    Point a{{td.t, in(rng)}}, b{{td.t, (i % 2 ? -1.0 : 1.0) * out(rng)}};
    if (one.status == Status::Pass && std::fabs(eval(td.rho, a) - 1.0) > cfg.abs_tol) {
      one.status = Status::Fail;
      one.witness = a;
    }
    if (zero.status == Status::Pass && eval(td.rho, b) != 0.0) {
      zero.status = Status::Fail;
      zero.witness = b;
    }
  }
  rep.add(std::move(one));
  rep.add(std::move(zero));
  return rep;
}

// beta on S extended to the collar: rho(t) pi^* beta.
inline DiffForm tilde_extend(const DiffForm& beta, const TubularData& td) {
  if (beta.chart() != td.slice) {
    if (beta.chart() == td.chart) throw DomainError("tilde_extend: form must live on the slice coordinates");
    throw ChartError("tilde_extend: form is on an unrelated chart");
  }
  for (const auto& [I, c] : beta.coefficients())
    if (mentions(c, td.t)) throw DomainError("tilde_extend: form mentions the transverse coordinate " + td.t);
  return td.rho * pullback(td.projection, beta);
}

// Restriction of a region to the slice coordinates; constraints that mention
// the transverse coordinate are dropped.
inline Region slice_region(const Region& r, const TubularData& td) {
  Region s;
  s.name = r.name + "|S";
  for (std::size_t k = 0; k < r.coords.size(); ++k)
    if (r.coords[k] != td.t) {
      s.coords.push_back(r.coords[k]);
      s.box.push_back(r.box[k]);
    }
  for (const auto& g : r.constraints)
    if (!mentions(g, td.t)) s.constraints.push_back(g);
  return s;
}

struct IsoResult {
  DiffForm value;
  FormZeroResult df_closed;
};

// Phi(alpha, beta) = f^p alpha + f^(p-1) df ^ tilde(beta) for closed alpha, beta.
inline IsoResult iso_decompose(const DiffForm& alpha, const DiffForm& beta, const TubularData& td, const Region& r,
                               const ZeroTestConfig& cfg) {
  const int p = alpha.degree();
  if (p < 1) throw std::invalid_argument("iso_decompose: alpha must have degree >= 1");
  if (beta.degree() != p - 1) throw std::invalid_argument("iso_decompose: beta must have degree p-1");
  FormZeroResult da = form_is_zero_on(ext_d(alpha), r, cfg);
  if (!da.proved()) throw PreconditionError("alpha is not closed", da.witness);
  FormZeroResult db = form_is_zero_on(ext_d(beta), slice_region(r, td), cfg);
  if (!db.proved()) throw PreconditionError("beta is not closed", db.witness);
  IsoResult out;
  out.value = pow(td.f, p) * alpha + pow(td.f, p - 1) * wedge(ext_d(td.chart, td.f), tilde_extend(beta, td));
  out.df_closed = form_is_zero_on(d_f(td.f, out.value), r, cfg);
  return out;
}

// f^q nu_bar = Phi(alpha, beta) with p = 2q + 1.
inline FormZeroResult check_collar(const DiffForm& nu_bar, int q, const DiffForm& alpha, const DiffForm& beta,
                                   const TubularData& td, const Region& r, const ZeroTestConfig& cfg) {
  if (alpha.degree() != 2 * q + 1) throw std::invalid_argument("check_collar: alpha must have degree 2q+1");
  IsoResult phi = iso_decompose(alpha, beta, td, r, cfg);
  return forms_equal(pow(td.f, q) * nu_bar, phi.value, r, cfg);
}

inline FormZeroResult verify_exact(const DiffForm& nu_bar, const DiffForm& tau, const Region& r, const ZeroTestConfig& cfg) {
  if (tau.degree() + 1 != nu_bar.degree())
    throw std::invalid_argument("verify_exact: primitive must have degree one less than the form");
  return form_is_zero_on(ext_d(tau) - nu_bar, r, cfg);
}

inline constexpr double kRegularGradient = 1e-6;

// 0 is a regular value of phi: at region samples moved onto the slice t = 0,
// phi vanishes and |grad phi| exceeds kRegularGradient.
inline void require_regular_value(const Expr& phi, const Chart& chart, const std::string& t, const Region& r,
                                  const ZeroTestConfig& cfg) {
  std::vector<Expr> grad;
  for (const auto& c : chart) grad.push_back(partial(phi, c));
  for (auto p : sample_region(r, cfg, cfg.sample_count, 0x5e9)) {
    p[t] = 0.0;
    double v, g2 = 0.0;
    try {
      v = eval(phi, p);
      for (const auto& g : grad) g2 += std::pow(eval(g, p), 2);
    } catch (const EvalError&) {
      throw PreconditionError("test function undefined on its zero set", p);
    }
    if (std::fabs(v) > cfg.abs_tol) throw PreconditionError("the slice " + t + " = 0 is not the zero set", p);
    if (!(std::sqrt(g2) > kRegularGradient)) throw PreconditionError("0 is not a regular value: gradient vanishes", p);
  }
}

// Regular value and basic weight are preconditions (thrown); the report
// carries (a) identity, (b) closedness, (c) dphi ^ nu_bar = 0, (d) exactness.
inline CheckReport check_weighted_exactness(const Foliation& F, const Expr& phi, const DiffForm& mu,
                                            const std::string& t, const DiffForm& tau, const ZeroTestConfig& cfg,
                                            DiffForm* nu_bar_out = nullptr) {
  require_regular_value(phi, F.chart(), t, F.region, cfg);
  const int q = F.codim();
  WeightedGV w = gv_weighted(phi, mu, q, F, cfg);
  if (nu_bar_out) *nu_bar_out = w.nu_bar;
  CheckReport rep;
  rep.add(zero_finding("(a) identity", w.identity));
  rep.add(zero_finding("(b) closed", w.closed));
  rep.add(zero_finding("(c) dphi^nu_bar", form_is_zero_on(wedge(ext_d(F.chart(), phi), w.nu_bar), F.region, cfg)));
  rep.add(zero_finding("(d) exact", verify_exact(w.nu_bar, tau, F.region, cfg)));
  rep.notes.push_back("zero set of the test function assumed connected (not verified)");
  return rep;
}

}  // namespace folgv

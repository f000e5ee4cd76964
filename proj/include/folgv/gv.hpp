// Frobenius witnesses, Godbillon-Vey forms, overlap identities, gluing of
// the minimal-dimension GV form and basic-function weighted GV forms.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "folgv/findings.hpp"
#include "folgv/foliation.hpp"
#include "folgv/forms.hpp"
#include "folgv/region.hpp"

namespace folgv {

class UnsupportedShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GluingError : public std::runtime_error {
 public:
  GluingError(const std::string& what, std::optional<Point> witness)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::optional<Point>& witness() const { return witness_; }

 private:
  std::optional<Point> witness_;
};

// foliation name -> mu on its region
using MuChoice = std::map<std::string, DiffForm>;

inline Expr sign_of(int k) { return Expr(k % 2 == 0 ? 1 : -1); }

inline IndexTuple positions(const Chart& chart, std::vector<std::string> coords) {
  IndexTuple idx;
  for (const auto& c : coords) {
    auto it = std::find(chart.begin(), chart.end(), c);
    if (it == chart.end()) throw ChartError("'" + c + "' is not a chart coordinate");
    idx.push_back(static_cast<int>(it - chart.begin()));
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

// nu = h dc_1 ^ ... ^ dc_q: returns (h, index tuple).
inline std::pair<Expr, IndexTuple> adapted_coefficient(const Foliation& F) {
  const auto& cs = F.nu.coefficients();
  if (F.nu.degree() != F.codim()) throw UnsupportedShapeError("nu degree differs from codimension");
  if (F.codim() == 0) return {F.nu.coefficient({}), {}};
  if (cs.size() != 1)
    throw UnsupportedShapeError("nu of '" + F.name + "' is not h*dc1^...^dcq; supply mu explicitly");
  const auto& [I, h] = *cs.begin();
  if (!F.transverse.empty() && positions(F.chart(), F.transverse) != I)
    throw UnsupportedShapeError("nu of '" + F.name + "' does not match its adapted coordinates");
  return {h, I};
}

inline FormZeroResult verify_frobenius(const DiffForm& nu, const DiffForm& mu, const Region& r,
                                       const ZeroTestConfig& cfg) {
  return form_is_zero_on(ext_d(nu) - wedge(nu, mu), r, cfg);
}

// mu = (-1)^q dh/h for nu = h dc_1 ^ ... ^ dc_q.
inline DiffForm solve_mu(const Foliation& F, const ZeroTestConfig& cfg = {}) {
  auto [h, I] = adapted_coefficient(F);
  if (h.is_zero()) throw PreconditionError("nu vanishes identically");
  for (const auto& p : sample_region(F.region, cfg, cfg.sample_count, 0x4d75)) {
    double v;
    try {
      v = eval(h, p);
    } catch (const EvalError&) {
      throw PreconditionError("coefficient of nu undefined at a region sample", p);
    }
    if (v == 0.0) throw PreconditionError("coefficient of nu vanishes at a region sample", p);
  }
  DiffForm mu = (sign_of(F.codim()) * reciprocal(h)) * ext_d(F.chart(), h);
  DiffForm residual = ext_d(F.nu) - wedge(F.nu, mu);
  for (const auto& [J, c] : residual.coefficients())
    if (!prove_zero(c, F.region)) throw std::logic_error("solve_mu: Frobenius identity not proved for " + F.name);
  return mu;
}

inline DiffForm gv_form(const DiffForm& mu, int q) {
  if (mu.degree() != 1) throw std::invalid_argument("gv_form: mu must be a 1-form");
  return wedge(mu, form_power(ext_d(mu), q));
}

struct ThetaSolution {
  DiffForm theta;
  int sign = 1;  // which of +-(h1/h2) dx~ satisfied the identity
  FormZeroResult check;
};

// theta with nu_sub = nu_sup ^ theta in adapted coordinates.
inline ThetaSolution solve_theta(const Foliation& sub, const Foliation& sup, const Region& overlap,
                                 const ZeroTestConfig& cfg) {
  if (sub.chart() != sup.chart()) throw ChartError("solve_theta: foliations on different charts");
  if (sub.transverse.empty() || sup.transverse.empty())
    throw UnsupportedShapeError("solve_theta needs adapted coordinates on both foliations");
  const int q1 = sub.codim() - sup.codim();
  if (q1 <= 0) throw UnsupportedShapeError("solve_theta: first foliation must have the smaller leaves");
  for (const auto& c : sup.transverse)
    if (std::find(sub.transverse.begin(), sub.transverse.end(), c) == sub.transverse.end())
      throw UnsupportedShapeError("adapted coordinate '" + c + "' of the larger leaves is not transverse to the smaller");
  Expr h1 = adapted_coefficient(sub).first;
  Expr h2 = adapted_coefficient(sup).first;
  for (const auto& p : sample_region(overlap, cfg, cfg.sample_count, 0x7e7a)) {
    double v;
    try {
      v = eval(h2, p);
    } catch (const EvalError&) {
      throw PreconditionError("coefficient of the larger-leaf form undefined on the overlap", p);
    }
    if (v == 0.0) throw PreconditionError("coefficient of the larger-leaf form vanishes on the overlap", p);
  }
  std::vector<std::string> tilde;
  for (const auto& c : sub.chart())
    if (std::find(sub.transverse.begin(), sub.transverse.end(), c) != sub.transverse.end() &&
        std::find(sup.transverse.begin(), sup.transverse.end(), c) == sup.transverse.end())
      tilde.push_back(c);
  DiffForm base = DiffForm::scalar(sub.chart(), h1 / h2);
  for (const auto& c : tilde) base = wedge(base, DiffForm::basis(sub.chart(), c));

  auto attempt = [&](int s) {
    DiffForm theta = Expr(s) * base;
    return ThetaSolution{theta, s, form_is_zero_on(sub.nu - wedge(sup.nu, theta), overlap, cfg)};
  };
  ThetaSolution plus = attempt(1);
  if (plus.check.proved()) return plus;
  ThetaSolution minus = attempt(-1);
  if (minus.check.proved() || (plus.check.nonzero() && !minus.check.nonzero())) return minus;
  return plus;
}

inline DiffForm mu3(const DiffForm& mu1, const DiffForm& mu2, int q1, int q2) {
  return sign_of(q2) * (mu1 - sign_of(q1) * mu2);
}

// Membership checks (a)-(d) in the transverse ideal of the larger leaves.
inline CheckReport check_overlap_identities(const Foliation& sub, const Foliation& sup, const DiffForm& mu1,
                                            const DiffForm& mu2, const DiffForm& theta, const Region& overlap,
                                            const ZeroTestConfig& cfg) {
  const int q1 = sub.codim() - sup.codim();
  const int q2 = sup.codim();
  const auto& gens = sup.decomposition;
  DiffForm m3 = mu3(mu1, mu2, q1, q2);
  DiffForm dm3 = ext_d(m3);
  CheckReport rep;
  auto member = [&](const std::string& name, const DiffForm& b) {
    try {
      rep.add(zero_finding(name, ideal_member(b, gens, overlap, cfg)));
    } catch (const PreconditionError& e) {
      rep.add(Finding{name, Status::Fail, e.what(), e.witness(), {}});
    }
  };
  member("(a) d(theta) - theta^mu3-combination in I",
         ext_d(theta) - sign_of(q2) * wedge(theta, mu1 - sign_of(q1) * mu2));
  member("(b) theta^d(mu3) in I", wedge(theta, dm3));
  member("(c) d(mu3) in I", dm3);
  member("(d) d(mu1) in I", ext_d(mu1));
  return rep;
}

inline DiffForm mu_for(const Foliation& F, const MuChoice& mus, const ZeroTestConfig& cfg) {
  auto it = mus.find(F.name);
  if (it != mus.end()) return it->second;
  return solve_mu(F, cfg);
}

namespace detail {

// Vanishing of (d mu_min)^(1+q_j) and of the GV form of the member `lo` on
// every overlap with the members in `others`.
inline CheckReport minimal_vanishing(const Foliation& lo, const DiffForm& mu, const std::vector<const Foliation*>& others,
                                     const ZeroTestConfig& cfg) {
  CheckReport rep;
  DiffForm dmu = ext_d(mu);
  DiffForm gv = gv_form(mu, lo.codim());
  for (const Foliation* hi : others) {
    auto ov = sampled_overlap(lo, *hi, cfg);
    std::string tag = "[" + lo.name + "&" + hi->name + "]";
    if (!ov) {
      rep.add("power" + tag, Status::Pass, "no overlap detected");
      continue;
    }
    Finding p = zero_finding("power" + tag, form_is_zero_on(form_power(dmu, 1 + hi->codim()), *ov, cfg));
    p.detail = "(d mu)^" + std::to_string(1 + hi->codim()) + ": " + p.detail;
    if (p.status == Status::Fail) rep.notes.push_back("power" + tag + ": try a gauge change mu -> mu + f*omega");
    rep.add(std::move(p));
    rep.add(zero_finding("gv-vanishes" + tag, form_is_zero_on(gv, *ov, cfg)));
  }
  return rep;
}

inline const Foliation& minimal_member(const FoliationFamily& fam) {
  if (fam.members.empty()) throw std::invalid_argument("empty family");
  return fam.members[by_rank(fam).front()];
}

}  // namespace detail

inline CheckReport check_minimal_vanishing(const FoliationFamily& fam, const MuChoice& mus, const ZeroTestConfig& cfg) {
  const Foliation& lo = detail::minimal_member(fam);
  std::vector<const Foliation*> others;
  for (const auto& m : fam.members)
    if (m.leaf_dim > lo.leaf_dim) others.push_back(&m);
  return detail::minimal_vanishing(lo, mu_for(lo, mus, cfg), others, cfg);
}

struct GVResult {
  PiecewiseForm form;
  CheckReport report;
  bool glued = false;
  int degree = 0;
  int rank = 0;
  std::string base;  // member carrying the non-zero piece
};

// GV form of the stratum of rank ranks()[i], extended by zero.
inline GVResult gv_min(const FoliationFamily& fam, const MuChoice& mus, std::size_t i, const ZeroTestConfig& cfg) {
  auto ranks = fam.ranks();
  if (i >= ranks.size()) throw DomainError("stratum index out of range");
  const int r = ranks[i];
  const int m = static_cast<int>(fam.chart.size());
  const Foliation* lo = nullptr;
  std::vector<const Foliation*> others;
  for (const auto& f : fam.members) {
    if (f.leaf_dim == r && !lo) lo = &f;
    else if (f.leaf_dim > r) others.push_back(&f);
  }
  if (!lo) throw DomainError("no member of rank " + std::to_string(r));
  GVResult out;
  out.rank = r;
  out.base = lo->name;
  out.degree = 2 * (m - r) + 1;
  DiffForm mu = mu_for(*lo, mus, cfg);
  out.report.add(zero_finding("frobenius[" + lo->name + "]", verify_frobenius(lo->nu, mu, lo->region, cfg)));
  CheckReport van = detail::minimal_vanishing(*lo, mu, others, cfg);
  for (const auto& f : van.findings)
    if (f.status == Status::Fail)
      throw GluingError("GV form does not vanish on overlap " + f.name + " (" + f.detail + ")", f.witness);
  out.report.append(van, "");

  DiffForm gv = gv_form(mu, m - r);
  out.report.add(zero_finding("closed[" + lo->name + "]", form_is_zero_on(ext_d(gv), lo->region, cfg)));
  out.form.degree = out.degree;
  out.form.zero_outside = true;
  out.form.pieces.push_back(Piece{lo->region, gv});
  for (const Foliation* f : others) out.form.pieces.push_back(Piece{f->region, DiffForm(fam.chart, out.degree)});
  out.glued = van.overall() == Status::Pass;
  return out;
}

inline FormZeroResult check_basic(const Expr& phi, const Foliation& F, const Region& r, const ZeroTestConfig& cfg) {
  return ideal_member(ext_d(F.chart(), phi), F.decomposition, r, cfg);
}

struct WeightedGV {
  DiffForm nu_bar;
  FormZeroResult basic;
  FormZeroResult identity;  // nu_bar = phi^(1+q) mu ^ (d mu)^q
  FormZeroResult closed;
  FormZeroResult dphi_wedge;  // d phi ^ mu ^ (d mu)^q = 0
};

inline WeightedGV gv_weighted(const Expr& phi, const DiffForm& mu, int q, const Foliation& F, const ZeroTestConfig& cfg) {
  WeightedGV out;
  out.basic = check_basic(phi, F, F.region, cfg);
  if (out.basic.nonzero()) throw PreconditionError("weight is not basic for " + F.name, out.basic.witness);
  DiffForm mubar = phi * mu;
  out.nu_bar = gv_form(mubar, q);
  out.identity = forms_equal(out.nu_bar, pow(phi, 1 + q) * gv_form(mu, q), F.region, cfg);
  out.closed = form_is_zero_on(ext_d(out.nu_bar), F.region, cfg);
  out.dphi_wedge = form_is_zero_on(wedge(ext_d(F.chart(), phi), gv_form(mu, q)), F.region, cfg);
  return out;
}

}  // namespace folgv

// Regular foliations on regions, families of them, rank and strata.
#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "folgv/findings.hpp"
#include "folgv/forms.hpp"
#include "folgv/region.hpp"

namespace folgv {

class CoverageError : public std::runtime_error {
 public:
  explicit CoverageError(const std::string& what, std::optional<Point> witness = std::nullopt)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::optional<Point>& witness() const { return witness_; }

 private:
  std::optional<Point> witness_;
};

// nu = decomposition[0] ^ ... ^ decomposition[q-1]; q = 0 means the one-leaf
// foliation with nu = 1.
struct Foliation {
  std::string name;
  Region region;
  int leaf_dim = 0;
  DiffForm nu;
  std::vector<DiffForm> decomposition;
  std::vector<std::string> transverse;  // adapted coordinates, empty if not declared

  const Chart& chart() const { return region.coords; }
  int dimension() const { return static_cast<int>(region.coords.size()); }
  int codim() const { return dimension() - leaf_dim; }
};

// Builds a foliation; nu defaults to the wedge of the decomposition.
inline Foliation make_foliation(std::string name, Region region, int leaf_dim, std::vector<DiffForm> decomposition,
                                std::optional<DiffForm> nu = std::nullopt,
                                std::vector<std::string> transverse = {}) {
  Foliation f;
  f.name = std::move(name);
  f.region = std::move(region);
  f.leaf_dim = leaf_dim;
  f.decomposition = std::move(decomposition);
  f.transverse = std::move(transverse);
  if (leaf_dim < 0 || leaf_dim > f.dimension()) throw std::invalid_argument("leaf dimension out of range");
  for (const auto& w : f.decomposition)
    if (w.chart() != f.chart()) throw ChartError("decomposition form on a different chart");
  f.nu = nu ? *nu : wedge_all(f.chart(), f.decomposition);
  if (f.nu.chart() != f.chart()) throw ChartError("nu on a different chart");
  for (const auto& c : f.transverse)
    if (std::find(f.chart().begin(), f.chart().end(), c) == f.chart().end())
      throw ChartError("adapted coordinate '" + c + "' is not in the chart");
  return f;
}

inline CheckReport validate_foliation(const Foliation& F, const ZeroTestConfig& cfg) {
  CheckReport rep;
  const int q = F.codim();
  if (F.nu.degree() != q || static_cast<int>(F.decomposition.size()) != q) {
    rep.add("degree", Status::Fail,
            "codimension " + std::to_string(q) + " but nu has degree " + std::to_string(F.nu.degree()) +
                " and " + std::to_string(F.decomposition.size()) + " generators");
    return rep;
  }
  rep.add("degree", Status::Pass, "nu has degree " + std::to_string(q));
  rep.add(zero_finding("decomposition-product", forms_equal(wedge_all(F.chart(), F.decomposition), F.nu, F.region, cfg)));

  try {
    require_independent(F.decomposition, F.region, cfg);
    rep.add("independence", Status::Pass, "Gram determinant above tolerance at every sample");
  } catch (const PreconditionError& e) {
    Finding f{"independence", Status::Fail, e.what(), e.witness(), {}};
    rep.add(std::move(f));
  } catch (const SamplingError& e) {
    rep.add("independence", Status::Undecided, e.what());
  }

  FormZeroResult integ;
  integ.residual = DiffForm(F.chart(), 2 + q);
  for (std::size_t a = 0; a < F.decomposition.size(); ++a) {
    FormZeroResult z = form_is_zero_on(wedge(ext_d(F.decomposition[a]), F.nu), F.region, cfg);
    if (z.nonzero() || (z.verdict == Verdict::Undecided && integ.proved())) integ = z;
    else if (integ.proved() && z.method != "normal-form") integ.method = z.method;
    if (integ.nonzero()) break;
  }
  rep.add(zero_finding("integrability", integ));
  return rep;
}

// Indexed cover of foliations.  `saturated` is the user's saturation assertion; it
// is recorded, not verified.
struct FoliationFamily {
  std::string name;
  Chart chart;
  std::vector<Interval> box;
  std::vector<Foliation> members;
  bool saturated = false;

  Region working_box() const { return whole_box(chart, box, name + ".box"); }

  std::vector<int> ranks() const {
    std::set<int> s;
    for (const auto& m : members) s.insert(m.leaf_dim);
    return {s.begin(), s.end()};
  }
};

// Members sorted by leaf dimension, as indices.
inline std::vector<std::size_t> by_rank(const FoliationFamily& fam) {
  std::vector<std::size_t> idx(fam.members.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return fam.members[a].leaf_dim < fam.members[b].leaf_dim;
  });
  return idx;
}

inline int rank_at(const FoliationFamily& fam, const Point& p) {
  std::optional<int> r;
  for (const auto& m : fam.members)
    if (m.region.contains(p)) r = std::max(r.value_or(m.leaf_dim), m.leaf_dim);
  if (!r) throw CoverageError("point lies in no region of the family", p);
  return *r;
}

// Overlap of two members, or nullopt when sampling finds no point in it.
inline std::optional<Region> sampled_overlap(const Foliation& a, const Foliation& b, const ZeroTestConfig& cfg) {
  Region r = intersect(a.region, b.region);
  if (!try_sample_region(r, cfg, 1, 0x0fe7)) return std::nullopt;
  return r;
}

inline CheckReport check_family(const FoliationFamily& fam, const ZeroTestConfig& cfg) {
  CheckReport rep;
  for (const auto& m : fam.members) {
    if (m.chart() != fam.chart) throw ChartError("member '" + m.name + "' is on a different chart");
    CheckReport v = validate_foliation(m, cfg);
    Finding f{"open[" + m.name + "]", v.overall(), {}, std::nullopt, {}};
    for (const auto& x : v.findings) {
      if (!f.detail.empty()) f.detail += "; ";
      f.detail += x.name + " " + status_name(x.status);
      if (x.status != Status::Pass && !f.witness) {
        f.witness = x.witness;
        f.witness_form = x.witness_form;
      }
    }
    rep.add(std::move(f));
  }

  {
    Finding f{"distinct-ranks", Status::Pass, "leaf dimensions pairwise distinct", std::nullopt, {}};
    for (std::size_t i = 0; i < fam.members.size(); ++i)
      for (std::size_t j = i + 1; j < fam.members.size(); ++j)
        if (fam.members[i].leaf_dim == fam.members[j].leaf_dim && f.status == Status::Pass) {
          f.status = Status::Fail;
          f.detail = "members '" + fam.members[i].name + "' and '" + fam.members[j].name +
                     "' share leaf dimension " + std::to_string(fam.members[i].leaf_dim);
        }
    rep.add(std::move(f));
  }

  {
    Finding f{"cover", Status::Pass, "every box sample lies in some region", std::nullopt, {}};
    for (const auto& p : sample_region(fam.working_box(), cfg, cfg.sample_count, 0xc0e7)) {
      bool in = std::any_of(fam.members.begin(), fam.members.end(),
                            [&](const Foliation& m) { return m.region.contains(p); });
      if (!in) {
        f.status = Status::Fail;
        f.detail = "box sample outside every region";
        f.witness = p;
        break;
      }
    }
    rep.add(std::move(f));
  }

  auto order = by_rank(fam);
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const Foliation& lo = fam.members[order[a]];
      const Foliation& hi = fam.members[order[b]];
      if (lo.leaf_dim == hi.leaf_dim) continue;
      std::string name = "nesting[" + lo.name + "<" + hi.name + "]";
      auto ov = sampled_overlap(lo, hi, cfg);
      if (!ov) {
        rep.add(name, Status::Pass, "no overlap detected");
        continue;
      }
      Finding worst_f{name, Status::Pass, "tangency: every generator of the larger leaves lies in the ideal",
                      std::nullopt, {}};
      for (const auto& g : hi.decomposition) {
        try {
          Finding f = zero_finding(name, ideal_member(g, lo.decomposition, *ov, cfg));
          if (worst(worst_f.status, f.status) != worst_f.status) worst_f = f;
        } catch (const PreconditionError& e) {
          worst_f = Finding{name, Status::Fail, e.what(), e.witness(), {}};
        }
      }
      rep.add(std::move(worst_f));
    }

  rep.notes.push_back(std::string("saturation by whole leaves asserted by user: ") +
                      (fam.saturated ? "yes" : "no") + " (not verified)");
  return rep;
}

enum class StratumMode { Eq, Lt, Le, Gt, Ge };

inline const char* mode_name(StratumMode m) {
  switch (m) {
    case StratumMode::Eq: return "=";
    case StratumMode::Lt: return "<";
    case StratumMode::Le: return "<=";
    case StratumMode::Gt: return ">";
    case StratumMode::Ge: return ">=";
  }
  return "?";
}

// Open strata (>, >=) come with the union of regions realizing them; the
// others are only available through the membership predicate.
struct Stratum {
  int rank = 0;
  StratumMode mode = StratumMode::Ge;
  std::vector<Region> union_of;
  std::function<bool(const Point&)> contains;
};

inline Stratum stratum(const FoliationFamily& fam, int r, StratumMode mode) {
  auto rs = fam.ranks();
  if (std::find(rs.begin(), rs.end(), r) == rs.end())
    throw DomainError("rank " + std::to_string(r) + " is not a rank of the family");
  Stratum s;
  s.rank = r;
  s.mode = mode;
  if (mode == StratumMode::Ge || mode == StratumMode::Gt)
    for (const auto& m : fam.members)
      if (mode == StratumMode::Ge ? m.leaf_dim >= r : m.leaf_dim > r) s.union_of.push_back(m.region);
  s.contains = [fam, r, mode](const Point& p) {
    int k = rank_at(fam, p);
    switch (mode) {
      case StratumMode::Eq: return k == r;
      case StratumMode::Lt: return k < r;
      case StratumMode::Le: return k <= r;
      case StratumMode::Gt: return k > r;
      case StratumMode::Ge: return k >= r;
    }
    return false;
  };
  return s;
}

// Leaves map to leaves iff pullback preserves the transverse ideal.
inline FormZeroResult check_invariance(const CoordinateMap& m, const Foliation& F, const ZeroTestConfig& cfg) {
  m.validate();
  if (m.source != F.chart() || m.target != F.chart()) throw ChartError("map must act on the foliation's chart");
  for (const auto& p : sample_region(F.region, cfg, cfg.sample_count, 0x1a7a)) {
    Point img;
    try {
      img = m.apply(p);
    } catch (const EvalError&) {
      throw PreconditionError("map is undefined at a region sample", p);
    }
    if (!F.region.contains(img)) throw PreconditionError("map does not preserve the region", p);
  }
  FormZeroResult out;
  out.residual = DiffForm(F.chart(), F.codim() + 1);
  for (const auto& g : F.decomposition) {
    FormZeroResult z = form_is_zero_on(wedge(pullback(m, g), F.nu), F.region, cfg);
    if (z.nonzero() || (z.verdict == Verdict::Undecided && out.proved())) out = z;
    if (out.nonzero()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Piecewise forms

struct Piece {
  Region region;
  DiffForm form;
};

// Pieces on regions; outside all pieces the form is zero when zero_outside.
struct PiecewiseForm {
  int degree = 0;
  std::vector<Piece> pieces;
  bool zero_outside = true;

  std::optional<DiffForm> at(const Point& p) const {
    for (const auto& pc : pieces)
      if (pc.region.contains(p)) return pc.form;
    return std::nullopt;
  }
};

inline CheckReport check_well_defined(const PiecewiseForm& pw, const ZeroTestConfig& cfg) {
  CheckReport rep;
  for (std::size_t i = 0; i < pw.pieces.size(); ++i) {
    if (pw.pieces[i].form.degree() != pw.degree) throw std::invalid_argument("piece degree mismatch");
    for (std::size_t j = i + 1; j < pw.pieces.size(); ++j) {
      std::string name = "agree[" + pw.pieces[i].region.name + "," + pw.pieces[j].region.name + "]";
      Region ov = intersect(pw.pieces[i].region, pw.pieces[j].region);
      if (!try_sample_region(ov, cfg, 1, 0x0fe7)) {
        rep.add(name, Status::Pass, "no overlap detected");
        continue;
      }
      rep.add(zero_finding(name, forms_equal(pw.pieces[i].form, pw.pieces[j].form, ov, cfg)));
    }
  }
  return rep;
}

}  // namespace folgv

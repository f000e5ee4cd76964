// Differential forms with symbolic coefficients on a coordinate chart.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "folgv/eval.hpp"
#include "folgv/print.hpp"
#include "folgv/region.hpp"
#include "folgv/symbolic.hpp"

namespace folgv {

using Chart = std::vector<std::string>;
using IndexTuple = std::vector<int>;  // strictly increasing positions in the chart

class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what, std::optional<Point> witness = std::nullopt)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::optional<Point>& witness() const { return witness_; }

 private:
  std::optional<Point> witness_;
};

// Sparse p-form: absent index tuples have zero coefficient.
class DiffForm {
 public:
  DiffForm() = default;
  DiffForm(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
    if (degree < 0) throw std::invalid_argument("negative form degree");
  }

  static DiffForm scalar(Chart chart, const Expr& f) {
    DiffForm out(std::move(chart), 0);
    out.set({}, f);
    return out;
  }

  static DiffForm basis(const Chart& chart, const std::string& coord) {
    auto it = std::find(chart.begin(), chart.end(), coord);
    if (it == chart.end()) throw ChartError("'" + coord + "' is not a chart coordinate");
    DiffForm out(chart, 1);
    out.set({static_cast<int>(it - chart.begin())}, Expr(1));
    return out;
  }

  const Chart& chart() const { return chart_; }
  int degree() const { return degree_; }
  int dimension() const { return static_cast<int>(chart_.size()); }
  const std::map<IndexTuple, Expr>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }

  Expr coefficient(const IndexTuple& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? Expr() : it->second;
  }

  // Scalar value of a 0-form.
  Expr scalar_value() const { return coefficient({}); }

  void set(const IndexTuple& idx, const Expr& c) {
    if (static_cast<int>(idx.size()) != degree_) throw std::invalid_argument("index tuple length != degree");
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= dimension()) throw std::out_of_range("index outside chart");
      if (k && idx[k - 1] >= idx[k]) throw std::invalid_argument("index tuple not strictly increasing");
    }
    if (c.is_zero()) coeffs_.erase(idx);
    else coeffs_[idx] = c;
  }

  void add(const IndexTuple& idx, const Expr& c) {
    if (c.is_zero()) return;
    set(idx, coefficient(idx) + c);
  }

  std::string basis_name(const IndexTuple& idx) const {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k) s += "^";
      s += "d" + chart_[static_cast<std::size_t>(idx[k])];
    }
    return s;
  }

 private:
  Chart chart_;
  int degree_ = 0;
  std::map<IndexTuple, Expr> coeffs_;
};

inline void require_same_chart(const DiffForm& a, const DiffForm& b) {
  if (a.chart() != b.chart()) throw ChartError("forms live on different charts");
}

inline DiffForm operator+(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a, b);
  if (a.degree() != b.degree()) throw std::invalid_argument("adding forms of different degree");
  DiffForm out = a;
  for (const auto& [idx, c] : b.coefficients()) out.add(idx, c);
  return out;
}

inline DiffForm operator*(const Expr& f, const DiffForm& a) {
  DiffForm out(a.chart(), a.degree());
  if (f.is_zero()) return out;
  for (const auto& [idx, c] : a.coefficients()) out.set(idx, f * c);
  return out;
}

inline DiffForm operator*(const DiffForm& a, const Expr& f) { return f * a; }
inline DiffForm operator-(const DiffForm& a) { return Expr(-1) * a; }
inline DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

inline DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a, b);
  DiffForm out(a.chart(), a.degree() + b.degree());
  if (out.degree() > out.dimension()) return out;
  for (const auto& [I, ci] : a.coefficients()) {
    for (const auto& [J, cj] : b.coefficients()) {
      IndexTuple K;
      K.reserve(I.size() + J.size());
      // sign of the shuffle = parity of pairs (i in I, j in J) with i > j
      int inversions = 0;
      bool overlap = false;
      std::size_t p = 0, q = 0;
      while (p < I.size() || q < J.size()) {
        if (q == J.size() || (p < I.size() && I[p] < J[q])) {
          K.push_back(I[p++]);
        } else if (p == I.size() || J[q] < I[p]) {
          inversions += static_cast<int>(I.size() - p);
          K.push_back(J[q++]);
        } else {
          overlap = true;
          break;
        }
      }
      if (overlap) continue;
      Expr c = ci * cj;
      out.add(K, inversions % 2 ? -c : c);
    }
  }
  return out;
}

inline DiffForm wedge_all(const Chart& chart, const std::vector<DiffForm>& forms) {
  DiffForm out = DiffForm::scalar(chart, Expr(1));
  for (const auto& f : forms) out = wedge(out, f);
  return out;
}

inline DiffForm ext_d(const DiffForm& a) {
  DiffForm out(a.chart(), a.degree() + 1);
  if (out.degree() > out.dimension()) return out;
  for (const auto& [I, c] : a.coefficients()) {
    for (int k = 0; k < a.dimension(); ++k) {
      if (std::binary_search(I.begin(), I.end(), k)) continue;
      Expr dc = partial(c, a.chart()[static_cast<std::size_t>(k)]);
      if (dc.is_zero()) continue;
      auto pos = std::lower_bound(I.begin(), I.end(), k);
      long before = pos - I.begin();
      IndexTuple K = I;
      K.insert(K.begin() + before, k);
      out.add(K, before % 2 ? -dc : dc);
    }
  }
  return out;
}

// Total differential of a scalar field.
inline DiffForm ext_d(const Chart& chart, const Expr& f) { return ext_d(DiffForm::scalar(chart, f)); }

inline DiffForm form_power(const DiffForm& a, int k) {
  if (k < 0) throw std::invalid_argument("negative form power");
  DiffForm out = DiffForm::scalar(a.chart(), Expr(1));
  for (int i = 0; i < k; ++i) {
    out = wedge(out, a);
    if (out.is_zero()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coordinate maps and pullback

struct CoordinateMap {
  Chart source;
  Chart target;
  std::vector<Expr> components;  // one per target coordinate, in source coordinates

  void validate() const {
    if (components.size() != target.size())
      throw ChartError("coordinate map needs one component per target coordinate");
  }

  static CoordinateMap identity(const Chart& c) {
    CoordinateMap m{c, c, {}};
    for (const auto& n : c) m.components.push_back(Expr::coordinate(n));
    return m;
  }

  Point apply(const Point& p) const {
    Point out;
    for (std::size_t k = 0; k < target.size(); ++k) out[target[k]] = eval(components[k], p);
    return out;
  }
};

inline DiffForm pullback(const CoordinateMap& m, const DiffForm& a) {
  m.validate();
  if (a.chart() != m.target) throw ChartError("pullback: form is not on the map's target chart");
  std::map<std::string, Expr> subst;
  for (std::size_t k = 0; k < m.target.size(); ++k) subst.emplace(m.target[k], m.components[k]);
  std::vector<DiffForm> differentials;
  for (const auto& comp : m.components) differentials.push_back(ext_d(m.source, comp));

  DiffForm out(m.source, a.degree());
  for (const auto& [I, c] : a.coefficients()) {
    DiffForm term = DiffForm::scalar(m.source, substitute(c, subst));
    for (int idx : I) term = wedge(term, differentials[static_cast<std::size_t>(idx)]);
    out = out + term;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::string to_string(const DiffForm& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [I, c] : a.coefficients()) {
    std::string basis = a.basis_name(I);
    std::string cs;
    bool negative = false;
    if (c.terms().size() == 1) {
      negative = c.terms()[0].coeff < 0;
      Expr mag = negative ? -c : c;
      cs = to_string(mag);
      if (cs == "1" && !basis.empty()) cs.clear();
    } else {
      cs = "(" + to_string(c) + ")";
    }
    std::string piece = cs;
    if (!basis.empty()) piece += (cs.empty() ? "" : "*") + basis;
    if (first) out += negative ? "-" : "";
    else out += negative ? " - " : " + ";
    out += piece;
    first = false;
  }
  return out;
}

inline std::string to_latex(const DiffForm& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [I, c] : a.coefficients()) {
    std::string basis;
    for (std::size_t k = 0; k < I.size(); ++k) {
      if (k) basis += " \\wedge ";
      basis += "d" + a.chart()[static_cast<std::size_t>(I[k])];
    }
    std::string cs = to_latex(c);
    if (c.terms().size() > 1) cs = "\\left(" + cs + "\\right)";
    else if (cs == "1" && !basis.empty()) cs.clear();
    else if (cs == "-1" && !basis.empty()) cs = "-";
    if (!first) out += " + ";
    out += cs;
    if (!basis.empty()) out += (cs.empty() || cs == "-" ? "" : "\\, ") + basis;
    first = false;
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const DiffForm& a) { return os << to_string(a); }

// ---------------------------------------------------------------------------
// Zero tests on forms

inline bool structurally_equal(const DiffForm& a, const DiffForm& b) {
  if (a.chart() != b.chart() || a.degree() != b.degree()) return false;
  const auto& ca = a.coefficients();
  const auto& cb = b.coefficients();
  if (ca.size() != cb.size()) return false;
  auto it = cb.begin();
  for (const auto& [I, c] : ca) {
    if (I != it->first || c != it->second) return false;
    ++it;
  }
  return true;
}

struct FormZeroResult {
  Verdict verdict = Verdict::ProvedZero;
  DiffForm residual;
  std::optional<Point> witness;
  std::string witness_component;  // basis name of the offending coefficient
  double witness_value = 0.0;
  std::string method = "normal-form";

  bool proved() const { return verdict == Verdict::ProvedZero; }
  bool nonzero() const { return verdict == Verdict::NonZero; }
};

// Component-wise zero test; the first NONZERO component supplies the witness.
inline FormZeroResult form_is_zero_on(const DiffForm& a, const Region& r, const ZeroTestConfig& cfg) {
  FormZeroResult res;
  res.residual = a;
  if (a.is_zero()) return res;
  if (a.chart() != r.coords) throw ChartError("form and region live on different charts");
  DiffForm residual(a.chart(), a.degree());
  for (const auto& [I, c] : a.coefficients()) {
    ZeroResult z = is_zero_on(c, r, cfg);
    if (!z.proved()) residual.set(I, z.residual);
    if (z.method != "normal-form" && res.method == "normal-form") res.method = z.method;
    if (z.nonzero() && res.verdict != Verdict::NonZero) {
      res.verdict = Verdict::NonZero;
      res.witness = z.witness;
      res.witness_component = a.basis_name(I);
      res.witness_value = z.witness_value;
      res.method = "sampling";
    } else if (z.verdict == Verdict::Undecided && res.verdict == Verdict::ProvedZero) {
      res.verdict = Verdict::Undecided;
      res.method = "sampling";
    }
  }
  res.residual = residual;
  return res;
}

inline FormZeroResult forms_equal(const DiffForm& a, const DiffForm& b, const Region& r,
                                  const ZeroTestConfig& cfg) {
  require_same_chart(a, b);
  if (a.degree() != b.degree()) throw std::invalid_argument("forms_equal: degree mismatch");
  return form_is_zero_on(a - b, r, cfg);
}

// Values of 1-forms at a point as row vectors.
inline std::vector<std::vector<double>> one_form_rows(const std::vector<DiffForm>& gens, const Point& p) {
  std::vector<std::vector<double>> rows;
  for (const auto& g : gens) {
    if (g.degree() != 1) throw std::invalid_argument("generator is not a 1-form");
    std::vector<double> row(static_cast<std::size_t>(g.dimension()), 0.0);
    for (const auto& [I, c] : g.coefficients()) row[static_cast<std::size_t>(I[0])] = eval(c, p);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline double determinant(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
    }
  }
  return det;
}

inline double gram_determinant(const std::vector<DiffForm>& gens, const Point& p) {
  auto rows = one_form_rows(gens, p);
  std::vector<std::vector<double>> g(rows.size(), std::vector<double>(rows.size(), 0.0));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j)
      for (std::size_t k = 0; k < rows[i].size(); ++k) g[i][j] += rows[i][k] * rows[j][k];
  return determinant(std::move(g));
}

inline constexpr double kIndependenceTol = 1e-12;

// Throws PreconditionError at the first sample where the generators are
// (numerically) dependent.
inline void require_independent(const std::vector<DiffForm>& gens, const Region& r, const ZeroTestConfig& cfg) {
  if (gens.empty()) return;
  for (const auto& p : sample_region(r, cfg, cfg.sample_count, 0x67a3)) {
    double det;
    try {
      det = gram_determinant(gens, p);
    } catch (const EvalError&) {
      continue;
    }
    if (!(det > kIndependenceTol)) throw PreconditionError("generators are dependent at a sample", p);
  }
}

// b lies in the ideal generated by the pointwise independent 1-forms `gens`
// iff b ^ gens[0] ^ ... ^ gens[q-1] == 0.
inline FormZeroResult ideal_member(const DiffForm& b, const std::vector<DiffForm>& gens, const Region& r,
                                   const ZeroTestConfig& cfg) {
  require_independent(gens, r, cfg);
  DiffForm w = b;
  for (const auto& g : gens) w = wedge(w, g);
  return form_is_zero_on(w, r, cfg);
}

}  // namespace folgv

// Random expressions and forms for property tests, plus numeric oracles that
// do not go through the symbolic engine.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "folgv/forms.hpp"

namespace folgv::testkit {

class Gen {
 public:
  Gen(Chart chart, std::uint64_t seed) : chart_(std::move(chart)), rng_(seed) {}

  const Chart& chart() const { return chart_; }
  std::mt19937_64& rng() { return rng_; }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Rational coeff() {
    int n = pick(-4, 4);
    if (n == 0) n = 1;
    return Rational(n, pick(1, 3));
  }

  Expr coord() { return Expr::coordinate(chart_[static_cast<std::size_t>(pick(0, dim() - 1))]); }

  Expr monomial(int max_degree) {
    Expr m(coeff());
    for (int k = pick(0, max_degree); k > 0; --k) m *= coord();
    return m;
  }

  Expr polynomial(int terms = 3, int max_degree = 2) {
    Expr p;
    for (int i = pick(1, terms); i > 0; --i) p += monomial(max_degree);
    return p;
  }

  // Polynomial, sometimes times exp of a linear form.
  Expr smooth(bool allow_exp = true) {
    Expr p = polynomial();
    if (allow_exp && pick(0, 2) == 0) p *= exp(Expr(coeff()) * coord());
    return p;
  }

  DiffForm form(int degree, bool allow_exp = true, int max_terms = 2) {
    DiffForm f(chart_, degree);
    if (degree > dim()) return f;
    for (int i = pick(1, max_terms); i > 0; --i) {
      IndexTuple I = subset(degree);
      f.add(I, smooth(allow_exp));
    }
    return f;
  }

  DiffForm poly_form(int degree) { return form(degree, false); }

  IndexTuple subset(int k) {
    std::vector<int> all(static_cast<std::size_t>(dim()));
    for (int i = 0; i < dim(); ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), rng_);
    IndexTuple I(all.begin(), all.begin() + k);
    std::sort(I.begin(), I.end());
    return I;
  }

  Point point(double lo = -1.5, double hi = 1.5) {
    std::uniform_real_distribution<double> u(lo, hi);
    Point p;
    for (const auto& c : chart_) p[c] = u(rng_);
    return p;
  }

  int dim() const { return static_cast<int>(chart_.size()); }

 private:
  Chart chart_;
  std::mt19937_64 rng_;
};

inline Region box_region(const Chart& c, double half = 1.5) {
  return whole_box(c, std::vector<Interval>(c.size(), Interval{-half, half}));
}

// Richardson-extrapolated central difference.
template <class F>
double derivative(F&& f, double x, double h = 1e-2) {
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2 * s); };
  return (4 * d(h / 2) - d(h)) / 3;
}

inline double partial_numeric(const Expr& e, Point p, const std::string& c) {
  double x0 = p[c];
  return derivative(
      [&](double x) {
        p[c] = x;
        return eval(e, p);
      },
      x0);
}

// Value of a p-form on vectors (columns of V), by expanding into minors.
inline double form_on_vectors(const DiffForm& f, const Point& p, const Eigen::MatrixXd& V) {
  double s = 0.0;
  const int k = static_cast<int>(V.cols());
  for (const auto& [I, c] : f.coefficients()) {
    Eigen::MatrixXd M(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) M(a, b) = V(I[static_cast<std::size_t>(a)], b);
    s += eval(c, p) * (k == 0 ? 1.0 : M.determinant());
  }
  return s;
}

// Pointwise ideal membership by linear algebra: b lies in the ideal of the
// independent 1-forms g at p iff b vanishes on the common kernel of the g.
inline bool member_at(const DiffForm& b, const std::vector<DiffForm>& gens, const Point& p, double tol = 1e-9) {
  const int m = b.dimension();
  Eigen::MatrixXd G(static_cast<int>(gens.size()), m);
  auto rows = one_form_rows(gens, p);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < m; ++j) G(static_cast<int>(i), j) = rows[i][static_cast<std::size_t>(j)];
  Eigen::MatrixXd K = G.fullPivLu().kernel();
  if (gens.empty()) K = Eigen::MatrixXd::Identity(m, m);
  if (K.cols() == 1 && K.norm() == 0.0) K.resize(m, 0);  // full rank: kernel is {0}
  const int p_deg = b.degree();
  const int kd = static_cast<int>(K.cols());
  if (p_deg > kd) return true;
  // every p-subset of kernel basis vectors
  std::vector<int> sel(static_cast<std::size_t>(p_deg));
  for (int i = 0; i < p_deg; ++i) sel[static_cast<std::size_t>(i)] = i;
  double scale = 1.0;
  for (const auto& [I, c] : b.coefficients()) scale = std::max(scale, std::fabs(eval(c, p)));
  for (;;) {
    Eigen::MatrixXd V(m, p_deg);
    for (int a = 0; a < p_deg; ++a) V.col(a) = K.col(sel[static_cast<std::size_t>(a)]);
    if (std::fabs(form_on_vectors(b, p, V)) > tol * scale) return false;
    int i = p_deg - 1;
    while (i >= 0 && sel[static_cast<std::size_t>(i)] == kd - p_deg + i) --i;
    if (i < 0) break;
    ++sel[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p_deg; ++j) sel[static_cast<std::size_t>(j)] = sel[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

}  // namespace folgv::testkit

#include <gtest/gtest.h>

#include "folgv/gv.hpp"
#include "support.hpp"

using namespace folgv;

namespace {

const Chart xyz{"x", "y", "z"};
const Expr x = Expr::coordinate("x");
const Expr y = Expr::coordinate("y");
const Expr z = Expr::coordinate("z");
const DiffForm dx = DiffForm::basis(xyz, "x");
const DiffForm dy = DiffForm::basis(xyz, "y");
const DiffForm dz = DiffForm::basis(xyz, "z");

Region box() { return testkit::box_region(xyz, 2.0); }

Region half(const Expr& g, const std::string& name) {
  Region r = whole_box(xyz, {{-2, 3}, {-2, 2}, {-2, 2}}, name);
  r.constraints.push_back(g);
  return r;
}

const DiffForm gauge_mu = -(1 + y * z) * dx + z * dy;

// Codimension-one foliation on x > 0 next to the one-leaf foliation on x < 1.
FoliationFamily flat_gauge_family() {
  FoliationFamily fam;
  fam.name = "flat-gauge";
  fam.chart = xyz;
  fam.box = {{-2, 3}, {-2, 2}, {-2, 2}};
  fam.members.push_back(make_foliation("sheets", half(x, "U1"), 2, {dy - y * dx}, std::nullopt, {"y"}));
  fam.members.push_back(make_foliation("solid", half(1 - x, "U2"), 3, {}));
  return fam;
}

MuChoice flat_gauge_mus(bool corrupted) {
  Expr gauge = corrupted ? z : z * flatexp(x - 1);
  return {{"sheets", -dx + gauge * (dy - y * dx)}, {"solid", DiffForm(xyz, 1)}};
}

}  // namespace

TEST(Frobenius, Examples) {
  ZeroTestConfig cfg;
  EXPECT_TRUE(verify_frobenius(dy - y * dx, -dx, box(), cfg).proved());
  EXPECT_TRUE(verify_frobenius(dy - y * dx, gauge_mu, box(), cfg).proved());
  FormZeroResult bad = verify_frobenius(dy, dx, box(), cfg);
  EXPECT_TRUE(bad.nonzero());
  EXPECT_TRUE(bad.witness.has_value());
}

// Any mu + f nu is again a witness.
TEST(Frobenius, GaugeInvariance) {
  testkit::Gen g(xyz, 21);
  ZeroTestConfig cfg;
  DiffForm nu = dy - y * dx;
  for (int i = 0; i < 30; ++i) {
    Expr f = g.smooth();
    EXPECT_TRUE(verify_frobenius(nu, -dx + f * nu, box(), cfg).proved()) << to_string(f);
  }
}

TEST(SolveMu, Examples) {
  ZeroTestConfig cfg;
  EXPECT_TRUE(solve_mu(make_foliation("F", box(), 2, {dx}), cfg).is_zero());
  DiffForm mu = solve_mu(make_foliation("F", box(), 2, {exp(x * y) * dy}, std::nullopt, {"y"}), cfg);
  EXPECT_TRUE(structurally_equal(mu, -(y * dx + x * dy))) << to_string(mu);
  // codimension two: mu = +df/f
  Expr f = 2 + x * x;
  DiffForm mu2 = solve_mu(make_foliation("G", box(), 1, {dx, dy}, f * wedge(dx, dy), {"x", "y"}), cfg);
  EXPECT_TRUE(forms_equal(mu2, reciprocal(f) * ext_d(xyz, f), box(), cfg).proved());
}

TEST(SolveMu, RejectsUnsupportedShapes) {
  ZeroTestConfig cfg;
  EXPECT_THROW(solve_mu(make_foliation("F", box(), 2, {dy - y * dx}), cfg), UnsupportedShapeError);
  EXPECT_THROW(solve_mu(make_foliation("F", box(), 2, {log(x) * dy}), cfg), PreconditionError);
  EXPECT_THROW(solve_mu(make_foliation("F", box(), 2, {dy}, std::nullopt, {"z"}), cfg), UnsupportedShapeError);
}

TEST(SolveMu, SatisfiesFrobeniusOnRandomCoefficients) {
  testkit::Gen g(xyz, 22);
  ZeroTestConfig cfg;
  for (int i = 0; i < 30; ++i) {
    Expr h = exp(g.polynomial(2, 2));
    Foliation F = make_foliation("F", box(), 2, {h * dz}, std::nullopt, {"z"});
    EXPECT_TRUE(verify_frobenius(F.nu, solve_mu(F, cfg), box(), cfg).proved());
  }
}

TEST(GVForm, Examples) {
  EXPECT_TRUE(gv_form(-dx, 1).is_zero());
  EXPECT_TRUE(structurally_equal(gv_form(gauge_mu, 1), wedge(wedge(dx, dy), dz)));
  EXPECT_TRUE(gv_form(gauge_mu, 2).is_zero());
  EXPECT_THROW(gv_form(wedge(dx, dy), 1), std::invalid_argument);
}

TEST(GVForm, ClosedForRandomWitnesses) {
  testkit::Gen g({"x", "y", "z", "w"}, 23);
  Region r = testkit::box_region(g.chart());
  ZeroTestConfig cfg;
  // closedness needs the Frobenius identity, so mu comes from an actual foliation
  DiffForm nu = DiffForm::basis(g.chart(), "w") - Expr::coordinate("w") * DiffForm::basis(g.chart(), "x");
  for (int i = 0; i < 20; ++i) {
    DiffForm mu = -DiffForm::basis(g.chart(), "x") + g.smooth() * nu;
    ASSERT_TRUE(verify_frobenius(nu, mu, r, cfg).proved());
    EXPECT_TRUE(form_is_zero_on(ext_d(gv_form(mu, 1)), r, cfg).proved());
  }
}

// For verified pairs nu ^ d(mu) = 0, and gauge changes alter the GV form by a closed form.
TEST(GVForm, GaugeChangesAreClosed) {
  testkit::Gen g(xyz, 25);
  ZeroTestConfig cfg;
  DiffForm nu = dy - y * dx;
  for (int i = 0; i < 30; ++i) {
    DiffForm mu = -dx + g.polynomial(3, 2) * nu;
    DiffForm mu2 = mu + g.polynomial(3, 2) * nu;
    ASSERT_TRUE(verify_frobenius(nu, mu, box(), cfg).proved());
    ASSERT_TRUE(verify_frobenius(nu, mu2, box(), cfg).proved());
    EXPECT_TRUE(form_is_zero_on(wedge(nu, ext_d(mu)), box(), cfg).proved());
    EXPECT_TRUE(form_is_zero_on(ext_d(gv_form(mu, 1) - gv_form(mu2, 1)), box(), cfg).proved());
  }
}

TEST(Theta, Examples) {
  ZeroTestConfig cfg;
  Region ov = box();
  auto sub = [&](Expr h) { return make_foliation("sub", ov, 1, {dx, dy}, h * wedge(dx, dy), {"x", "y"}); };
  auto sup = [&](Expr h) { return make_foliation("sup", ov, 2, {dy}, h * dy, {"y"}); };
  ThetaSolution a = solve_theta(sub(Expr(1)), sup(Expr(1)), ov, cfg);
  EXPECT_TRUE(a.check.proved());
  EXPECT_TRUE(structurally_equal(a.theta, -dx));  // dy ^ (-dx) = dx ^ dy
  ThetaSolution b = solve_theta(sub(exp(z)), sup(exp(z)), ov, cfg);
  EXPECT_TRUE(b.check.proved());
  EXPECT_TRUE(structurally_equal(b.theta, -dx));
  ThetaSolution c = solve_theta(sub(Expr(2)), sup(Expr(1)), ov, cfg);
  EXPECT_TRUE(c.check.proved());
  EXPECT_EQ(c.sign, -1);
  EXPECT_TRUE(structurally_equal(c.theta, Expr(-2) * dx));
  EXPECT_THROW(solve_theta(sup(Expr(1)), sub(Expr(1)), ov, cfg), UnsupportedShapeError);
}

TEST(Theta, OverlapIdentitiesOnNestedPair) {
  ZeroTestConfig cfg;
  Foliation sub = make_foliation("sub", half(1 - x, "U"), 1, {exp(z) * dx, dy}, std::nullopt, {"x", "y"});
  Foliation sup = make_foliation("sup", half(x + 1, "V"), 2, {exp(z) * dy}, std::nullopt, {"y"});
  Region ov = intersect(sub.region, sup.region);
  ThetaSolution th = solve_theta(sub, sup, ov, cfg);
  ASSERT_TRUE(th.check.proved());
  CheckReport r = check_overlap_identities(sub, sup, solve_mu(sub, cfg), solve_mu(sup, cfg), th.theta, ov, cfg);
  EXPECT_EQ(r.findings.size(), 4u);
  EXPECT_EQ(r.overall(), Status::Pass);
}

TEST(Mu3, Formula) {
  DiffForm m1 = x * dz, m2 = dy;
  EXPECT_TRUE(structurally_equal(mu3(m1, m2, 1, 1), -(m1 + m2)));
  EXPECT_TRUE(structurally_equal(mu3(m1, m2, 2, 1), -(m1 - m2)));
  EXPECT_TRUE(structurally_equal(mu3(m1, m2, 1, 2), m1 + m2));
}

TEST(Mu3, Linearity) {
  testkit::Gen g(xyz, 26);
  for (int i = 0; i < 20; ++i) {
    DiffForm m1 = g.form(1), m2 = g.form(1);
    Expr a(g.coeff());
    int q1 = g.pick(1, 3), q2 = g.pick(0, 3);
    EXPECT_TRUE(structurally_equal(mu3(a * m1, a * m2, q1, q2), a * mu3(m1, m2, q1, q2)));
  }
}

TEST(GVMin, DegreeMatchesRank) {
  ZeroTestConfig cfg;
  FoliationFamily fam = flat_gauge_family();
  const int m = static_cast<int>(fam.chart.size());
  MuChoice mus = flat_gauge_mus(false);
  for (std::size_t i = 0; i < fam.ranks().size(); ++i) {
    GVResult g = gv_min(fam, mus, i, cfg);
    EXPECT_EQ(g.degree, 2 * (m - g.rank) + 1);
    EXPECT_EQ(g.form.degree, g.degree);
  }
  EXPECT_THROW(gv_min(fam, mus, 5, cfg), DomainError);
}

TEST(GVMin, FlatGaugeGlues) {
  ZeroTestConfig cfg;
  FoliationFamily fam = flat_gauge_family();
  MuChoice mus = flat_gauge_mus(false);
  EXPECT_EQ(check_minimal_vanishing(fam, mus, cfg).overall(), Status::Pass);
  GVResult g = gv_min(fam, mus, 0, cfg);
  EXPECT_TRUE(g.glued);
  EXPECT_EQ(g.degree, 3);
  EXPECT_EQ(g.rank, 2);
  ASSERT_EQ(g.form.pieces.size(), 2u);
  EXPECT_TRUE(g.form.pieces[1].form.is_zero());
  const DiffForm& mu0 = mus.at("sheets");
  EXPECT_TRUE(structurally_equal(g.form.pieces[0].form, gv_form(mu0, 1)));
  EXPECT_TRUE(forms_equal(g.form.pieces[0].form, flatexp(x - 1) * wedge(wedge(dx, dy), dz), fam.members[0].region, cfg).proved());
  EXPECT_EQ(check_well_defined(g.form, cfg).overall(), Status::Pass);
}

TEST(GVMin, CorruptedGaugeRefusesToGlue) {
  ZeroTestConfig cfg;
  FoliationFamily fam = flat_gauge_family();
  MuChoice mus = flat_gauge_mus(true);
  CheckReport v = check_minimal_vanishing(fam, mus, cfg);
  EXPECT_EQ(v.overall(), Status::Fail);
  EXPECT_FALSE(v.notes.empty());
  try {
    gv_min(fam, mus, 0, cfg);
    FAIL() << "corrupted gauge glued";
  } catch (const GluingError& e) {
    ASSERT_TRUE(e.witness());
    EXPECT_GT(e.witness()->at("x"), 0.0);
    EXPECT_LT(e.witness()->at("x"), 1.0);
  }
}

TEST(Basic, Examples) {
  ZeroTestConfig cfg;
  Foliation F = make_foliation("F", box(), 2, {dy - y * dx}, std::nullopt, {"y"});
  EXPECT_TRUE(check_basic(y * exp(-x), F, F.region, cfg).proved());
  FormZeroResult nb = check_basic(z, F, F.region, cfg);
  EXPECT_TRUE(nb.nonzero());
  EXPECT_TRUE(nb.witness.has_value());
}

TEST(Basic, WeightedForm) {
  ZeroTestConfig cfg;
  Foliation F = make_foliation("F", box(), 2, {dy - y * dx}, std::nullopt, {"y"});
  Expr phi = y * exp(-x);
  WeightedGV w = gv_weighted(phi, gauge_mu, 1, F, cfg);
  EXPECT_TRUE(w.identity.proved());
  EXPECT_TRUE(w.closed.proved());
  EXPECT_TRUE(w.dphi_wedge.proved());
  EXPECT_TRUE(forms_equal(w.nu_bar, y * y * exp(Expr(-2) * x) * wedge(wedge(dx, dy), dz), box(), cfg).proved());
  EXPECT_THROW(gv_weighted(z, gauge_mu, 1, F, cfg), PreconditionError);
}

// Functions of the leaf invariant y e^{-x} are basic.
TEST(Basic, FunctionsOfTheInvariant) {
  testkit::Gen g({"s"}, 24);
  ZeroTestConfig cfg;
  Foliation F = make_foliation("F", box(), 2, {dy - y * dx}, std::nullopt, {"y"});
  for (int i = 0; i < 20; ++i) {
    Expr f = substitute(g.polynomial(3, 3), {{"s", y * exp(-x)}});
    EXPECT_TRUE(check_basic(f, F, F.region, cfg).proved()) << to_string(f);
  }
}

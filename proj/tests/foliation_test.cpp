#include <gtest/gtest.h>

#include "folgv/foliation.hpp"
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
  Region r = box();
  r.name = name;
  r.constraints.push_back(g);
  return r;
}

FoliationFamily nested() {
  FoliationFamily fam;
  fam.name = "nested";
  fam.chart = xyz;
  fam.box = box().box;
  fam.members.push_back(make_foliation("lines", half(1 - x, "U"), 1, {exp(z) * dx, dy}, std::nullopt, {"x", "y"}));
  fam.members.push_back(make_foliation("planes", half(x + 1, "V"), 2, {exp(z) * dy}, std::nullopt, {"y"}));
  return fam;
}

}  // namespace

TEST(Foliation, ConstructionValidatesCharts) {
  EXPECT_THROW(make_foliation("bad", box(), 4, {}), std::invalid_argument);
  DiffForm other = DiffForm::basis({"u", "v"}, "u");
  EXPECT_THROW(make_foliation("bad", box(), 2, {other}), ChartError);
  EXPECT_THROW(make_foliation("bad", box(), 2, {dy}, std::nullopt, {"w"}), ChartError);
  Foliation F = make_foliation("F", box(), 2, {dy - y * dx});
  EXPECT_EQ(F.codim(), 1);
  EXPECT_TRUE(structurally_equal(F.nu, dy - y * dx));
}

TEST(Foliation, ValidatesIntegrableForm) {
  Foliation F = make_foliation("F", box(), 2, {dy - y * dx});
  CheckReport r = validate_foliation(F, ZeroTestConfig{});
  EXPECT_EQ(r.overall(), Status::Pass);
  ASSERT_NE(r.find("integrability"), nullptr);
}

TEST(Foliation, ContactFormIsNotIntegrable) {
  Foliation F = make_foliation("contact", box(), 2, {dz + x * dy});
  CheckReport r = validate_foliation(F, ZeroTestConfig{});
  const Finding* f = r.find("integrability");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->status, Status::Fail);
  EXPECT_EQ(f->witness_form, "dx^dy^dz");
  EXPECT_TRUE(f->witness.has_value());
}

TEST(Foliation, DecompositionMismatchIsReported) {
  Foliation F = make_foliation("F", box(), 1, {dx, dy}, Expr(2) * wedge(dx, dy));
  CheckReport r = validate_foliation(F, ZeroTestConfig{});
  EXPECT_EQ(r.find("decomposition-product")->status, Status::Fail);
  Foliation G = make_foliation("G", box(), 1, {dx}, std::nullopt);
  EXPECT_EQ(validate_foliation(G, ZeroTestConfig{}).find("degree")->status, Status::Fail);
}

TEST(Foliation, DegenerateGeneratorsFailIndependence) {
  Foliation F = make_foliation("F", box(), 1, {dx, x * dx});
  EXPECT_EQ(validate_foliation(F, ZeroTestConfig{}).find("independence")->status, Status::Fail);
}

TEST(Family, NestedFixturePasses) {
  FoliationFamily fam = nested();
  CheckReport r = check_family(fam, ZeroTestConfig{});
  EXPECT_EQ(r.overall(), Status::Pass);
  EXPECT_NE(r.find("nesting[lines<planes]"), nullptr);
  EXPECT_EQ(fam.ranks(), (std::vector<int>{1, 2}));
}

TEST(Family, ReversedNestingFails) {
  FoliationFamily fam = nested();
  // planes y = const do not contain the lines x = const, z = const
  fam.members[1] = make_foliation("planes", half(x + 1, "V"), 2, {dz}, std::nullopt, {"z"});
  CheckReport r = check_family(fam, ZeroTestConfig{});
  EXPECT_EQ(r.find("nesting[lines<planes]")->status, Status::Fail);
}

TEST(Family, EqualRanksFail) {
  FoliationFamily fam = nested();
  fam.members[1] = make_foliation("more-lines", half(x + 1, "V"), 1, {dx, dz});
  EXPECT_EQ(check_family(fam, ZeroTestConfig{}).find("distinct-ranks")->status, Status::Fail);
}

TEST(Family, RankAndStrata) {
  FoliationFamily fam = nested();
  EXPECT_EQ(rank_at(fam, {{"x", -1.5}, {"y", 0}, {"z", 0}}), 1);
  EXPECT_EQ(rank_at(fam, {{"x", 0}, {"y", 0}, {"z", 0}}), 2);
  EXPECT_EQ(rank_at(fam, {{"x", 1.5}, {"y", 0}, {"z", 0}}), 2);
  Stratum s = stratum(fam, 2, StratumMode::Ge);
  EXPECT_EQ(s.union_of.size(), 1u);
  EXPECT_TRUE(s.contains({{"x", 0}, {"y", 0}, {"z", 0}}));
  EXPECT_TRUE(stratum(fam, 1, StratumMode::Eq).contains({{"x", -1.5}, {"y", 0}, {"z", 0}}));
  EXPECT_THROW(stratum(fam, 3, StratumMode::Eq), DomainError);
  FoliationFamily gap = fam;
  gap.members[0].region.constraints.push_back(-x - 1);  // x < -1
  gap.members[1].region.constraints.push_back(x - 1);   // x > 1
  EXPECT_THROW(rank_at(gap, {{"x", 0}, {"y", 0}, {"z", 0}}), CoverageError);
}

// Strata are cut out by strict inequalities, so they are open.
TEST(Family, StrataAreOpenAndMatchDeclaredRanks) {
  FoliationFamily fam = nested();
  for (int r : fam.ranks())
    for (StratumMode mode : {StratumMode::Ge, StratumMode::Eq})
      for (const auto& reg : stratum(fam, r, mode).union_of)
        for (const auto& g : reg.constraints) EXPECT_FALSE(g.is_zero());
  ZeroTestConfig cfg;
  Region only_lines = fam.members[0].region;
  only_lines.constraints.push_back(-(x + 1));  // outside the planes' chart
  for (const auto& p : sample_region(only_lines, cfg, 32, 1)) EXPECT_EQ(rank_at(fam, p), 1);
  for (const auto& p : sample_region(fam.members[1].region, cfg, 32, 2)) EXPECT_EQ(rank_at(fam, p), 2);
}

TEST(Family, NestingImpliesThetaExists) {
  FoliationFamily fam = nested();
  ZeroTestConfig cfg;
  ASSERT_EQ(check_family(fam, cfg).overall(), Status::Pass);
  Region ov = intersect(fam.members[0].region, fam.members[1].region);
  EXPECT_TRUE(solve_theta(fam.members[0], fam.members[1], ov, cfg).check.proved());
}

TEST(Invariance, TranslationsPreservePlanes) {
  Foliation F = make_foliation("planes", whole_box(xyz, {{-1e3, 1e3}, {-1e3, 1e3}, {-1e3, 1e3}}), 2, {dy});
  CoordinateMap shift{xyz, xyz, {x + 1, y, z - 3}};
  EXPECT_TRUE(check_invariance(shift, F, ZeroTestConfig{}).proved());
  CoordinateMap swap{xyz, xyz, {y, x, z}};
  EXPECT_TRUE(check_invariance(swap, F, ZeroTestConfig{}).nonzero());
  Foliation small = make_foliation("planes", box(), 2, {dy});
  CoordinateMap far{xyz, xyz, {x + 100, y, z}};
  EXPECT_THROW(check_invariance(far, small, ZeroTestConfig{}), PreconditionError);
}

TEST(Piecewise, AgreementOnOverlaps) {
  PiecewiseForm pw;
  pw.degree = 1;
  pw.pieces.push_back(Piece{half(1 - x, "U"), x * dy});
  pw.pieces.push_back(Piece{half(x + 1, "V"), x * dy});
  EXPECT_EQ(check_well_defined(pw, ZeroTestConfig{}).overall(), Status::Pass);
  pw.pieces[1].form = y * dy;
  EXPECT_EQ(check_well_defined(pw, ZeroTestConfig{}).overall(), Status::Fail);
  ASSERT_TRUE(pw.at({{"x", 1.5}, {"y", 0}, {"z", 0}}));
  EXPECT_FALSE(pw.at({{"x", 5}, {"y", 0}, {"z", 0}}));
}

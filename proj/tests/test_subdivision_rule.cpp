#include <gtest/gtest.h>

#include "cellseq/cellseq.hpp"
#include "oracles.hpp"

using namespace cellseq;

namespace {

// Position of a refined vertex in units of half the base spacing.
std::pair<long, long> half_units(const Example& ex, CellId v) {
  const Box& b = ex.realization.refined_boxes[v.value];
  return {std::lround(2 * b.lo[0]), std::lround(2 * b.lo[1])};
}

}  // namespace

TEST(SubdivisionRule, BuiltinsValidate) {
  for (const auto& name : builtin_example_names()) {
    auto ex = builtin_example(name);
    auto rep = validate_rule(*ex.rule);
    EXPECT_TRUE(rep.ok()) << name << ": " << (rep.ok() ? "" : rep.violations.front().message);
  }
}

TEST(SubdivisionRule, Degrees) {
  EXPECT_EQ(degree(*torus_doubling(2).rule), 4u);
  EXPECT_EQ(degree(*torus_doubling(3).rule), 8u);
  EXPECT_EQ(degree(*pillowcase().rule), 4u);
  EXPECT_EQ(degree(*identity_subdivision(2).rule), 1u);
  EXPECT_EQ(torus_doubling(2).rule->refined.chambers().size(), 16u);
  EXPECT_EQ(torus_doubling(3).rule->refined.chambers().size(), 64u);
}

TEST(SubdivisionRule, PillowRefinedEuler) {
  auto ex = pillowcase();
  const auto& d1 = ex.rule->refined;
  EXPECT_EQ(d1.cells_of_dim(0).size(), 10u);
  EXPECT_EQ(d1.cells_of_dim(1).size(), 16u);
  EXPECT_EQ(d1.cells_of_dim(2).size(), 8u);
  EXPECT_EQ(d1.euler_characteristic(), 2);
}

TEST(SubdivisionRule, TorusMultiplicityIsOne) {
  for (int n : {2, 3}) {
    auto ex = torus_doubling(n);
    for (std::size_t i = 0; i < ex.rule->refined.size(); ++i)
      EXPECT_EQ(local_multiplicity(*ex.rule, CellId(i)), 1u);
    EXPECT_TRUE(branch_complex(*ex.rule).empty());
    EXPECT_TRUE(multiplicity_table(*ex.rule).inequality_holds);
  }
}

TEST(SubdivisionRule, PillowMultiplicityMatchesConeAngleOracle) {
  auto ex = pillowcase();
  const auto& d1 = ex.rule->refined;
  std::size_t doubled = 0;
  for (CellId v : d1.vertices()) {
    auto [hx, hy] = half_units(ex, v);
    const unsigned expected = oracle::pillow_multiplicity(hx, hy);
    EXPECT_EQ(local_multiplicity(*ex.rule, v), expected) << d1.name(v);
    if (expected == 2) ++doubled;
  }
  EXPECT_EQ(doubled, 6u);
  // Edges and chambers are never branched.
  for (std::size_t i = 0; i < d1.size(); ++i)
    if (d1.dim(CellId(i)) > 0) EXPECT_EQ(local_multiplicity(*ex.rule, CellId(i)), 1u);
  auto tab = multiplicity_table(*ex.rule);
  EXPECT_TRUE(tab.inequality_holds);
  for (const auto& r : tab.vertices) {
    EXPECT_LE(r.multiplicity, r.refined_count);
    EXPECT_LE(r.refined_count, r.base_count * r.multiplicity);
  }
}

TEST(SubdivisionRule, VertexChamberCounts) {
  auto t = torus_doubling(2);
  for (CellId v : t.rule->base.vertices()) EXPECT_EQ(vertex_chamber_count(t.rule->base, v), 4u);
  auto p = pillowcase();
  for (CellId v : p.rule->base.vertices()) EXPECT_EQ(vertex_chamber_count(p.rule->base, v), 2u);
  EXPECT_THROW(vertex_chamber_count(p.rule->base, p.rule->base.chambers().front()), UnknownCell);
}

TEST(SubdivisionRule, BranchComplexAndCpcfData) {
  auto p = pillowcase();
  auto br = branch_complex(*p.rule);
  EXPECT_EQ(br.size(), 6u);
  auto r = cpcf_data(*p.rule);
  EXPECT_TRUE(r.branch_face_closed);
  EXPECT_TRUE(r.forward_invariant);
  EXPECT_TRUE(r.restriction_cellular);
  // The postcritical set is the four corners.
  EXPECT_EQ(r.postcritical.size(), 4u);
  for (CellId c : r.postcritical) EXPECT_EQ(p.rule->base.dim(c), 0);
  for (auto m : r.branch_multiplicities) EXPECT_EQ(m, 2u);

  auto t = torus_doubling(2);
  auto rt = cpcf_data(*t.rule);
  EXPECT_TRUE(rt.branch.empty());
  EXPECT_TRUE(rt.postcritical.empty());
}

TEST(SubdivisionRule, ForwardImageCoversBaseCells) {
  auto ex = torus_doubling(2);
  const auto& rule = *ex.rule;
  for (CellId c : rule.base.chambers()) {
    auto img = forward_image(rule, c);
    // f maps the four quarter squares of a unit square onto all of the torus.
    EXPECT_EQ(img.size(), rule.base.size());
  }
}

TEST(SubdivisionRule, MutationsNameTheCell) {
  auto ex = torus_doubling(2);
  const auto& d1 = ex.rule->refined;
  const auto& d0 = ex.rule->base;

  {
    auto r = *ex.rule;
    CellId e = d1.cells_of_dim(1).front();
    r.image[e.value] = d0.chambers().front();
    auto rep = validate_rule(r);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(rep.names(d1.name(e)));
  }
  {
    auto r = *ex.rule;
    CellId x = d1.chambers().front();
    CellId wrong = r.parent[x.value] == d0.chambers()[0] ? d0.chambers()[1] : d0.chambers()[0];
    r.parent[x.value] = wrong;
    auto rep = validate_rule(r);
    EXPECT_FALSE(rep.ok());
    EXPECT_TRUE(rep.names(d1.name(x)));
  }
}

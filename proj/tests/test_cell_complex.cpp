#include <random>

#include <gtest/gtest.h>

#include "cellseq/cellseq.hpp"

using namespace cellseq;

namespace {

CellId id(const CellComplex& k, const std::string& name) { return *k.find(name); }

std::vector<CellComplex::CellSpec> torus_specs() {
  // (R/2Z)^2 with unit squares; names by lower-left corner.
  return {
      {"v00", 0, {}}, {"v01", 0, {}}, {"v10", 0, {}}, {"v11", 0, {}},
      {"h00", 1, {"v00", "v10"}}, {"h10", 1, {"v10", "v00"}}, {"h01", 1, {"v01", "v11"}}, {"h11", 1, {"v11", "v01"}},
      {"u00", 1, {"v00", "v01"}}, {"u01", 1, {"v01", "v00"}}, {"u10", 1, {"v10", "v11"}}, {"u11", 1, {"v11", "v10"}},
      {"s00", 2, {"h00", "h01", "u00", "u10"}},
      {"s10", 2, {"h10", "h11", "u10", "u00"}},
      {"s01", 2, {"h01", "h00", "u01", "u11"}},
      {"s11", 2, {"h11", "h10", "u11", "u01"}},
  };
}

}  // namespace

TEST(CellComplex, CubicalTorusCountsAndValidation) {
  auto k = CellComplex::from_specs(2, torus_specs());
  EXPECT_EQ(k.cells_of_dim(0).size(), 4u);
  EXPECT_EQ(k.cells_of_dim(1).size(), 8u);
  EXPECT_EQ(k.cells_of_dim(2).size(), 4u);
  EXPECT_EQ(k.euler_characteristic(), 0);
  EXPECT_TRUE(validate_complex(k, {.chamber_coverage = true, .pseudo_manifold = true}).ok());
}

TEST(CellComplex, DeletedFacetNamesTheSquare) {
  auto specs = torus_specs();
  auto& s = specs[12];
  s.faces.erase(std::find(s.faces.begin(), s.faces.end(), "u10"));
  auto k = CellComplex::from_specs(2, specs);
  auto rep = validate_complex(k);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.names("s00"));
}

TEST(CellComplex, FacesAreTransitivelyClosed) {
  auto k = CellComplex::from_specs(2, torus_specs());
  auto f = k.faces(id(k, "s00"));
  EXPECT_EQ(f.size(), 8u);  // 4 edges + 4 vertices
  EXPECT_TRUE(k.contains(id(k, "s00"), id(k, "v11")));
  EXPECT_EQ(k.immediate_faces(id(k, "s00")).size(), 4u);
}

TEST(CellComplex, RejectsCyclesAndDimensionViolations) {
  EXPECT_THROW(CellComplex::from_specs(1, {{"a", 1, {"b"}}, {"b", 1, {"a"}}}), ComplexError);
  EXPECT_THROW(CellComplex::from_specs(1, {{"a", 0, {"b"}}, {"b", 1, {}}}), ComplexError);
  EXPECT_THROW(CellComplex::from_specs(1, {{"a", 0, {}}, {"a", 0, {}}}), ComplexError);
  EXPECT_THROW(CellComplex::from_specs(1, {{"a", 1, {"zz"}}}), ComplexError);
}

TEST(CellComplex, MissingFaceDimensionIsReported) {
  // A square with edges but no vertices.
  auto k = CellComplex::from_specs(2, {{"e0", 1, {}}, {"e1", 1, {}}, {"e2", 1, {}}, {"e3", 1, {}},
                                       {"s", 2, {"e0", "e1", "e2", "e3"}}});
  auto rep = validate_complex(k);
  EXPECT_FALSE(rep.ok());
  EXPECT_TRUE(rep.names("s"));
}

TEST(CellComplex, StarAndClosure) {
  auto k = CellComplex::from_specs(2, torus_specs());
  EXPECT_EQ(k.star(id(k, "v00")).size(), 9u);
  auto st = k.star(id(k, "s11"));
  ASSERT_EQ(st.size(), 1u);
  EXPECT_EQ(st.cells()[0], id(k, "s11"));
  EXPECT_EQ(k.closure(id(k, "s00")).size(), 9u);
  EXPECT_THROW(k.star(CellId(999)), UnknownCell);
}

TEST(CellComplex, CommonFacesOnTheTwoByTwoTorus) {
  auto k = CellComplex::from_specs(2, torus_specs());
  // [0,1]^2 and [1,2]^2 meet in all four vertices.
  auto cf = common_faces(k, id(k, "s00"), id(k, "s11"));
  EXPECT_TRUE(cf.intersects);
  EXPECT_EQ(cf.faces.size(), 4u);
  for (CellId c : cf.faces) EXPECT_EQ(k.dim(c), 0);
  auto same = common_faces(k, id(k, "s00"), id(k, "s00"));
  ASSERT_EQ(same.faces.size(), 1u);
  EXPECT_EQ(same.faces.cells()[0], id(k, "s00"));
}

TEST(CellComplex, CommonFacesSingleEdgeAtLevelOne) {
  auto ex = torus_doubling(2);
  const auto& d1 = ex.rule->refined;
  // Two horizontally adjacent half-squares of the 4x4 grid share one edge.
  const auto& boxes = ex.realization.refined_boxes;
  std::optional<CellId> a, b;
  for (CellId c : d1.chambers()) {
    if (boxes[c.value].lo[0] == 0.0 && boxes[c.value].lo[1] == 0.0) a = c;
    if (boxes[c.value].lo[0] == 0.5 && boxes[c.value].lo[1] == 0.0) b = c;
  }
  ASSERT_TRUE(a && b);
  auto cf = common_faces(d1, *a, *b);
  ASSERT_EQ(cf.faces.size(), 1u);
  EXPECT_EQ(d1.dim(cf.faces.cells()[0]), 1);
}

TEST(CellComplex, JoinsOppositeSides) {
  auto k = CellComplex::from_specs(2, torus_specs());
  std::vector<CellId> chamber{id(k, "s00")};
  EXPECT_TRUE(joins_opposite_sides(k, chamber));
  std::vector<CellId> vertex{id(k, "v00")};
  EXPECT_FALSE(joins_opposite_sides(k, vertex));
  EXPECT_FALSE(joins_opposite_sides(k, std::span<const CellId>{}));
}

TEST(CellComplex, AdjacencyGraphs) {
  auto k = CellComplex::from_specs(2, torus_specs());
  auto g = adjacency_graph(k, GraphKind::Chambers);
  EXPECT_EQ(g.nodes.size(), 4u);
  EXPECT_EQ(g.edges.size(), 6u);  // K4
  auto pillow = pillowcase();
  auto gp = adjacency_graph(pillow.rule->base, GraphKind::Chambers);
  EXPECT_EQ(gp.nodes.size(), 2u);
  EXPECT_EQ(gp.edges.size(), 1u);
  auto sq = restriction(k, k.closure(id(k, "s00")).cells());
  auto g1 = adjacency_graph(sq, GraphKind::Chambers);
  EXPECT_EQ(g1.nodes.size(), 1u);
  EXPECT_TRUE(g1.edges.empty());
  auto dot = to_dot(k, g);
  EXPECT_NE(dot.find("\"s00\" -- \"s11\""), std::string::npos);
}

TEST(CellComplex, Restriction) {
  auto k = CellComplex::from_specs(2, torus_specs());
  auto sq = restriction(k, k.closure(id(k, "s00")).cells());
  EXPECT_EQ(sq.size(), 9u);
  EXPECT_EQ(sq.dim_top(), 2);
  // A closed cell has boundary, so only the cell axioms apply.
  EXPECT_TRUE(validate_complex(sq, {.chamber_coverage = true, .pseudo_manifold = false}).ok());
  std::vector<CellId> v{id(k, "v00")};
  auto pt = restriction(k, v);
  EXPECT_EQ(pt.size(), 1u);
  EXPECT_EQ(pt.dim_top(), 0);
  std::vector<CellId> open{id(k, "s00"), id(k, "h00")};
  EXPECT_THROW(restriction(k, open), NotFaceClosed);
}

TEST(CellComplex, PillowBaseComplex) {
  auto ex = pillowcase();
  const auto& k = ex.rule->base;
  EXPECT_EQ(k.cells_of_dim(0).size(), 4u);
  EXPECT_EQ(k.cells_of_dim(1).size(), 4u);
  EXPECT_EQ(k.cells_of_dim(2).size(), 2u);
  EXPECT_EQ(k.euler_characteristic(), 2);
  EXPECT_TRUE(validate_complex(k, {.chamber_coverage = true, .pseudo_manifold = true}).ok());
}

// Per-cell invariants over several complexes.
class ComplexInvariants : public ::testing::TestWithParam<std::pair<std::string, unsigned>> {};

TEST_P(ComplexInvariants, HoldForEveryCell) {
  auto [name, level] = GetParam();
  auto ex = builtin_example(name);
  CellTower t(ex.rule);
  const auto& k = t.complex(level);
  for (std::size_t i = 0; i < k.size(); ++i) {
    CellId c(i);
    auto st = k.star(c), cl = k.closure(c);
    std::vector<CellId> both;
    std::set_intersection(st.begin(), st.end(), cl.begin(), cl.end(), std::back_inserter(both));
    ASSERT_EQ(both, std::vector<CellId>{c});
    EXPECT_TRUE(intersects(k, c, c));
    ASSERT_TRUE(validate_complex(restriction(k, cl.cells()), {.chamber_coverage = true, .pseudo_manifold = false}).ok()) << k.name(c);
  }
  std::mt19937 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, k.size() - 1);
  for (int trial = 0; trial < 300; ++trial) {
    CellId a(pick(rng)), b(pick(rng));
    auto ab = common_faces(k, a, b), ba = common_faces(k, b, a);
    EXPECT_EQ(ab.faces, ba.faces);
    EXPECT_EQ(ab.intersects, ba.intersects);
    EXPECT_EQ(ab.intersects, intersects(k, a, b));
  }
}

INSTANTIATE_TEST_SUITE_P(Examples, ComplexInvariants,
                         ::testing::Values(std::pair<std::string, unsigned>{"torus2", 0},
                                           std::pair<std::string, unsigned>{"torus2", 2},
                                           std::pair<std::string, unsigned>{"pillow", 0},
                                           std::pair<std::string, unsigned>{"pillow", 2},
                                           std::pair<std::string, unsigned>{"torus3", 1}));

TEST(CellComplex, JoiningMatchesFlowerCriterion) {
  // A joins opposite sides iff no single cell lies in the closure of every
  // cell meeting A.
  auto ex = torus_doubling(2);
  CellTower t(ex.rule);
  const auto& k = t.complex(1);
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> pick(0, k.size() - 1);
  std::uniform_int_distribution<int> size(1, 4);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<CellId> a;
    for (int i = size(rng); i > 0; --i) a.push_back(CellId(pick(rng)));
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    std::vector<CellId> met;
    for (std::size_t c = 0; c < k.size(); ++c)
      for (CellId x : a)
        if (intersects(k, CellId(c), x)) {
          met.push_back(CellId(c));
          break;
        }
    bool some_cell_in_all = false;
    for (std::size_t c = 0; c < k.size() && !some_cell_in_all; ++c) {
      bool all = true;
      for (CellId m : met)
        if (!(m == CellId(c) || k.contains(m, CellId(c)))) {
          all = false;
          break;
        }
      some_cell_in_all = all;
    }
    EXPECT_EQ(joins_opposite_sides(k, a), !some_cell_in_all);
  }
}

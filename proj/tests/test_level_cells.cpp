#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "cellseq/cellseq.hpp"
#include "oracles.hpp"

using namespace cellseq;

namespace {

// Grid coordinates of a realized level-m cell, spacing 2^-m.
oracle::GridCell grid_cell(const Geometry& g, const oracle::GridModel& model, LevelCell c) {
  const Box& b = g.box(c);
  const double h = std::ldexp(1.0, -static_cast<int>(c.level));
  oracle::GridCell out;
  for (int i = 0; i < model.dim; ++i) {
    out.lo[i] = std::lround(b.lo[i] / h);
    out.ext[i] = b.hi[i] - b.lo[i] > 0.5 * h ? 1 : 0;
  }
  return model.canonical(out);
}

struct Iso {
  std::vector<oracle::GridCell> cell;  // by level-m index
  bool bijective = false;
};

Iso match_grid(const Geometry& g, const oracle::GridModel& model, unsigned m) {
  const auto& k = g.tower().complex(m);
  Iso iso;
  std::map<oracle::GridCell, std::size_t> seen;
  for (std::size_t i = 0; i < k.size(); ++i) {
    iso.cell.push_back(grid_cell(g, model, {m, static_cast<std::uint32_t>(i)}));
    seen[iso.cell.back()]++;
  }
  auto all = model.cells();
  iso.bijective = seen.size() == k.size() && all.size() == k.size();
  for (const auto& c : all) iso.bijective = iso.bijective && seen.count(c) == 1;
  return iso;
}

}  // namespace

TEST(LevelCells, CountsMatchClosedForms) {
  CellTower t2(torus_doubling(2).rule), t3(torus_doubling(3).rule), p(pillowcase().rule);
  for (unsigned m = 0; m <= 5; ++m) {
    const std::uint64_t n = 2ull << m;  // grid period in cells
    EXPECT_EQ(t2.count_chambers(m), n * n);
    EXPECT_EQ(t2.count_cells(m), 4 * n * n);
    EXPECT_EQ(p.count_chambers(m), n * n / 2);
    EXPECT_EQ(p.count_cells(m), 2 * n * n + 2);
  }
  for (unsigned m = 0; m <= 3; ++m) {
    const std::uint64_t n = 2ull << m;
    EXPECT_EQ(t3.count_chambers(m), n * n * n);
    EXPECT_EQ(t3.count_cells(m), 8 * n * n * n);
  }
}

TEST(LevelCells, LazyMaterialization) {
  CellTower t(torus_doubling(2).rule);
  EXPECT_EQ(t.materialized(), 0u);
  t.count_chambers(3);
  EXPECT_LE(t.materialized(), 2u);
  t.complex(3);
  EXPECT_EQ(t.materialized(), 3u);
}

TEST(LevelCells, TowerRefusesHugeLevels) {
  CellTower t(torus_doubling(2).rule, TowerOptions{.max_cells = 1000});
  EXPECT_NO_THROW(t.complex(2));
  EXPECT_THROW(t.complex(4), ResourceCapExceeded);
}

TEST(LevelCells, PairEncodingRoundTrips) {
  CellTower t(pillowcase().rule);
  const unsigned m = 3;
  const auto& k = t.complex(m);
  for (std::size_t i = 0; i < k.size(); ++i) {
    LevelCell c{m, static_cast<std::uint32_t>(i)};
    auto p = t.minimal_parent(c), q = t.image(c);
    EXPECT_EQ(p.level, m - 1);
    EXPECT_EQ(q.level, m - 1);
    auto back = t.pair(p, q);
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, c);
    EXPECT_EQ(t.ancestor(c, 0), t.minimal_parent(t.minimal_parent(t.minimal_parent(c))));
    EXPECT_EQ(t.dim(c), t.dim(q));
  }
}

class GridIsomorphism : public ::testing::TestWithParam<std::pair<std::string, unsigned>> {};

TEST_P(GridIsomorphism, FaceAndIntersectionRelations) {
  auto [name, m] = GetParam();
  auto ex = builtin_example(name);
  const bool reflect = name == "pillow";
  oracle::GridModel model{2, 2L << m, reflect};
  CellTower t(ex.rule);
  Geometry g(t, ex.realization);
  auto iso = match_grid(g, model, m);
  ASSERT_TRUE(iso.bijective);
  const auto& k = t.complex(m);
  for (std::size_t a = 0; a < k.size(); ++a) {
    EXPECT_EQ(k.dim(CellId(a)), model.cell_dim(iso.cell[a]));
    for (std::size_t b = 0; b < k.size(); ++b) {
      ASSERT_EQ(k.contains(CellId(b), CellId(a)), a == b || model.is_proper_face(iso.cell[a], iso.cell[b]))
          << k.name(CellId(a)) << " in " << k.name(CellId(b));
      ASSERT_EQ(intersects(k, CellId(a), CellId(b)), model.meets(iso.cell[a], iso.cell[b]));
    }
  }
  // The pair formula agrees with the materialized complex.
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(k.size() - 1));
  for (int trial = 0; trial < 2000; ++trial) {
    LevelCell a{m, pick(rng)}, b{m, pick(rng)};
    EXPECT_EQ(intersects_at_level(t, a, b).intersects, intersects(k, a.id(), b.id()));
  }
}

INSTANTIATE_TEST_SUITE_P(Examples, GridIsomorphism,
                         ::testing::Values(std::pair<std::string, unsigned>{"torus2", 0},
                                           std::pair<std::string, unsigned>{"torus2", 1},
                                           std::pair<std::string, unsigned>{"torus2", 2},
                                           std::pair<std::string, unsigned>{"torus2", 3},
                                           std::pair<std::string, unsigned>{"pillow", 0},
                                           std::pair<std::string, unsigned>{"pillow", 1},
                                           std::pair<std::string, unsigned>{"pillow", 2},
                                           std::pair<std::string, unsigned>{"pillow", 3}));

TEST(LevelCells, FlowerInvariance) {
  for (const char* name : {"torus2", "pillow", "torus3"}) {
    CellTower t(builtin_example(name).rule);
    const unsigned top = std::string(name) == "torus3" ? 3 : 4;
    for (unsigned m = 1; m <= top; ++m) {
      auto r = check_flower_invariance(t, m);
      EXPECT_TRUE(r.ok()) << name << " level " << m;
      EXPECT_EQ(r.vertices_checked, t.complex(m).vertices().size());
    }
  }
  CellTower t(torus_doubling(2).rule);
  EXPECT_THROW(check_flower_invariance(t, 0), LevelError);
}

TEST(LevelCells, JoiningNumberMatchesBruteForce) {
  CellTower t(torus_doubling(2).rule);
  auto base = oracle::torus_level(2, 0);
  for (unsigned m = 0; m <= 2; ++m) {
    auto r = joining_number(t, m);
    ASSERT_TRUE(r.value);
    EXPECT_EQ(*r.value, oracle::brute_joining_number(oracle::torus_level(2, m), base, 6)) << m;
    EXPECT_EQ(r.witness.size(), *r.value);
    EXPECT_TRUE(joins_opposite_sides_of_base(t, r.witness));
  }
  EXPECT_EQ(*joining_number(t, 3).value, 8u);
}

TEST(LevelCells, JoiningNumberCap) {
  CellTower t(torus_doubling(2).rule);
  auto r = joining_number(t, 3, 4);
  EXPECT_FALSE(r.value);
  EXPECT_TRUE(r.exceeded_cap);
}

TEST(LevelCells, SeparationMatchesBruteForce) {
  for (const char* name : {"torus2", "pillow"}) {
    auto ex = builtin_example(name);
    const bool reflect = std::string(name) == "pillow";
    CellTower t(ex.rule);
    Geometry g(t, ex.realization);
    const unsigned depth = 4;
    auto pts = vertex_addresses(t, 3, depth);
    oracle::GridModel fine{2, 2L << depth, reflect};
    auto coords = [&](const PointAddress& p) {
      oracle::GridCell c;
      const Box& b = g.box(p.carrier);
      for (int i = 0; i < 2; ++i) c.lo[i] = fine.mod(std::lround(std::ldexp(b.lo[i], depth)));
      return c;
    };
    SeparationTable table(t, pts);
    std::mt19937 rng(5);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    for (int trial = 0; trial < 60; ++trial) {
      auto i = pick(rng), j = pick(rng);
      auto s = separation_level(t, pts[i], pts[j]);
      const unsigned want = oracle::brute_separation(2, reflect, depth, coords(pts[i]), coords(pts[j]));
      EXPECT_EQ(s.value, want) << name;
      EXPECT_EQ(s.truncated, want == depth);
      auto st = table.level(i, j);
      EXPECT_EQ(st.value, s.value);
      EXPECT_EQ(st.truncated, s.truncated);
    }
  }
}

TEST(LevelCells, SeparationOfEqualPointsIsTruncated) {
  CellTower t(torus_doubling(2).rule);
  auto pts = vertex_addresses(t, 2, 3);
  auto s = separation_level(t, pts[0], pts[0]);
  EXPECT_TRUE(s.truncated);
  EXPECT_EQ(s.value, 3u);
}

TEST(LevelCells, FfiSupremum) {
  CellTower t2(torus_doubling(2).rule), t3(torus_doubling(3).rule), p(pillowcase().rule);
  auto r2 = ffi_report(t2, 5);
  ASSERT_EQ(r2.sup_chambers_at_vertex.size(), 6u);
  for (auto v : r2.sup_chambers_at_vertex) EXPECT_EQ(v, 4u);
  auto r3 = ffi_report(t3, 4);
  for (auto v : r3.sup_chambers_at_vertex) EXPECT_EQ(v, 8u);
  auto rp = ffi_report(p, 5);
  EXPECT_LE(rp.max, 4u);
  EXPECT_EQ(rp.sup_chambers_at_vertex.front(), 2u);
}

TEST(LevelCells, Reachability) {
  CellTower t(torus_doubling(2).rule);
  auto r = image_reachability(t, 2);
  EXPECT_TRUE(r.onto);
  ASSERT_TRUE(r.proxy_k);
  EXPECT_EQ(*r.proxy_k, 1u);
  EXPECT_TRUE(r.stuck.empty());

  CellTower id(identity_subdivision(2).rule);
  auto ri = image_reachability(id, 2);
  EXPECT_TRUE(ri.onto);
  EXPECT_FALSE(ri.proxy_k);
  EXPECT_EQ(ri.stuck.size(), 4u);
}

TEST(LevelCells, NeighborhoodsAreForwardInvariant) {
  CellTower t(pillowcase().rule);
  const unsigned m = 3;
  std::mt19937 rng(9);
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(t.complex(m).size() - 1));
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<LevelCell> g{{m, pick(rng)}, {m, pick(rng)}};
    auto n = neighborhoods_u1_u2(t, m, g);
    EXPECT_LE(n.u1.size(), n.u2.size());
    for (unsigned k = 0; k <= m; ++k) EXPECT_TRUE(check_neighborhood_forward_invariance(t, g, k));
  }
}

TEST(LevelCells, VertexLift) {
  CellTower t(torus_doubling(2).rule);
  for (CellId v : t.complex(1).vertices()) {
    auto l = lift_vertex(t, {1, v.value}, 4);
    EXPECT_EQ(l.level, 4u);
    EXPECT_EQ(t.dim(l), 0);
    EXPECT_EQ(t.ancestor(l, 1), (LevelCell{1, v.value}));
  }
  EXPECT_THROW(lift_vertex(t, {1, t.complex(1).chambers().front().value}, 3), LevelError);
}

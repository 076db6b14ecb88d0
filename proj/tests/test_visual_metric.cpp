#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cellseq/cellseq.hpp"
#include "oracles.hpp"

using namespace cellseq;

namespace {

// Plain triple loop, no blocking.
template <class T>
void naive_floyd_warshall(std::vector<T>& d, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i * n + k] + d[k * n + j] < d[i * n + j]) d[i * n + j] = static_cast<T>(d[i * n + k] + d[k * n + j]);
}

struct Sample {
  Example ex;
  std::unique_ptr<CellTower> tower;
  std::unique_ptr<Geometry> geom;
  std::vector<PointAddress> pts;
};

Sample torus_sample(unsigned level, unsigned depth) {
  Sample s{torus_doubling(2), nullptr, nullptr, {}};
  s.tower = std::make_unique<CellTower>(s.ex.rule);
  s.geom = std::make_unique<Geometry>(*s.tower, s.ex.realization);
  s.pts = vertex_addresses(*s.tower, level, depth);
  return s;
}

}  // namespace

TEST(AllPairsShortestPaths, BlockedMatchesNaiveDouble) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> w(0.1, 10.0);
  for (std::size_t n : {1u, 5u, 64u, 100u, 130u}) {
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = i == j ? 0.0 : w(rng);
    auto ref = d;
    naive_floyd_warshall(ref, n);
    for (unsigned jobs : {1u, 3u}) {
      auto got = d;
      all_pairs_shortest_paths(got, n, jobs);
      for (std::size_t i = 0; i < n * n; ++i) ASSERT_DOUBLE_EQ(got[i], ref[i]) << n << " " << jobs;
    }
  }
}

TEST(AllPairsShortestPaths, BlockedMatchesNaiveUint16) {
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> w(1, 300);
  for (std::size_t n : {7u, 64u, 129u}) {
    std::vector<std::uint16_t> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i * n + j] = i == j ? 0 : static_cast<std::uint16_t>(w(rng));
    std::vector<int> ref(d.begin(), d.end());
    naive_floyd_warshall(ref, n);
    all_pairs_shortest_paths(d, n, 2);
    for (std::size_t i = 0; i < n * n; ++i) ASSERT_EQ(d[i], ref[i]);
  }
  std::vector<std::uint16_t> big{0, 0x8000, 0x8000, 0};
  EXPECT_THROW(all_pairs_shortest_paths(big, 2), Error);
}

TEST(VisualMetric, QuasiDistance) {
  auto s = torus_sample(2, 6);
  auto x = s.geom->snap(Point{0, 0}, 6), y = s.geom->snap(Point{1, 0}, 6);
  EXPECT_DOUBLE_EQ(quasi_distance(*s.tower, x, y, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(quasi_distance(*s.tower, x, x, 2.0), 0.0);
  EXPECT_THROW(quasi_distance(*s.tower, x, y, 1.0), Error);
  // Adjacent level-6 vertices are not resolved at depth 6.
  auto z = s.geom->snap(Point{1.0 / 64, 0}, 6);
  EXPECT_THROW(quasi_distance(*s.tower, x, z, 2.0), TruncatedPair);
}

TEST(VisualMetric, TwoPointsGiveTheQuasiDistance) {
  auto s = torus_sample(2, 6);
  std::vector<PointAddress> two{s.geom->snap(Point{0, 0}, 6), s.geom->snap(Point{1, 0}, 6)};
  auto r = chain_metric(*s.tower, two, {.lambda = 2.0, .eps = 1.0, .depth = 6, .sample_level = 2});
  EXPECT_DOUBLE_EQ(r.at(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(r.at(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(r.c_meas, 1.0);
}

TEST(VisualMetric, ChainMetricMatchesIndependentComputation) {
  const unsigned depth = 4, level = 2;
  auto s = torus_sample(level, depth);
  const std::size_t n = s.pts.size();
  ASSERT_EQ(n, 64u);
  VisualMetricConfig cfg{.lambda = 2.0, .eps = 1.0, .depth = depth, .sample_level = level};
  auto r = chain_metric(*s.tower, s.pts, cfg);
  EXPECT_TRUE(r.exact);
  EXPECT_TRUE(r.metric());
  EXPECT_TRUE(r.rho_below_q);

  oracle::GridModel fine{2, 2L << depth, false};
  std::vector<oracle::GridCell> at(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Box& b = s.geom->box(s.pts[i].carrier);
    for (int a = 0; a < 2; ++a) at[i].lo[a] = fine.mod(std::lround(std::ldexp(b.lo[a], depth)));
  }
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) q[i * n + j] = std::ldexp(1.0, -static_cast<int>(oracle::brute_separation(2, false, depth, at[i], at[j])));
  auto rho = q;
  naive_floyd_warshall(rho, n);
  double cm = 1.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    ASSERT_NEAR(r.weight[i], q[i], 1e-15);
    ASSERT_NEAR(r.rho[i], rho[i], 1e-15);
    if (q[i] > 0) cm = std::max({cm, q[i] / rho[i], rho[i] / q[i]});
  }
  EXPECT_DOUBLE_EQ(r.c_meas, cm);
  EXPECT_DOUBLE_EQ(r.c_meas, 2.0);
}

TEST(VisualMetric, ExactAndFloatingPathsAgree) {
  auto s = torus_sample(3, 5);
  VisualMetricConfig cfg{.lambda = 2.0, .eps = 1.0, .depth = 5, .sample_level = 3, .jobs = 2};
  auto a = chain_metric(*s.tower, s.pts, cfg);
  ASSERT_TRUE(a.exact);
  // Lambda^eps = 2^(1 + 1e-9) is not a dyadic power and takes the double path.
  cfg.eps = 1.0 + 1e-9;
  auto b = chain_metric(*s.tower, s.pts, cfg);
  ASSERT_FALSE(b.exact);
  for (std::size_t i = 0; i < a.rho.size(); ++i) ASSERT_NEAR(a.rho[i], b.rho[i], 1e-7);
  EXPECT_NEAR(a.c_meas, b.c_meas, 1e-6);
}

TEST(VisualMetric, NonIntegralExponentIsAMetric) {
  auto s = torus_sample(2, 4);
  auto r = chain_metric(*s.tower, s.pts, {.lambda = 3.0, .eps = 0.5, .depth = 4, .sample_level = 2});
  EXPECT_FALSE(r.exact);
  EXPECT_TRUE(r.metric());
  EXPECT_TRUE(r.rho_below_q);
  EXPECT_THROW(chain_metric(*s.tower, s.pts, {.lambda = 2.0, .eps = 0.0}), Error);
}

TEST(VisualMetric, CellMetricIsComparableToScale) {
  auto s = torus_sample(3, 5);
  auto vm = chain_metric(*s.tower, s.pts, {.lambda = 2.0, .eps = 1.0, .depth = 5, .sample_level = 3});
  auto cm = cell_metric_report(*s.tower, s.pts, vm, 1, 3);
  ASSERT_EQ(cm.rows.size(), 3u);
  EXPECT_TRUE(cm.covered);
  for (const auto& row : cm.rows) {
    EXPECT_EQ(row.chambers, s.tower->count_chambers(row.level));
    EXPECT_GE(row.c_prime, 1.0);
    EXPECT_LE(row.c_prime, 4.0);
  }
}

TEST(VisualMetric, HyperbolicityOnSmallSample) {
  CellTower t(torus_doubling(2).rule);
  auto h = hyperbolicity_constants(t, 3, 5);
  EXPECT_EQ(h.points, 256u);
  EXPECT_LE(h.k0, 3);
  EXPECT_TRUE(h.iteration_ok());
  EXPECT_EQ(h.iteration_pairs, 256u * 255u / 2u);
  EXPECT_THROW(hyperbolicity_constants(t, 4, 3), LevelError);
}

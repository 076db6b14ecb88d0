// Iterates the doubling rule on the 2-torus and prints the level sizes, the
// chamber mesh and the visual-metric constant on a small vertex sample.
#include <cstdio>

#include "cellseq/cellseq.hpp"

int main() {
  using namespace cellseq;
  auto ex = torus_doubling(2);
  CellTower tower(ex.rule);
  Geometry geom(tower, ex.realization);

  std::printf("level  chambers  cells  mesh\n");
  for (unsigned m = 0; m <= 5; ++m)
    std::printf("%5u  %8llu  %5llu  %.6f\n", m, static_cast<unsigned long long>(tower.count_chambers(m)),
                static_cast<unsigned long long>(tower.count_cells(m)), geom.mesh(m));

  VisualMetricConfig cfg;
  cfg.depth = 5;
  cfg.sample_level = 3;
  auto pts = vertex_addresses(tower, cfg.sample_level, cfg.depth);
  auto vm = chain_metric(tower, pts, cfg);
  std::printf("visual metric on %zu vertices: C_meas = %g, metric = %s\n", vm.points, vm.c_meas,
              vm.metric() ? "yes" : "no");
  return 0;
}

// Local multiplicities of the pillowcase doubling map and its postcritical set.
#include <cstdio>

#include "cellseq/cellseq.hpp"

int main() {
  using namespace cellseq;
  auto ex = pillowcase();
  const auto& rule = *ex.rule;
  auto table = multiplicity_table(rule);
  std::printf("vertex  image  i  N(D1,x)  N(D0,f(x))\n");
  for (const auto& r : table.vertices)
    std::printf("%-6s  %-5s  %u  %7u  %10u\n", rule.refined.name(r.vertex).c_str(),
                rule.base.name(rule.image[r.vertex.value]).c_str(), r.multiplicity, r.refined_count, r.base_count);

  auto cpcf = cpcf_data(rule);
  std::printf("branch cells:");
  for (CellId c : cpcf.branch) std::printf(" %s", rule.refined.name(c).c_str());
  std::printf("\npostcritical cells:");
  for (CellId c : cpcf.postcritical) std::printf(" %s", rule.base.name(c).c_str());
  std::printf("\ndegree %u\n", degree(rule));
  return 0;
}

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cellseq/realization.hpp"
#include "cellseq/subdivision_rule.hpp"

namespace cellseq {

/// A rule together with its realization.
struct Example {
  std::string name;
  std::shared_ptr<const SubdivisionRule> rule;
  Realization realization;
};

namespace detail {

struct GridCells {
  std::vector<Box> boxes;
  CellComplex complex;
};

inline const char* dim_letter(int d, bool upper) {
  static const char* lower[] = {"v", "e", "f", "s"};
  static const char* up[] = {"V", "E", "F", "S"};
  return upper ? up[d] : lower[d];
}

// Cells of the cubical grid of spacing h on (R / period Z)^n, modulo the group
// of the quotient space. Each cell is represented by its canonical lift.
inline GridCells grid_cells(const QuotientSpace& sp, double h, bool upper_names) {
  const int n = sp.dim();
  const long steps = std::lround(sp.period() / h);
  std::map<std::array<double, 2 * kMaxDim>, Box> orbits;
  std::array<long, kMaxDim> idx{};
  const long per_axis = 2 * steps;  // vertex k or edge [k, k+1]
  for (;;) {
    Box b;
    for (int i = 0; i < n; ++i) {
      long v = idx[static_cast<std::size_t>(i)];
      double a = static_cast<double>(v / 2) * h;
      b.lo[i] = a;
      b.hi[i] = (v % 2 == 0) ? a : a + h;
    }
    Box c = sp.canonical(b);
    orbits.emplace(sp.key(c), c);
    int i = 0;
    while (i < n && ++idx[static_cast<std::size_t>(i)] == per_axis) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == n) break;
  }
  std::vector<Box> boxes;
  for (auto& [k, b] : orbits) boxes.push_back(b);
  std::stable_sort(boxes.begin(), boxes.end(),
                   [&](const Box& a, const Box& b) { return box_dimension(a, n) < box_dimension(b, n); });
  std::vector<CellComplex::CellSpec> specs;
  std::vector<int> counter(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& b : boxes) {
    int d = box_dimension(b, n);
    specs.push_back({std::string(dim_letter(d, upper_names)) + std::to_string(counter[static_cast<std::size_t>(d)]++), d, {}});
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = 0; j < boxes.size(); ++j)
      if (specs[j].dim == specs[i].dim - 1 && sp.place_into(boxes[j], boxes[i], 1e-12))
        specs[i].faces.push_back(specs[j].name);
  GridCells out;
  out.boxes = std::move(boxes);
  out.complex = CellComplex::from_specs(n, specs);
  return out;
}

inline Box scaled(const Box& b, double s) {
  Box r;
  for (int i = 0; i < kMaxDim; ++i) {
    r.lo[i] = std::min(s * b.lo[i], s * b.hi[i]);
    r.hi[i] = std::max(s * b.lo[i], s * b.hi[i]);
  }
  return r;
}

// The rule of x -> factor * x between grids of spacing h0 and h0 / factor.
inline Example scaling_rule(std::string name, const QuotientSpace& sp, std::string model, double side, double h0,
                            double factor) {
  auto base = grid_cells(sp, h0, true);
  auto refined = grid_cells(sp, h0 / factor, false);
  const int n = sp.dim();
  std::map<std::array<double, 2 * kMaxDim>, std::uint32_t> base_index;
  for (std::size_t i = 0; i < base.boxes.size(); ++i) base_index[sp.key(base.boxes[i])] = static_cast<std::uint32_t>(i);

  auto rule = std::make_shared<SubdivisionRule>();
  const std::size_t n1 = refined.boxes.size();
  rule->parent.resize(n1);
  rule->image.resize(n1);
  Realization real;
  real.model = std::move(model);
  real.dim = n;
  real.side = side;
  real.base_boxes = base.boxes;
  real.refined_boxes = refined.boxes;
  real.branch_inverses.resize(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    const Box& b = refined.boxes[i];
    const int d = box_dimension(b, n);
    std::optional<std::uint32_t> par;
    for (std::size_t j = 0; j < base.boxes.size(); ++j) {
      int dj = box_dimension(base.boxes[j], n);
      if (dj >= d && (!par || dj < box_dimension(base.boxes[*par], n)) && sp.place_into(b, base.boxes[j], 1e-12))
        par = static_cast<std::uint32_t>(j);
    }
    if (!par) throw RealizationError("refined cell outside every base cell");
    rule->parent[i] = CellId(*par);
    Box img = sp.canonical(scaled(b, factor));
    auto it = base_index.find(sp.key(img));
    if (it == base_index.end()) throw RealizationError("image of a refined cell is not a base cell");
    rule->image[i] = CellId(it->second);
    if (d == n) {
      // Find g with g(factor * b) equal to the stored lift of the image chamber.
      const Box& target = base.boxes[it->second];
      for (double eps : {1.0, -1.0}) {
        if (eps < 0 && !sp.reflection()) break;
        Box c = scaled(b, factor * eps);
        Point k;
        bool ok = true;
        for (int a = 0; a < n && ok; ++a) {
          double shift = (target.lo[a] - c.lo[a]) / sp.period();
          k[a] = std::round(shift);
          ok = std::abs(shift - k[a]) < 1e-9 && std::abs(c.hi[a] + k[a] * sp.period() - target.hi[a]) < 1e-9;
        }
        if (!ok) continue;
        // f(x) = eps * factor * x + period * k, so G(y) = eps (y - period * k) / factor.
        Affine g;
        g.scale = eps / factor;
        for (int a = 0; a < n; ++a) g.offset[a] = -eps * sp.period() * k[a] / factor;
        real.branch_inverses[i] = g;
        break;
      }
      if (!real.branch_inverses[i]) throw RealizationError("no lift matches the image chamber");
    }
  }
  rule->base = std::move(base.complex);
  rule->refined = std::move(refined.complex);
  return {std::move(name), std::move(rule), std::move(real)};
}

}  // namespace detail

/// x -> 2x on the flat torus (R / 2Z)^n with the unit cubical structure.
inline Example torus_doubling(int n) {
  if (n < 1 || n > kMaxDim) throw Error("torus dimension must be in [1," + std::to_string(kMaxDim) + "]");
  QuotientSpace sp(n, 2.0, false);
  return detail::scaling_rule("torus" + std::to_string(n), sp, "flat_torus", 2.0, 1.0, 2.0);
}

/// x -> 2x on the pillowcase R^2 / (2Z^2 x| {+-1}), two unit squares glued
/// along their boundaries.
inline Example pillowcase() {
  QuotientSpace sp(2, 2.0, true);
  return detail::scaling_rule("pillow", sp, "pillowcase", 1.0, 1.0, 2.0);
}

/// The identity map on the torus, with D1 = D0. Not expanding.
inline Example identity_subdivision(int n) {
  Example t = torus_doubling(n);
  const auto& base = t.rule->base;
  std::vector<CellComplex::CellSpec> specs;
  for (std::size_t i = 0; i < base.size(); ++i) {
    CellComplex::CellSpec s;
    auto name = base.name(CellId(i));
    s.name = name;
    s.name[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s.name[0])));
    s.dim = base.dim(CellId(i));
    specs.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < base.size(); ++i)
    for (CellId f : base.immediate_faces(CellId(i))) specs[i].faces.push_back(specs[f.value].name);
  auto rule = std::make_shared<SubdivisionRule>();
  rule->base = base;
  rule->refined = CellComplex::from_specs(base.dim_top(), specs);
  for (std::size_t i = 0; i < base.size(); ++i) {
    rule->parent.push_back(CellId(i));
    rule->image.push_back(CellId(i));
  }
  Realization real = t.realization;
  real.refined_boxes = real.base_boxes;
  real.branch_inverses.assign(base.size(), std::nullopt);
  for (CellId c : base.chambers()) real.branch_inverses[c.value] = Affine{};
  return {"identity" + std::to_string(n), std::move(rule), std::move(real)};
}

/// Built-in examples by name: torus2, torus3, pillow, identity2.
inline Example builtin_example(const std::string& name) {
  if (name == "torus2") return torus_doubling(2);
  if (name == "torus3") return torus_doubling(3);
  if (name == "pillow") return pillowcase();
  if (name == "identity2") return identity_subdivision(2);
  throw Error("unknown example '" + name + "'");
}

inline std::vector<std::string> builtin_example_names() { return {"torus2", "torus3", "pillow", "identity2"}; }

}  // namespace cellseq

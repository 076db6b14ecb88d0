#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "cellseq/geometry.hpp"
#include "cellseq/level_cells.hpp"

namespace cellseq {

/// Geometric data attached to a rule: one box per base and refined cell (a lift
/// into R^n) and, for every refined chamber X, the affine inverse branch
/// G_X = (f|_X)^{-1} defined on the box of f(X).
struct Realization {
  std::string model = "flat_torus";  // "flat_torus" or "pillowcase"
  int dim = 2;
  double side = 2.0;  // torus side, or the side of each pillowcase square
  std::vector<Box> base_boxes;
  std::vector<Box> refined_boxes;
  std::vector<std::optional<Affine>> branch_inverses;  // indexed by refined cell

  QuotientSpace space() const {
    if (model == "flat_torus") return QuotientSpace(dim, side, false);
    if (model == "pillowcase") {
      if (dim != 2) throw RealizationError("the pillowcase model is two-dimensional");
      return QuotientSpace(dim, 2.0 * side, true);
    }
    throw RealizationError("unsupported realization model '" + model + "'");
  }
};

/// Number of non-degenerate axes of a box.
inline int box_dimension(const Box& b, int dim, double tol = 1e-12) {
  int k = 0;
  for (int i = 0; i < dim; ++i)
    if (b.hi[i] - b.lo[i] > tol) ++k;
  return k;
}

/// Checks box dimensions, face containment, refinement containment and that
/// each inverse branch carries the image box onto the chamber box.
ValidationReport validate_realization(const SubdivisionRule& rule, const Realization& r);

/// Realized level complexes: cell boxes, diameters, distances, the map f on
/// points and its inverse branches.
///
/// The box of a level-m cell (p, q) is G_X(g * box(q)) where X is the refined
/// chamber whose branch serves p and g moves box(q) into the box of f(X).
class Geometry {
 public:
  Geometry(const CellTower& tower, Realization r, double tol = 1e-9)
      : tower_(&tower), real_(std::move(r)), space_(real_.space()), tol_(tol) {
    const auto& rule = tower.rule();
    if (real_.base_boxes.size() != rule.base.size() || real_.refined_boxes.size() != rule.refined.size() ||
        real_.branch_inverses.size() != rule.refined.size())
      throw RealizationError("realization tables do not match the rule");
    for (CellId c : rule.refined.chambers())
      if (!real_.branch_inverses[c.value])
        throw RealizationError("refined chamber '" + rule.refined.name(c) + "' has no inverse branch");
  }

  const CellTower& tower() const noexcept { return *tower_; }
  const Realization& realization() const noexcept { return real_; }
  const QuotientSpace& space() const noexcept { return space_; }
  int dim() const noexcept { return space_.dim(); }

  const std::vector<Box>& level_boxes(unsigned m) const { return level(m).boxes; }
  const Box& box(LevelCell c) const { return level(c.level).boxes.at(c.index); }

  /// Refined chamber whose inverse branch produces the cell (levels >= 1).
  std::uint32_t branch_chamber(LevelCell c) const {
    if (c.level == 0) throw LevelError("no branch at level 0");
    return level(c.level).branch.at(c.index);
  }

  double diam(LevelCell c, Norm norm = Norm::L2) const { return space_.box_diameter(box(c), norm); }
  double dist(LevelCell a, LevelCell b, Norm norm = Norm::L2) const {
    return space_.box_distance(box(a), box(b), norm);
  }

  /// Largest chamber diameter at level m.
  double mesh(unsigned m) const {
    double best = 0;
    for (auto c : chambers_at_level(*tower_, m)) best = std::max(best, diam(c));
    return best;
  }
  double min_chamber_diam(unsigned m) const {
    double best = std::numeric_limits<double>::infinity();
    for (auto c : chambers_at_level(*tower_, m)) best = std::min(best, diam(c));
    return best;
  }

  /// (f|_c)^{-1}(y) for a point y of f(c).
  Point pullback(LevelCell c, const Point& y) const {
    const auto& rule = tower_->rule();
    std::uint32_t x1 = branch_chamber(c);
    const Box& target = real_.base_boxes[rule.image[x1].value];
    auto yy = space_.place_point_into(y, target, tol_);
    if (!yy) throw RealizationError("point is not in the image of " + tower_->name(c));
    return (*real_.branch_inverses[x1])(*yy);
  }

  /// f(x) for a point x of c (levels >= 1), as a point of the chart of the base chamber f(X).
  Point forward(LevelCell c, const Point& x) const {
    std::uint32_t x1 = branch_chamber(c);
    auto xx = space_.place_point_into(x, real_.refined_boxes[x1], tol_);
    if (!xx) throw RealizationError("point is not in the branch chamber of " + tower_->name(c));
    return real_.branch_inverses[x1]->inverse()(*xx);
  }

  /// f^k(x) for x in c, following the images of c.
  Point forward_iterate(LevelCell c, Point x, unsigned k) const {
    for (unsigned i = 0; i < k; ++i) {
      x = forward(c, x);
      c = tower_->image(c);
    }
    return x;
  }

  /// The address of x at `depth`: the cell whose relative interior contains it.
  PointAddress snap(const Point& x, unsigned depth) const {
    const auto& d0 = tower_->complex(0);
    std::optional<LevelCell> cur;
    for (std::size_t i = 0; i < d0.size(); ++i)
      if (space_.in_relative_interior(x, real_.base_boxes[i], 1e-12)) {
        cur = LevelCell{0, static_cast<std::uint32_t>(i)};
        break;
      }
    if (!cur) throw RealizationError("point not located in the base complex");
    for (unsigned l = 1; l <= depth; ++l) {
      std::optional<LevelCell> next;
      for (std::uint32_t k : tower_->children(*cur)) {
        LevelCell c{l, k};
        if (space_.in_relative_interior(x, box(c), 1e-12)) {
          next = c;
          break;
        }
      }
      if (!next) throw RealizationError("point not located at level " + std::to_string(l));
      cur = next;
    }
    return {depth, *cur};
  }

  /// Location of a vertex.
  Point vertex_point(LevelCell v) const {
    if (tower_->dim(v) != 0) throw LevelError("not a vertex");
    return box(v).lo;
  }

  /// Points of a box on a regular grid with `grid` intervals per axis.
  std::vector<Point> box_samples(const Box& b, int grid) const {
    std::vector<Point> out;
    const int n = dim();
    std::array<int, kMaxDim> idx{};
    for (;;) {
      Point p;
      for (int i = 0; i < n; ++i) {
        double t = grid == 0 ? 0.0 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / grid;
        p[i] = b.lo[i] + t * (b.hi[i] - b.lo[i]);
      }
      out.push_back(p);
      int i = 0;
      while (i < n && ++idx[static_cast<std::size_t>(i)] > grid) idx[static_cast<std::size_t>(i++)] = 0;
      if (i == n) break;
    }
    return out;
  }

  /// Largest pairwise quotient distance in a point set.
  double set_diameter(std::span<const Point> pts) const {
    double best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, space_.distance(pts[i], pts[j]));
    return best;
  }

  /// Chambers of the flower of vertex v.
  std::vector<LevelCell> flower_chambers(LevelCell v) const {
    const auto& k = tower_->complex(v.level);
    std::vector<LevelCell> out;
    for (CellId s : k.cofaces(v.id()))
      if (k.dim(s) == k.dim_top()) out.push_back({v.level, s.value});
    return out;
  }

  /// Cells of the topological boundary of the flower of v.
  std::vector<LevelCell> flower_boundary(LevelCell v) const {
    const auto& k = tower_->complex(v.level);
    auto st = k.star(v.id());
    std::vector<CellId> out;
    for (auto ch : flower_chambers(v))
      for (CellId f : k.faces(ch.id()))
        if (!st.contains(f)) out.push_back(f);
    out = detail::sorted_unique(std::move(out));
    std::vector<LevelCell> cells;
    for (CellId c : out) cells.push_back({v.level, c.value});
    return cells;
  }

  std::vector<Point> flower_samples(LevelCell v, int grid = 2) const {
    std::vector<Point> pts;
    for (auto ch : flower_chambers(v)) {
      auto s = box_samples(box(ch), grid);
      pts.insert(pts.end(), s.begin(), s.end());
    }
    return pts;
  }

  double flower_diameter(LevelCell v, int grid = 2) const { return set_diameter(flower_samples(v, grid)); }

  /// sup{r : B(y, r) inside the flower of v}; infinite if the flower is everything.
  double flower_inradius(LevelCell v, const Point& y) const {
    double best = std::numeric_limits<double>::infinity();
    for (auto c : flower_boundary(v)) best = std::min(best, space_.point_box_distance(y, box(c)));
    return best;
  }

  /// sup{|x - y| : x in the flower of v}.
  double flower_outradius(LevelCell v, const Point& y, int grid = 2) const {
    double best = 0;
    for (const auto& p : flower_samples(v, grid)) best = std::max(best, space_.distance(p, y));
    return best;
  }

  /// Diameter of the whole space, from samples of the base chambers.
  double space_diameter(int grid = 4) const {
    std::vector<Point> pts;
    for (CellId c : tower_->complex(0).chambers()) {
      auto s = box_samples(real_.base_boxes[c.value], grid);
      pts.insert(pts.end(), s.begin(), s.end());
    }
    return set_diameter(pts);
  }

 private:
  struct LevelGeom {
    std::vector<Box> boxes;
    std::vector<std::uint32_t> branch;
  };

  const LevelGeom& level(unsigned m) const {
    if (m >= CellTower::kMaxLevels) throw LevelError("level beyond supported range");
    if (m < built_.load(std::memory_order_acquire)) return *levels_[m];
    tower_->complex(m);
    std::lock_guard<std::mutex> lock(mu_);
    while (built_.load() <= m) build(built_.load());
    return *levels_[m];
  }

  void build(unsigned m) const {
    auto out = std::make_unique<LevelGeom>();
    const auto& rule = tower_->rule();
    if (m == 0) {
      out->boxes = real_.base_boxes;
    } else if (m == 1) {
      out->boxes = real_.refined_boxes;
      const auto& d1 = rule.refined;
      out->branch.resize(d1.size());
      for (std::size_t i = 0; i < d1.size(); ++i) {
        CellId c(i);
        std::optional<std::uint32_t> ch;
        if (d1.dim(c) == d1.dim_top()) ch = c.value;
        for (CellId s : d1.cofaces(c))
          if (!ch && d1.dim(s) == d1.dim_top()) ch = s.value;
        if (!ch) throw RealizationError("refined cell '" + d1.name(c) + "' lies in no chamber");
        out->branch[i] = *ch;
      }
    } else {
      const auto& prev = *levels_[m - 1];
      auto par = tower_->parent_table(m);
      auto img = tower_->image_table(m);
      const std::size_t n = par.size();
      out->boxes.resize(n);
      out->branch.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t x1 = prev.branch[par[i]];
        const Box& target = real_.base_boxes[rule.image[x1].value];
        auto placed = space_.place_into(prev.boxes[img[i]], target, tol_);
        if (!placed)
          throw RealizationError("cell " + std::to_string(i) + " at level " + std::to_string(m) +
                                 " does not fit the chart of its branch");
        out->boxes[i] = (*real_.branch_inverses[x1])(*placed);
        out->branch[i] = x1;
      }
    }
    levels_[m] = std::move(out);
    built_.store(m + 1, std::memory_order_release);
  }

  const CellTower* tower_;
  Realization real_;
  QuotientSpace space_;
  double tol_;
  mutable std::mutex mu_;
  mutable std::array<std::unique_ptr<LevelGeom>, CellTower::kMaxLevels> levels_;
  mutable std::atomic<unsigned> built_{0};
};

struct ExpansionReport {
  std::vector<double> mesh;         // largest chamber diameter per level
  std::vector<double> ratio;        // mesh[m+1] / mesh[m]
  double rate = 1.0;                // geometric decay rate fitted on levels >= 1
  bool expanding = false;
};

/// Chamber-mesh decay over levels 0..max_m.
ExpansionReport expansion_check(const Geometry& g, unsigned max_m);

struct LebesgueReport {
  unsigned level = 0;
  double value = 0;      // min over samples x of the largest ball around x inside one flower
  std::size_t samples = 0;
  Point worst;
};

/// Lebesgue number of the level-m flower cover, estimated on a grid with
/// `per_axis` intervals across each base chamber.
LebesgueReport lebesgue_number(const Geometry& g, unsigned m, int per_axis = 8);

/// p_m(c) for every cell of levels 0..max_level.
struct Marking {
  std::vector<std::vector<Point>> points;

  const Point& at(LevelCell c) const { return points.at(c.level).at(c.index); }
};

/// Box centres of the base cells.
inline std::vector<Point> default_base_points(const Geometry& g) {
  std::vector<Point> out;
  for (const auto& b : g.realization().base_boxes) out.push_back(midpoint(b, g.dim()));
  return out;
}

/// Pulls the base marking back through the inverse branches. Throws
/// RealizationError if a base point is not interior to its cell.
Marking make_marking(const Geometry& g, std::vector<Point> base_points, unsigned max_level);

/// max over cells c at levels >= 1 of dist(f(p_m(c)), p_{m-1}(f(c))).
double marking_defect(const Geometry& g, const Marking& mk);

/// Shortest-path distances on a grid net of the quotient space, used as an
/// independent check of the exact metric.
class NetGeodesic {
 public:
  NetGeodesic(const QuotientSpace& s, double spacing, int reach = 3);

  double distance(const Point& a, const Point& b) const;
  std::size_t nodes() const noexcept { return coords_.size(); }

 private:
  std::size_t node_of(const std::array<long, kMaxDim>& idx) const;
  std::size_t nearest(const Point& p) const;

  QuotientSpace space_;
  double h_;
  long n_;
  std::vector<Point> coords_;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj_;
  std::vector<long> canon_;
};

/// level, chambers, mesh, min chamber diameter, flower mesh.
std::string mesh_csv(const Geometry& g, unsigned max_m);

// ---------------------------------------------------------------------------

inline ValidationReport validate_realization(const SubdivisionRule& rule, const Realization& r) {
  ValidationReport rep;
  QuotientSpace sp;
  try {
    sp = r.space();
  } catch (const RealizationError& e) {
    rep.add("realization-model", e.what(), {});
    return rep;
  }
  if (r.dim != rule.base.dim_top()) rep.add("realization-dimension", "model dimension differs from the complex", {});
  if (r.base_boxes.size() != rule.base.size() || r.refined_boxes.size() != rule.refined.size() ||
      r.branch_inverses.size() != rule.refined.size()) {
    rep.add("realization-tables", "box or branch tables do not cover every cell", {});
    return rep;
  }
  auto check_complex = [&](const CellComplex& k, const std::vector<Box>& boxes, const std::string& tag) {
    for (std::size_t i = 0; i < k.size(); ++i) {
      CellId c(i);
      if (box_dimension(boxes[i], r.dim) != k.dim(c))
        rep.add("realization-box", tag + " box dimension differs from the cell dimension", {k.name(c)});
      for (CellId f : k.faces(c))
        if (!sp.place_into(boxes[f.value], boxes[i])) {
          rep.add("realization-faces", tag + " face box '" + k.name(f) + "' is not inside the cell box", {k.name(c)});
          break;
        }
    }
  };
  check_complex(rule.base, r.base_boxes, "base");
  check_complex(rule.refined, r.refined_boxes, "refined");
  for (std::size_t i = 0; i < rule.refined.size(); ++i) {
    CellId c(i);
    if (!sp.place_into(r.refined_boxes[i], r.base_boxes[rule.parent[i].value]))
      rep.add("realization-parent", "refined box is not inside its parent box", {rule.refined.name(c)});
    if (rule.refined.dim(c) == rule.refined.dim_top()) {
      if (!r.branch_inverses[i]) {
        rep.add("realization-branch", "chamber has no inverse branch", {rule.refined.name(c)});
        continue;
      }
      Box img = (*r.branch_inverses[i])(r.base_boxes[rule.image[i].value]);
      if (!sp.place_into(img, r.refined_boxes[i]) || !sp.place_into(r.refined_boxes[i], img))
        rep.add("realization-branch", "inverse branch does not map the image box onto the chamber box",
                {rule.refined.name(c)});
    }
  }
  return rep;
}

inline ExpansionReport expansion_check(const Geometry& g, unsigned max_m) {
  ExpansionReport rep;
  for (unsigned m = 0; m <= max_m; ++m) rep.mesh.push_back(g.mesh(m));
  for (unsigned m = 0; m < max_m; ++m) rep.ratio.push_back(rep.mesh[m + 1] / rep.mesh[m]);
  if (max_m >= 2)
    rep.rate = std::pow(rep.mesh[max_m] / rep.mesh[1], 1.0 / static_cast<double>(max_m - 1));
  else if (max_m == 1)
    rep.rate = rep.ratio[0];
  bool decreasing = true;
  for (unsigned m = 1; m < max_m; ++m)
    if (!(rep.mesh[m + 1] < rep.mesh[m])) decreasing = false;
  rep.expanding = decreasing && rep.rate < 1.0 - 1e-9;
  return rep;
}

inline LebesgueReport lebesgue_number(const Geometry& g, unsigned m, int per_axis) {
  LebesgueReport rep;
  rep.level = m;
  rep.value = std::numeric_limits<double>::infinity();
  const auto& t = g.tower();
  const double cap = 0.5 * g.space_diameter();
  std::map<std::uint32_t, std::vector<LevelCell>> boundary_cache;
  for (CellId c : t.complex(0).chambers()) {
    for (const auto& x : g.box_samples(g.realization().base_boxes[c.value], per_axis)) {
      auto addr = g.snap(x, m);
      const auto& k = t.complex(m);
      double rx = 0;
      for (CellId v : k.vertices_of(addr.carrier.id())) {
        auto it = boundary_cache.find(v.value);
        if (it == boundary_cache.end())
          it = boundary_cache.emplace(v.value, g.flower_boundary({m, v.value})).first;
        double r = std::numeric_limits<double>::infinity();
        for (auto b : it->second) r = std::min(r, g.space().point_box_distance(x, g.box(b)));
        rx = std::max(rx, std::min(r, cap));
      }
      ++rep.samples;
      if (rx < rep.value) {
        rep.value = rx;
        rep.worst = x;
      }
    }
  }
  return rep;
}

inline Marking make_marking(const Geometry& g, std::vector<Point> base_points, unsigned max_level) {
  const auto& t = g.tower();
  const auto& d0 = t.complex(0);
  if (base_points.size() != d0.size()) throw RealizationError("one base point per base cell is required");
  for (std::size_t i = 0; i < d0.size(); ++i)
    if (!g.space().in_relative_interior(base_points[i], g.realization().base_boxes[i], 1e-12))
      throw RealizationError("base point of '" + d0.name(CellId(i)) + "' is not interior to the cell");
  Marking mk;
  mk.points.push_back(std::move(base_points));
  for (unsigned m = 1; m <= max_level; ++m) {
    const std::size_t n = t.complex(m).size();
    auto img = t.image_table(m);
    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i)
      pts[i] = g.pullback({m, static_cast<std::uint32_t>(i)}, mk.points[m - 1][img[i]]);
    mk.points.push_back(std::move(pts));
  }
  return mk;
}

inline double marking_defect(const Geometry& g, const Marking& mk) {
  const auto& t = g.tower();
  double worst = 0;
  for (unsigned m = 1; m < mk.points.size(); ++m) {
    auto img = t.image_table(m);
    for (std::size_t i = 0; i < mk.points[m].size(); ++i) {
      LevelCell c{m, static_cast<std::uint32_t>(i)};
      Point fx = g.forward(c, mk.points[m][i]);
      worst = std::max(worst, g.space().distance(fx, mk.points[m - 1][img[i]]));
    }
  }
  return worst;
}

inline NetGeodesic::NetGeodesic(const QuotientSpace& s, double spacing, int reach) : space_(s), h_(spacing) {
  double ratio = s.period() / spacing;
  n_ = std::lround(ratio);
  if (n_ < 2 || std::abs(ratio - static_cast<double>(n_)) > 1e-9)
    throw RealizationError("net spacing must divide the period");
  const int d = s.dim();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n_);
  canon_.assign(total, -1);
  // Canonical node per orbit.
  std::vector<long> rep(total);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t r = lin;
    if (s.reflection()) {
      std::size_t neg = 0, mul = 1, tmp = lin;
      for (int i = 0; i < d; ++i) {
        long c = static_cast<long>(tmp % static_cast<std::size_t>(n_));
        tmp /= static_cast<std::size_t>(n_);
        neg += static_cast<std::size_t>((n_ - c) % n_) * mul;
        mul *= static_cast<std::size_t>(n_);
      }
      r = std::min(r, neg);
    }
    rep[lin] = static_cast<long>(r);
  }
  for (std::size_t lin = 0; lin < total; ++lin)
    if (rep[lin] == static_cast<long>(lin)) {
      canon_[lin] = static_cast<long>(coords_.size());
      Point p;
      std::size_t tmp = lin;
      for (int i = 0; i < d; ++i) {
        p[i] = static_cast<double>(tmp % static_cast<std::size_t>(n_)) * h_;
        tmp /= static_cast<std::size_t>(n_);
      }
      coords_.push_back(p);
    }
  for (std::size_t lin = 0; lin < total; ++lin) canon_[lin] = canon_[static_cast<std::size_t>(rep[lin])];
  // Offsets with coprime entries, so that longer steps are not redundant.
  std::vector<std::pair<std::array<long, kMaxDim>, double>> steps;
  std::array<long, kMaxDim> o{};
  std::function<void(int)> gen = [&](int i) {
    if (i == d) {
      long g = 0;
      double len = 0;
      for (int j = 0; j < d; ++j) {
        g = std::gcd(g, std::abs(o[static_cast<std::size_t>(j)]));
        len += static_cast<double>(o[static_cast<std::size_t>(j)] * o[static_cast<std::size_t>(j)]);
      }
      if (g == 1) steps.push_back({o, std::sqrt(len) * h_});
      return;
    }
    for (long v = -reach; v <= reach; ++v) {
      o[static_cast<std::size_t>(i)] = v;
      gen(i + 1);
    }
  };
  gen(0);
  adj_.resize(coords_.size());
  for (std::size_t lin = 0; lin < total; ++lin) {
    if (rep[lin] != static_cast<long>(lin)) continue;
    std::array<long, kMaxDim> idx{};
    std::size_t tmp = lin;
    for (int i = 0; i < d; ++i) {
      idx[static_cast<std::size_t>(i)] = static_cast<long>(tmp % static_cast<std::size_t>(n_));
      tmp /= static_cast<std::size_t>(n_);
    }
    const auto from = static_cast<std::uint32_t>(canon_[lin]);
    for (const auto& [st, len] : steps) {
      std::array<long, kMaxDim> j{};
      for (int i = 0; i < d; ++i) j[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)] + st[static_cast<std::size_t>(i)];
      adj_[from].push_back({static_cast<std::uint32_t>(node_of(j)), len});
    }
  }
}

inline std::size_t NetGeodesic::node_of(const std::array<long, kMaxDim>& idx) const {
  std::size_t lin = 0, mul = 1;
  for (int i = 0; i < space_.dim(); ++i) {
    long c = ((idx[static_cast<std::size_t>(i)] % n_) + n_) % n_;
    lin += static_cast<std::size_t>(c) * mul;
    mul *= static_cast<std::size_t>(n_);
  }
  return static_cast<std::size_t>(canon_[lin]);
}

inline std::size_t NetGeodesic::nearest(const Point& p) const {
  std::array<long, kMaxDim> idx{};
  for (int i = 0; i < space_.dim(); ++i) idx[static_cast<std::size_t>(i)] = std::lround(p[i] / h_);
  return node_of(idx);
}

inline double NetGeodesic::distance(const Point& a, const Point& b) const {
  const std::size_t s = nearest(a), t = nearest(b);
  std::vector<double> dist(coords_.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s] = 0;
  pq.push({0, static_cast<std::uint32_t>(s)});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    if (v == t) break;
    for (auto [u, w] : adj_[v])
      if (d + w < dist[u]) {
        dist[u] = d + w;
        pq.push({dist[u], u});
      }
  }
  return dist[t] + space_.distance(a, coords_[s]) + space_.distance(b, coords_[t]);
}

inline std::string mesh_csv(const Geometry& g, unsigned max_m) {
  std::ostringstream os;
  os.precision(17);
  os << "level,chambers,mesh,min_chamber_diam,flower_mesh\n";
  const auto& t = g.tower();
  for (unsigned m = 0; m <= max_m; ++m) {
    double fm = 0;
    for (CellId v : t.complex(m).vertices()) fm = std::max(fm, g.flower_diameter({m, v.value}));
    os << m << ',' << t.complex(m).chambers().size() << ',' << g.mesh(m) << ',' << g.min_chamber_diam(m) << ','
       << fm << '\n';
  }
  return os.str();
}

}  // namespace cellseq

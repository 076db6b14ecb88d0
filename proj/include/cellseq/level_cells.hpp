#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "cellseq/cell_complex.hpp"
#include "cellseq/subdivision_rule.hpp"

namespace cellseq {

/// A cell of the level-m complex D_m. Level 0 is D0, level 1 is D1; a cell at
/// level m >= 2 is the pair (p, q) of level-(m-1) cells with
/// minimal_parent(q) == image(p), stored by its index in D_m.
struct LevelCell {
  std::uint32_t level = 0;
  std::uint32_t index = 0;

  CellId id() const { return CellId(index); }
  friend constexpr auto operator<=>(const LevelCell&, const LevelCell&) = default;
};

struct TowerOptions {
  std::size_t max_cells = 8'000'000;  // refuse to materialize a level larger than this
};

/// The sequence of complexes D_0, D_1, D_2, ... generated by a subdivision rule.
///
/// Levels are materialized on demand and then shared read-only; materialization
/// is serialized by a mutex so concurrent readers are safe.
class CellTower {
 public:
  static constexpr unsigned kMaxLevels = 48;

  explicit CellTower(std::shared_ptr<const SubdivisionRule> rule, TowerOptions opts = {})
      : rule_(std::move(rule)), opts_(opts) {
    if (!rule_) throw Error("null rule");
    auto l0 = std::make_unique<Level>();
    l0->complex = rule_->base;
    levels_[0] = std::move(l0);
    built_.store(1);
  }

  const SubdivisionRule& rule() const noexcept { return *rule_; }
  std::shared_ptr<const SubdivisionRule> rule_ptr() const noexcept { return rule_; }
  const TowerOptions& options() const noexcept { return opts_; }

  /// The complex D_m, materializing it (and all coarser levels) if needed.
  const CellComplex& complex(unsigned m) const { return level(m).complex; }

  /// Highest level materialized so far.
  unsigned materialized() const noexcept { return built_.load() - 1; }

  LevelCell cell(unsigned m, CellId c) const {
    complex(m).checked(c);
    return {m, c.value};
  }
  int dim(LevelCell c) const { return complex(c.level).dim(c.id()); }

  LevelCell image(LevelCell c) const {
    if (c.level == 0) throw LevelError("image is undefined at level 0");
    const auto& l = level(c.level);
    l.complex.checked(c.id());
    return {c.level - 1, l.image[c.index]};
  }
  LevelCell minimal_parent(LevelCell c) const {
    if (c.level == 0) throw LevelError("minimal parent is undefined at level 0");
    const auto& l = level(c.level);
    l.complex.checked(c.id());
    return {c.level - 1, l.parent[c.index]};
  }
  LevelCell ancestor(LevelCell c, unsigned m) const {
    if (m > c.level) throw LevelError("ancestor level above the cell level");
    while (c.level > m) c = minimal_parent(c);
    return c;
  }
  LevelCell iterate_image(LevelCell c, unsigned k) const {
    if (k > c.level) throw LevelError("cannot iterate the image below level 0");
    for (unsigned i = 0; i < k; ++i) c = image(c);
    return c;
  }

  /// Cells of level c.level+1 whose minimal parent is c.
  std::span<const std::uint32_t> children(LevelCell c) const {
    level(c.level + 1);
    return levels_[c.level]->children.row(c.index);
  }

  /// The level-(m+1) cell (p, q) if q is one of the cells subdividing f(p).
  std::optional<LevelCell> pair(LevelCell p, LevelCell q) const {
    if (p.level != q.level) throw LevelError("pair components must have the same level");
    const unsigned m = p.level;
    if (m == 0) throw LevelError("pairs start at level 1 components");
    const auto& lp = level(m);
    if (lp.parent[q.index] != lp.image[p.index]) return std::nullopt;
    auto kids = children(p);
    return LevelCell{m + 1, kids[lp.rank[q.index]]};
  }

  CellSet closure(LevelCell c) const { return complex(c.level).closure(c.id()); }
  CellSet star(LevelCell c) const { return complex(c.level).star(c.id()); }

  /// Number of chambers at level m; needs level m-1 only.
  std::uint64_t count_chambers(unsigned m) const;

  /// Number of cells at level m; needs level m-1 only.
  std::uint64_t count_cells(unsigned m) const;

  /// Short name "L<level>:<index>", or the rule's name at levels 0 and 1.
  std::string name(LevelCell c) const {
    if (c.level <= 1) return complex(c.level).name(c.id());
    return "L" + std::to_string(c.level) + ":" + std::to_string(c.index);
  }

  /// Nested pair-tree address, e.g. "(a,(b,c))" with leaves named in D1.
  std::string address(LevelCell c) const {
    if (c.level <= 1) return complex(c.level).name(c.id());
    return "(" + address(minimal_parent(c)) + "," + address(image(c)) + ")";
  }

  // Raw per-level tables, indices at the previous level.
  std::span<const std::uint32_t> parent_table(unsigned m) const { return level(m).parent; }
  std::span<const std::uint32_t> image_table(unsigned m) const { return level(m).image; }

 private:
  struct Level {
    CellComplex complex;
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> image;
    std::vector<std::uint32_t> rank;  // position among the children of its minimal parent
    detail::Csr<std::uint32_t> children;
  };

  const Level& level(unsigned m) const {
    if (m >= kMaxLevels) throw LevelError("level " + std::to_string(m) + " beyond supported range");
    if (m < built_.load(std::memory_order_acquire)) return *levels_[m];
    std::lock_guard<std::mutex> lock(mu_);
    while (built_.load() <= m) build(built_.load());
    return *levels_[m];
  }

  void build(unsigned m) const;

  std::shared_ptr<const SubdivisionRule> rule_;
  TowerOptions opts_;
  mutable std::mutex mu_;
  mutable std::array<std::unique_ptr<Level>, kMaxLevels> levels_;
  mutable std::atomic<unsigned> built_{0};
};

inline void CellTower::build(unsigned m) const {
  auto out = std::make_unique<Level>();
  Level& prev = *levels_[m - 1];
  if (m == 1) {
    const auto& r = *rule_;
    const std::size_t n1 = r.refined.size();
    out->complex = r.refined;
    out->parent.resize(n1);
    out->image.resize(n1);
    out->rank.resize(n1);
    std::vector<std::vector<std::uint32_t>> kids(r.base.size());
    for (std::size_t i = 0; i < n1; ++i) {
      out->parent[i] = r.parent[i].value;
      out->image[i] = r.image[i].value;
      out->rank[i] = static_cast<std::uint32_t>(kids[r.parent[i].value].size());
      kids[r.parent[i].value].push_back(static_cast<std::uint32_t>(i));
    }
    detail::Csr<std::uint32_t> ch;
    for (auto& k : kids) ch.push_row(k);
    prev.children = std::move(ch);
  } else {
    const Level& pp = *levels_[m - 2];  // children of level m-2 cells are known
    const std::size_t n1 = prev.complex.size();
    std::vector<std::uint64_t> first(n1 + 1, 0);
    for (std::size_t p = 0; p < n1; ++p) first[p + 1] = first[p] + pp.children.row_size(prev.image[p]);
    const std::uint64_t total = first[n1];
    if (total > opts_.max_cells)
      throw ResourceCapExceeded("level " + std::to_string(m) + " has " + std::to_string(total) +
                                " cells, above the cap of " + std::to_string(opts_.max_cells));
    out->parent.resize(total);
    out->image.resize(total);
    out->rank.resize(total);
    std::vector<std::uint8_t> dims(total);
    detail::Csr<CellId> faces;
    faces.reserve(total, total * 4);
    const auto& k1 = prev.complex;
    std::vector<CellId> row;
    std::uint64_t idx = 0;
    for (std::size_t p = 0; p < n1; ++p) {
      auto fp = k1.faces(CellId(p));
      for (std::uint32_t q : pp.children.row(prev.image[p])) {
        out->parent[idx] = static_cast<std::uint32_t>(p);
        out->image[idx] = q;
        out->rank[idx] = prev.rank[q];
        dims[idx] = static_cast<std::uint8_t>(k1.dim(CellId(q)));
        auto fq = k1.faces(CellId(q));
        row.clear();
        // Faces of (p, q) are the pairs (r, s) with r in cl(p), s in cl(q).
        auto visit = [&](std::uint32_t r) {
          const std::uint32_t ir = prev.image[r];
          auto try_s = [&](std::uint32_t s) {
            if (prev.parent[s] == ir) {
              std::uint64_t j = first[r] + prev.rank[s];
              if (j != idx) row.push_back(CellId(j));
            }
          };
          try_s(q);
          for (CellId s : fq) try_s(s.value);
        };
        visit(static_cast<std::uint32_t>(p));
        for (CellId r : fp) visit(r.value);
        std::sort(row.begin(), row.end());
        faces.push_row(row);
        ++idx;
      }
    }
    out->complex = CellComplex::from_closed_faces(k1.dim_top(), std::move(dims), std::move(faces));
    detail::Csr<std::uint32_t> ch;
    ch.reserve(n1, total);
    for (std::size_t p = 0; p < n1; ++p) {
      for (std::uint64_t j = first[p]; j < first[p + 1]; ++j) ch.push_value(static_cast<std::uint32_t>(j));
      ch.end_row();
    }
    prev.children = std::move(ch);
  }
  levels_[m] = std::move(out);
  built_.store(m + 1, std::memory_order_release);
}

inline std::uint64_t CellTower::count_chambers(unsigned m) const {
  if (m < built_.load()) return complex(m).chambers().size();
  if (m == 1) return rule_->refined.chambers().size();
  level(m - 1);
  const Level& prev = *levels_[m - 1];
  const Level& pp = *levels_[m - 2];
  const int top = prev.complex.dim_top();
  std::vector<std::uint32_t> ch(pp.complex.size(), 0);
  for (std::size_t t = 0; t < pp.complex.size(); ++t)
    for (std::uint32_t q : pp.children.row(t))
      if (prev.complex.dim(CellId(q)) == top) ++ch[t];
  std::uint64_t total = 0;
  for (CellId p : prev.complex.chambers()) total += ch[prev.image[p.value]];
  return total;
}

inline std::uint64_t CellTower::count_cells(unsigned m) const {
  if (m < built_.load()) return complex(m).size();
  if (m == 1) return rule_->refined.size();
  level(m - 1);
  const Level& prev = *levels_[m - 1];
  const Level& pp = *levels_[m - 2];
  std::uint64_t total = 0;
  for (std::size_t p = 0; p < prev.complex.size(); ++p) total += pp.children.row_size(prev.image[p]);
  return total;
}

/// Lazy view of the chambers of D_m as LevelCells.
inline auto chambers_at_level(const CellTower& t, unsigned m) {
  return t.complex(m).chambers() | std::views::transform([m](CellId c) { return LevelCell{m, c.value}; });
}

struct LevelIntersection {
  bool intersects = false;
  std::optional<LevelCell> witness;  // a common face
};

/// Whether two cells of the same level meet, decided from the pair encoding.
LevelIntersection intersects_at_level(const CellTower& t, LevelCell a, LevelCell b);

/// A point known to lie in the interior of `carrier`, a cell at level `depth`.
struct PointAddress {
  unsigned depth = 0;
  LevelCell carrier;

  friend bool operator==(const PointAddress&, const PointAddress&) = default;
};

/// The largest l such that some level-l chambers containing x and y meet.
/// `truncated` means the true value is at least `value` == depth.
struct SeparationLevel {
  unsigned value = 0;
  bool truncated = false;
};

/// Carrier of x at a coarser level.
inline LevelCell carrier_at(const CellTower& t, const PointAddress& x, unsigned l) {
  return t.ancestor(x.carrier, l);
}

/// Vertices of the union of the level-l chambers containing x, sorted.
inline std::vector<std::uint32_t> chamber_union_vertices(const CellTower& t, LevelCell carrier) {
  const auto& k = t.complex(carrier.level);
  std::vector<std::uint32_t> out;
  auto add = [&](CellId ch) {
    for (CellId f : k.faces(ch))
      if (k.dim(f) == 0) out.push_back(f.value);
    if (k.dim(ch) == 0) out.push_back(ch.value);
  };
  if (k.dim(carrier.id()) == k.dim_top()) add(carrier.id());
  for (CellId s : k.cofaces(carrier.id()))
    if (k.dim(s) == k.dim_top()) add(s);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SeparationLevel separation_level(const CellTower& t, const PointAddress& x, const PointAddress& y);

/// Separation levels for many points of one depth, with per-level vertex sets cached.
class SeparationTable {
 public:
  SeparationTable(const CellTower& t, std::span<const PointAddress> pts);

  std::size_t size() const noexcept { return carriers_.size(); }
  unsigned depth() const noexcept { return depth_; }
  SeparationLevel level(std::size_t i, std::size_t j) const;

 private:
  unsigned depth_ = 0;
  std::vector<std::uint32_t> carriers_;
  std::vector<std::vector<std::vector<std::uint32_t>>> verts_;  // [point][level]
};

/// The vertex of D_depth at the same point as vertex v of D_level.
inline LevelCell lift_vertex(const CellTower& t, LevelCell v, unsigned depth) {
  if (t.dim(v) != 0) throw LevelError("lift_vertex needs a vertex");
  if (depth < v.level) throw LevelError("cannot lift to a coarser level");
  while (v.level < depth) {
    std::optional<LevelCell> next;
    for (std::uint32_t c : t.children(v))
      if (t.complex(v.level + 1).dim(CellId(c)) == 0) next = LevelCell{v.level + 1, c};
    if (!next) throw LevelError("vertex without a vertex child");
    v = *next;
  }
  return v;
}

/// All vertices of D_sample_level, addressed at `depth`.
inline std::vector<PointAddress> vertex_addresses(const CellTower& t, unsigned sample_level, unsigned depth) {
  std::vector<PointAddress> out;
  for (CellId v : t.complex(sample_level).vertices())
    out.push_back({depth, lift_vertex(t, {sample_level, v.value}, depth)});
  return out;
}

/// Address of f(x), one level coarser.
inline PointAddress image_address(const CellTower& t, const PointAddress& x) {
  if (x.depth == 0) throw LevelError("image of a depth-0 address");
  return {x.depth - 1, t.image(x.carrier)};
}

/// The open star of c, i.e. the flower of a vertex.
inline CellSet flower_at_level(const CellTower& t, LevelCell c) { return t.star(c); }

struct FlowerInvarianceReport {
  unsigned level = 0;
  std::size_t vertices_checked = 0;
  std::size_t image_failures = 0;      // f(F_m(p)) != F_{m-1}(f(p))
  std::size_t component_failures = 0;  // preimage components that are not flowers
  std::vector<std::string> failing;    // first few offending cells
  bool ok() const noexcept { return image_failures == 0 && component_failures == 0; }
};

/// Flowers map onto flowers, and level-m flowers are exactly the components of
/// preimages of level-(m-1) flowers.
FlowerInvarianceReport check_flower_invariance(const CellTower& t, unsigned m);

struct Neighborhoods {
  std::vector<LevelCell> u1;  // chambers meeting |G|
  std::vector<LevelCell> u2;  // chambers meeting |U1|
};

Neighborhoods neighborhoods_u1_u2(const CellTower& t, unsigned m, std::span<const LevelCell> g);

/// f^k(U1_{m+k}(G)) is contained in U1_m(f^k G).
bool check_neighborhood_forward_invariance(const CellTower& t, std::span<const LevelCell> g, unsigned k);

struct JoiningReport {
  unsigned level = 0;
  std::optional<unsigned> value;  // empty when above the cap
  bool exceeded_cap = false;
  std::optional<double> lower_bound;
  std::vector<LevelCell> witness;
};

/// Minimal number of level-m cells in a connected set joining opposite sides of D0.
JoiningReport joining_number(const CellTower& t, unsigned m, unsigned cap = 4096);

/// Whether |A| (cells of one level) joins opposite sides of D0, by definition.
bool joins_opposite_sides_of_base(const CellTower& t, std::span<const LevelCell> a);

struct FfiReport {
  std::vector<unsigned> sup_chambers_at_vertex;  // indexed by level
  unsigned max = 0;
};

/// Largest number of chambers around a vertex at levels 0..max_m. The deepest
/// level is streamed from the one above it and never materialized.
FfiReport ffi_report(const CellTower& t, unsigned max_m);

struct ReachabilityReport {
  unsigned level = 0;
  bool onto = false;                  // f^m maps the level-m chambers onto D0's chambers
  std::optional<unsigned> proxy_k;    // extra iterates until every base chamber's image is everything
  std::vector<std::string> stuck;     // base chambers whose forward images never cover
};

ReachabilityReport image_reachability(const CellTower& t, unsigned m);

// ---------------------------------------------------------------------------

inline LevelIntersection intersects_at_level(const CellTower& t, LevelCell a, LevelCell b) {
  if (a.level != b.level) throw LevelError("cells from different levels");
  LevelIntersection out;
  const unsigned m = a.level;
  if (m <= 1) {
    auto cf = common_faces(t.complex(m), a.id(), b.id());
    out.intersects = cf.intersects;
    if (cf.intersects) out.witness = LevelCell{m, cf.faces.cells().front().value};
    return out;
  }
  auto pa = t.minimal_parent(a), qa = t.image(a);
  auto pb = t.minimal_parent(b), qb = t.image(b);
  const auto& k = t.complex(m - 1);
  auto cpa = k.closure(pa.id()), cpb = k.closure(pb.id());
  auto cqa = k.closure(qa.id()), cqb = k.closure(qb.id());
  std::vector<CellId> rs, ss;
  std::set_intersection(cpa.begin(), cpa.end(), cpb.begin(), cpb.end(), std::back_inserter(rs));
  std::set_intersection(cqa.begin(), cqa.end(), cqb.begin(), cqb.end(), std::back_inserter(ss));
  auto par = t.parent_table(m - 1);
  auto img = t.image_table(m - 1);
  for (CellId r : rs)
    for (CellId s : ss)
      if (par[s.value] == img[r.value]) {
        out.intersects = true;
        out.witness = t.pair({m - 1, r.value}, {m - 1, s.value});
        return out;
      }
  return out;
}

inline SeparationLevel separation_level(const CellTower& t, const PointAddress& x, const PointAddress& y) {
  if (x.depth != y.depth) throw LevelError("addresses of different depths");
  if (x.carrier.level != x.depth || y.carrier.level != y.depth)
    throw LevelError("address carrier level differs from its depth");
  const unsigned depth = x.depth;
  if (x.carrier == y.carrier) return {depth, true};
  unsigned best = 0;
  for (unsigned l = 0; l <= depth; ++l) {
    auto vx = chamber_union_vertices(t, carrier_at(t, x, l));
    auto vy = chamber_union_vertices(t, carrier_at(t, y, l));
    if (!detail::sorted_intersects(vx, vy)) break;  // the qualifying levels are downward closed
    best = l;
    if (l == depth) return {depth, true};
  }
  return {best, false};
}

inline SeparationTable::SeparationTable(const CellTower& t, std::span<const PointAddress> pts) {
  if (!pts.empty()) depth_ = pts.front().depth;
  carriers_.reserve(pts.size());
  verts_.reserve(pts.size());
  for (const auto& p : pts) {
    if (p.depth != depth_ || p.carrier.level != depth_) throw LevelError("addresses of different depths");
    carriers_.push_back(p.carrier.index);
    std::vector<std::vector<std::uint32_t>> per(depth_ + 1);
    LevelCell c = p.carrier;
    for (int l = static_cast<int>(depth_); l >= 0; --l) {
      per[static_cast<std::size_t>(l)] = chamber_union_vertices(t, c);
      if (l > 0) c = t.minimal_parent(c);
    }
    verts_.push_back(std::move(per));
  }
}

inline SeparationLevel SeparationTable::level(std::size_t i, std::size_t j) const {
  if (carriers_[i] == carriers_[j]) return {depth_, true};
  const auto& a = verts_[i];
  const auto& b = verts_[j];
  // Binary search on the downward-closed set of qualifying levels.
  int lo = -1, hi = static_cast<int>(depth_) + 1;  // lo qualifies (or -1), hi does not
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (detail::sorted_intersects(a[static_cast<std::size_t>(mid)], b[static_cast<std::size_t>(mid)]))
      lo = mid;
    else
      hi = mid;
  }
  if (lo == static_cast<int>(depth_)) return {depth_, true};
  return {static_cast<unsigned>(std::max(lo, 0)), false};
}

inline FlowerInvarianceReport check_flower_invariance(const CellTower& t, unsigned m) {
  if (m == 0) throw LevelError("flower invariance starts at level 1");
  FlowerInvarianceReport rep;
  rep.level = m;
  const auto& km = t.complex(m);
  const auto& kp = t.complex(m - 1);
  auto img = t.image_table(m);
  auto note = [&](const std::string& s) {
    if (rep.failing.size() < 8) rep.failing.push_back(s);
  };
  for (CellId v : km.vertices()) {
    ++rep.vertices_checked;
    std::vector<CellId> mapped;
    for (CellId s : km.star(v)) mapped.push_back(CellId(img[s.value]));
    mapped = detail::sorted_unique(std::move(mapped));
    auto target = kp.star(CellId(img[v.value]));
    if (!std::equal(mapped.begin(), mapped.end(), target.begin(), target.end())) {
      ++rep.image_failures;
      note(t.name({m, v.value}));
    }
  }
  // Preimages of flowers, split into components along the face relation.
  detail::Csr<std::uint32_t> fwd;
  for (std::size_t i = 0; i < km.size(); ++i) {
    fwd.push_value(img[i]);
    fwd.end_row();
  }
  auto inv = fwd.transpose(kp.size());
  std::vector<std::uint32_t> uf(km.size());
  std::vector<std::uint32_t> stamp(km.size(), std::numeric_limits<std::uint32_t>::max());
  auto find = [&](std::uint32_t x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  for (CellId q : kp.vertices()) {
    std::vector<std::uint32_t> pre;
    for (CellId s : kp.star(q))
      for (std::uint32_t c : inv.row(s.value)) pre.push_back(c);
    std::sort(pre.begin(), pre.end());
    for (std::uint32_t c : pre) {
      uf[c] = c;
      stamp[c] = q.value;
    }
    for (std::uint32_t c : pre)
      for (CellId f : km.faces(CellId(c)))
        if (stamp[f.value] == q.value) uf[find(c)] = find(f.value);
    std::map<std::uint32_t, std::vector<CellId>> comps;
    for (std::uint32_t c : pre) comps[find(c)].push_back(CellId(c));
    for (auto& [root, cells] : comps) {
      std::vector<CellId> verts;
      for (CellId c : cells)
        if (km.dim(c) == 0) verts.push_back(c);
      bool ok = verts.size() == 1;
      if (ok) {
        auto st = km.star(verts.front());
        ok = std::equal(cells.begin(), cells.end(), st.begin(), st.end());
      }
      if (!ok) {
        ++rep.component_failures;
        note(t.name({m, cells.front().value}));
      }
    }
  }
  return rep;
}

namespace detail {

inline std::vector<LevelCell> chambers_meeting(const CellTower& t, unsigned m, std::span<const LevelCell> g) {
  const auto& k = t.complex(m);
  std::vector<CellId> verts;
  for (const auto& c : g) {
    if (c.level != m) throw LevelError("neighborhood cells from different levels");
    auto v = k.vertices_of(c.id());
    verts.insert(verts.end(), v.begin(), v.end());
  }
  verts = sorted_unique(std::move(verts));
  std::vector<CellId> ch;
  for (CellId v : verts)
    for (CellId s : k.cofaces(v))
      if (k.dim(s) == k.dim_top()) ch.push_back(s);
  if (k.dim_top() == 0) ch = verts;
  ch = sorted_unique(std::move(ch));
  std::vector<LevelCell> out;
  for (CellId c : ch) out.push_back({m, c.value});
  return out;
}

}  // namespace detail

inline Neighborhoods neighborhoods_u1_u2(const CellTower& t, unsigned m, std::span<const LevelCell> g) {
  Neighborhoods n;
  n.u1 = detail::chambers_meeting(t, m, g);
  n.u2 = detail::chambers_meeting(t, m, n.u1);
  return n;
}

inline bool check_neighborhood_forward_invariance(const CellTower& t, std::span<const LevelCell> g, unsigned k) {
  if (g.empty()) return true;
  const unsigned top = g.front().level;
  if (k > top) throw LevelError("too many iterates for the level");
  auto u1 = detail::chambers_meeting(t, top, g);
  std::vector<LevelCell> fg;
  for (const auto& c : g) fg.push_back(t.iterate_image(c, k));
  auto target = detail::chambers_meeting(t, top - k, fg);
  for (const auto& c : u1)
    if (!std::binary_search(target.begin(), target.end(), t.iterate_image(c, k))) return false;
  return true;
}

inline bool joins_opposite_sides_of_base(const CellTower& t, std::span<const LevelCell> a) {
  if (a.empty()) return false;
  const auto& d0 = t.complex(0);
  // Base cells whose interior contains a point of |A|.
  std::vector<CellId> touched;
  for (const auto& c : a) {
    const auto& k = t.complex(c.level);
    auto cl = k.closure(c.id());
    for (CellId f : cl) touched.push_back(t.ancestor({c.level, f.value}, 0).id());
  }
  touched = detail::sorted_unique(std::move(touched));
  std::vector<CellId> met;
  for (CellId b : touched)
    for (CellId s : d0.star(b)) met.push_back(s);
  met = detail::sorted_unique(std::move(met));
  std::vector<CellId> common(d0.vertices().begin(), d0.vertices().end());
  for (CellId c : met) {
    auto vc = d0.vertices_of(c);
    std::vector<CellId> next;
    std::set_intersection(common.begin(), common.end(), vc.begin(), vc.end(), std::back_inserter(next));
    common.swap(next);
  }
  return common.empty();
}

inline JoiningReport joining_number(const CellTower& t, unsigned m, unsigned cap) {
  // A connected set of cells joins opposite sides iff it is not inside one base
  // flower, i.e. iff for every base vertex v some member reaches outside F(v).
  // Replacing cells by chambers containing them preserves both properties, so
  // the minimum is a node-weighted group Steiner tree over the chamber graph,
  // solved exactly by dynamic programming over subsets of base vertices.
  JoiningReport rep;
  rep.level = m;
  const auto& d0 = t.complex(0);
  const auto& k = t.complex(m);
  const std::size_t nv = d0.vertices().size();
  if (nv > 20) throw RuleError("joining number search supports at most 20 base vertices");
  std::vector<std::uint32_t> vpos(d0.size(), 0);
  for (std::size_t i = 0; i < nv; ++i) vpos[d0.vertices()[i].value] = static_cast<std::uint32_t>(i);

  auto ch = k.chambers();
  const std::size_t n = ch.size();
  std::vector<std::int64_t> pos(k.size(), -1);
  for (std::size_t i = 0; i < n; ++i) pos[ch[i].value] = static_cast<std::int64_t>(i);
  // hit[a]: base vertices v whose flower does not contain chamber a.
  std::vector<std::uint32_t> hit(n, 0);
  std::vector<std::uint32_t> anc0(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) anc0[i] = t.ancestor({m, static_cast<std::uint32_t>(i)}, 0).index;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t inside = (nv >= 32) ? ~0u : ((1u << nv) - 1);
    auto visit = [&](CellId f) {
      std::uint32_t mask = 0;
      for (CellId v : d0.vertices_of(CellId(anc0[f.value]))) mask |= 1u << vpos[v.value];
      inside &= mask;  // f's base cell lies in star(v) iff v is one of its vertices
    };
    visit(ch[i]);
    for (CellId f : k.faces(ch[i])) visit(f);
    hit[i] = ~inside & ((1u << nv) - 1);
  }
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> nb;
    for (CellId v : k.vertices_of(ch[i]))
      for (CellId s : k.cofaces(v))
        if (pos[s.value] >= 0 && static_cast<std::size_t>(pos[s.value]) != i)
          nb.push_back(static_cast<std::uint32_t>(pos[s.value]));
    nb = [&] {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
      return nb;
    }();
    adj[i] = std::move(nb);
  }
  const std::uint32_t full = (1u << nv) - 1;
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 4;
  // choice: 0 = base, 1 = split (arg = submask), 2 = neighbour (arg = node)
  struct Choice {
    std::uint8_t kind = 0;
    std::uint32_t arg = 0;
  };
  std::vector<std::vector<std::uint32_t>> dp(full + 1, std::vector<std::uint32_t>(n, kInf));
  std::vector<std::vector<Choice>> how(full + 1, std::vector<Choice>(n));
  for (std::uint32_t s = 1; s <= full; ++s) {
    auto& d = dp[s];
    for (std::size_t v = 0; v < n; ++v)
      if ((s & ~hit[v]) == 0) d[v] = 1;
    for (std::uint32_t a = (s - 1) & s; a > 0; a = (a - 1) & s) {
      std::uint32_t b = s ^ a;
      if (a < b) continue;
      for (std::size_t v = 0; v < n; ++v) {
        std::uint32_t c = dp[a][v] + dp[b][v] - 1;
        if (c < d[v]) {
          d[v] = c;
          how[s][v] = {1, a};
        }
      }
    }
    // Unit-weight relaxation with a bucket queue.
    std::uint32_t maxd = 0;
    for (auto x : d)
      if (x < kInf) maxd = std::max(maxd, x);
    std::vector<std::vector<std::uint32_t>> buckets(maxd + n + 2);
    for (std::size_t v = 0; v < n; ++v)
      if (d[v] < kInf) buckets[d[v]].push_back(static_cast<std::uint32_t>(v));
    for (std::size_t b = 0; b < buckets.size(); ++b)
      for (std::size_t i = 0; i < buckets[b].size(); ++i) {
        std::uint32_t v = buckets[b][i];
        if (d[v] != b) continue;
        for (std::uint32_t u : adj[v])
          if (d[v] + 1 < d[u]) {
            d[u] = d[v] + 1;
            how[s][u] = {2, v};
            if (d[u] < buckets.size()) buckets[d[u]].push_back(u);
          }
      }
  }
  std::uint32_t best = kInf;
  std::size_t root = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (dp[full][v] < best) {
      best = dp[full][v];
      root = v;
    }
  if (best >= kInf || best > cap) {
    rep.exceeded_cap = true;
    return rep;
  }
  rep.value = best;
  std::vector<std::uint32_t> nodes;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{full, root}};
  while (!stack.empty()) {
    auto [s, v] = stack.back();
    stack.pop_back();
    const Choice c = how[s][v];
    nodes.push_back(static_cast<std::uint32_t>(v));
    if (c.kind == 1) {
      stack.push_back({c.arg, v});
      stack.push_back({s ^ c.arg, v});
    } else if (c.kind == 2) {
      stack.push_back({s, c.arg});
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (std::uint32_t v : nodes) rep.witness.push_back({m, ch[v].value});
  return rep;
}

inline FfiReport ffi_report(const CellTower& t, unsigned max_m) {
  FfiReport rep;
  for (unsigned m = 0; m <= max_m; ++m) {
    unsigned best = 0;
    if (m <= 1) {
      const auto& k = t.complex(m);
      for (CellId v : k.vertices()) best = std::max(best, vertex_chamber_count(k, v));
    } else {
      const auto& k1 = t.complex(m - 1);
      auto par = t.parent_table(m - 1);
      auto img = t.image_table(m - 1);
      const int top = k1.dim_top();
      detail::Csr<std::uint32_t> chstar;
      for (std::size_t c = 0; c < k1.size(); ++c) {
        if (k1.dim(CellId(c)) == top) chstar.push_value(static_cast<std::uint32_t>(c));
        for (CellId s : k1.cofaces(CellId(c)))
          if (k1.dim(s) == top) chstar.push_value(s.value);
        chstar.end_row();
      }
      for (std::size_t r = 0; r < k1.size(); ++r) {
        for (std::uint32_t s : t.children(LevelCell{m - 2, img[r]})) {
          if (k1.dim(CellId(s)) != 0) continue;
          unsigned cnt = 0;
          for (std::uint32_t x : chstar.row(r))
            for (std::uint32_t y : chstar.row(s))
              if (par[y] == img[x]) ++cnt;
          best = std::max(best, cnt);
        }
      }
    }
    rep.sup_chambers_at_vertex.push_back(best);
    rep.max = std::max(rep.max, best);
  }
  return rep;
}

inline ReachabilityReport image_reachability(const CellTower& t, unsigned m) {
  ReachabilityReport rep;
  rep.level = m;
  const auto& rule = t.rule();
  const auto& d0 = rule.base;
  std::vector<CellId> hit;
  for (auto c : chambers_at_level(t, m)) hit.push_back(t.iterate_image(c, m).id());
  hit = detail::sorted_unique(std::move(hit));
  rep.onto = std::equal(hit.begin(), hit.end(), d0.chambers().begin(), d0.chambers().end());
  // Forward images of single base chambers, one iterate at a time.
  std::vector<CellId> all(d0.chambers().begin(), d0.chambers().end());
  unsigned worst = 0;
  bool defined = true;
  for (CellId y : d0.chambers()) {
    std::vector<CellId> cur{y};
    unsigned j = 0;
    std::vector<std::vector<CellId>> seen{cur};
    while (cur != all) {
      std::vector<CellId> next;
      for (CellId c1 : rule.refined.chambers())
        if (std::binary_search(cur.begin(), cur.end(), rule.parent[c1.value])) next.push_back(rule.image[c1.value]);
      next = detail::sorted_unique(std::move(next));
      ++j;
      if (std::find(seen.begin(), seen.end(), next) != seen.end()) {
        defined = false;
        rep.stuck.push_back(d0.name(y));
        break;
      }
      seen.push_back(next);
      cur = std::move(next);
    }
    if (cur == all) worst = std::max(worst, j);
  }
  if (defined) rep.proxy_k = worst;
  return rep;
}

}  // namespace cellseq

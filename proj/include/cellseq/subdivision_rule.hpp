#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cellseq/cell_complex.hpp"

namespace cellseq {

/// A cellular map f: (M, D1) -> (M, D0) with D1 refining D0.
///
/// `parent[c]` is the smallest cell of D0 containing the cell c of D1 and
/// `image[c]` the cell of D0 onto which f carries c.
struct SubdivisionRule {
  CellComplex base;     // D0
  CellComplex refined;  // D1
  std::vector<CellId> parent;
  std::vector<CellId> image;

  CellId parent_of(CellId c) const { return parent[refined.checked(c)]; }
  CellId image_of(CellId c) const { return image[refined.checked(c)]; }
};

/// Checks both complexes, cellularity of f, the cell-wise homeomorphism
/// proxy and that D1 refines D0.
ValidationReport validate_rule(const SubdivisionRule& rule);

/// Largest number of refined cells around `c` that land in one base cell
/// around f(c).
unsigned local_multiplicity(const SubdivisionRule& rule, CellId refined_cell);

/// Number of chambers around a vertex.
unsigned vertex_chamber_count(const CellComplex& k, CellId vertex);

struct MultiplicityRow {
  CellId vertex;            // vertex of D1
  unsigned multiplicity;    // i(x)
  unsigned refined_count;   // N(D1, x)
  unsigned base_count;      // N(D0, f(x))
};

struct MultiplicityTable {
  std::vector<unsigned> multiplicity;  // per refined cell
  std::vector<MultiplicityRow> vertices;
  bool inequality_holds = true;        // i <= N(D1,x) <= N(D0,f x) * i at every vertex
};

MultiplicityTable multiplicity_table(const SubdivisionRule& rule);

/// Common number of refined chambers mapped onto each base chamber.
/// Throws RuleError when that number is not constant.
unsigned degree(const SubdivisionRule& rule);

/// Refined cells of multiplicity at least two. Throws NotFaceClosed if the
/// result is not a subcomplex.
CellSet branch_complex(const SubdivisionRule& rule);

/// Base cells met by the image of the refined subdivision of `c`.
std::vector<CellId> forward_image(const SubdivisionRule& rule, CellId base_cell);

struct CpcfReport {
  CellSet branch;               // refined cells with i >= 2
  CellSet postcritical;         // P, a subcomplex of D0
  CellSet postcritical_refined; // refined cells whose parent lies in P
  unsigned iterations = 0;      // forward-closure rounds until stable
  bool branch_face_closed = true;
  bool forward_invariant = true;
  bool restriction_cellular = true;
  std::vector<unsigned> branch_multiplicities;
};

/// Postcritical cell set, its refinement and the consistency checks around them.
CpcfReport cpcf_data(const SubdivisionRule& rule);

// ---------------------------------------------------------------------------

inline unsigned vertex_chamber_count(const CellComplex& k, CellId vertex) {
  if (k.dim(vertex) != 0) throw UnknownCell("'" + k.name(vertex) + "' is not a vertex");
  unsigned n = 0;
  for (CellId s : k.cofaces(vertex))
    if (k.dim(s) == k.dim_top()) ++n;
  if (k.dim_top() == 0) n = 1;
  return n;
}

inline ValidationReport validate_rule(const SubdivisionRule& rule) {
  ValidationReport rep;
  const auto& d0 = rule.base;
  const auto& d1 = rule.refined;
  rep.append(validate_complex(d0), "base:");
  rep.append(validate_complex(d1), "refined:");
  if (d0.dim_top() != d1.dim_top())
    rep.add("dimension", "base and refined complexes have different dimension", {});
  if (rule.parent.size() != d1.size() || rule.image.size() != d1.size()) {
    rep.add("maps", "parent and image must be defined on every refined cell", {});
    return rep;
  }
  for (std::size_t i = 0; i < d1.size(); ++i) {
    if (rule.parent[i].value >= d0.size() || rule.image[i].value >= d0.size()) {
      rep.add("maps", "parent or image outside the base complex", {d1.name(CellId(i))});
      return rep;
    }
  }
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const CellId c(i);
    const CellId fc = rule.image[i];
    const CellId pc = rule.parent[i];
    const std::string cn = d1.name(c);
    if (d0.dim(fc) != d1.dim(c)) {
      rep.add("image-dimension",
              "image '" + d0.name(fc) + "' has dimension " + std::to_string(d0.dim(fc)) +
                  ", cell has " + std::to_string(d1.dim(c)),
              {cn});
      continue;
    }
    // f restricted to the closed cell must be a cellular bijection onto the closed image cell.
    auto cl = d1.closure(c);
    auto target = d0.closure(fc);
    std::vector<CellId> imgs;
    bool bad = false;
    for (CellId g : cl) {
      CellId fg = rule.image[g.value];
      if (!target.contains(fg)) {
        rep.add("image-faces", "face '" + d1.name(g) + "' is not mapped into the closure of the image",
                {cn, d1.name(g)});
        bad = true;
        break;
      }
      imgs.push_back(fg);
    }
    if (!bad) {
      auto sorted = detail::sorted_unique(imgs);
      if (sorted.size() != cl.size() || sorted.size() != target.size()) {
        rep.add("image-homeomorphism", "closure is not mapped bijectively onto the closed image", {cn});
      } else {
        auto cells = cl.cells();
        for (std::size_t a = 0; a < cells.size() && !bad; ++a)
          for (std::size_t b = 0; b < cells.size(); ++b) {
            bool src = d1.contains(cells[a], cells[b]);
            bool dst = d0.contains(rule.image[cells[a].value], rule.image[cells[b].value]);
            if (src != dst) {
              rep.add("image-homeomorphism", "face order is not preserved", {cn});
              bad = true;
              break;
            }
          }
      }
    }
    if (d0.dim(pc) < d1.dim(c))
      rep.add("parent-dimension", "parent '" + d0.name(pc) + "' has smaller dimension", {cn});
    for (CellId g : d1.faces(c))
      if (!d0.contains(pc, rule.parent[g.value])) {
        rep.add("parent-faces",
                "face '" + d1.name(g) + "' has parent '" + d0.name(rule.parent[g.value]) +
                    "' outside the closure of parent '" + d0.name(pc) + "'",
                {cn, d1.name(g)});
        break;
      }
  }
  // Refinement: the children of each base cell tile it.
  std::vector<std::vector<CellId>> kids(d0.size());
  for (std::size_t i = 0; i < d1.size(); ++i) kids[rule.parent[i].value].push_back(CellId(i));
  for (std::size_t p = 0; p < d0.size(); ++p) {
    const CellId pc(p);
    const int dp = d0.dim(pc);
    const auto& ks = kids[p];
    if (ks.empty()) {
      rep.add("refinement", "base cell has no refined cells", {d0.name(pc)});
      continue;
    }
    int top = -1;
    std::vector<CellId> tops;
    for (CellId k : ks) {
      top = std::max(top, d1.dim(k));
      if (d1.dim(k) == dp) tops.push_back(k);
    }
    if (top != dp) {
      rep.add("refinement", "refined cells inside the base cell have the wrong top dimension",
              {d0.name(pc)});
      continue;
    }
    if (dp == 0) {
      if (ks.size() != 1) rep.add("refinement", "vertex is split into several cells", {d0.name(pc)});
      continue;
    }
    for (CellId k : ks) {
      if (d1.dim(k) != dp - 1) continue;
      int cnt = 0;
      for (CellId t : tops)
        if (d1.contains(t, k)) ++cnt;
      if (cnt != 2)
        rep.add("refinement-pairing",
                "interior facet bounds " + std::to_string(cnt) + " refined cells of its parent instead of 2",
                {d1.name(k), d0.name(pc)});
    }
    std::vector<CellId> boundary;
    for (CellId t : tops)
      for (CellId g : d1.faces(t))
        if (d1.dim(g) == dp - 1 && rule.parent[g.value] != pc) boundary.push_back(g);
    boundary = detail::sorted_unique(std::move(boundary));
    for (CellId g : boundary) {
      int cnt = 0;
      for (CellId t : tops)
        if (d1.contains(t, g)) ++cnt;
      if (cnt != 1)
        rep.add("refinement-pairing",
                "boundary facet bounds " + std::to_string(cnt) + " refined cells of its parent instead of 1",
                {d1.name(g), d0.name(pc)});
    }
  }
  return rep;
}

inline unsigned local_multiplicity(const SubdivisionRule& rule, CellId c) {
  const auto& d0 = rule.base;
  const auto& d1 = rule.refined;
  const CellId fc = rule.image_of(c);
  std::map<CellId, unsigned> hits;
  for (CellId s : d1.star(c)) ++hits[rule.image[s.value]];
  unsigned best = 0;
  for (CellId t : d0.star(fc)) {
    auto it = hits.find(t);
    if (it != hits.end()) best = std::max(best, it->second);
  }
  return best;
}

inline MultiplicityTable multiplicity_table(const SubdivisionRule& rule) {
  MultiplicityTable t;
  const auto& d1 = rule.refined;
  t.multiplicity.resize(d1.size());
  for (std::size_t i = 0; i < d1.size(); ++i) t.multiplicity[i] = local_multiplicity(rule, CellId(i));
  for (CellId v : d1.vertices()) {
    MultiplicityRow row{v, t.multiplicity[v.value], vertex_chamber_count(d1, v),
                        vertex_chamber_count(rule.base, rule.image[v.value])};
    if (!(row.multiplicity <= row.refined_count && row.refined_count <= row.base_count * row.multiplicity))
      t.inequality_holds = false;
    t.vertices.push_back(row);
  }
  return t;
}

inline unsigned degree(const SubdivisionRule& rule) {
  std::vector<unsigned> count(rule.base.size(), 0);
  for (CellId c : rule.refined.chambers()) ++count[rule.image[c.value].value];
  std::optional<unsigned> d;
  for (CellId y : rule.base.chambers()) {
    if (d && *d != count[y.value])
      throw RuleError("degree is not constant: chamber '" + rule.base.name(y) + "' has " +
                      std::to_string(count[y.value]) + " preimages, others " + std::to_string(*d));
    d = count[y.value];
  }
  return d.value_or(0);
}

inline CellSet branch_complex(const SubdivisionRule& rule) {
  const auto& d1 = rule.refined;
  std::vector<CellId> b;
  for (std::size_t i = 0; i < d1.size(); ++i)
    if (local_multiplicity(rule, CellId(i)) >= 2) b.push_back(CellId(i));
  CellSet s(d1, b);
  for (CellId c : s)
    for (CellId f : d1.faces(c))
      if (!s.contains(f))
        throw NotFaceClosed("branch set is not face-closed: '" + d1.name(f) + "' missing below '" +
                            d1.name(c) + "'");
  return s;
}

inline std::vector<CellId> forward_image(const SubdivisionRule& rule, CellId base_cell) {
  std::vector<CellId> out;
  for (std::size_t i = 0; i < rule.refined.size(); ++i)
    if (rule.base.contains(base_cell, rule.parent[i])) out.push_back(rule.image[i]);
  return detail::sorted_unique(std::move(out));
}

inline CpcfReport cpcf_data(const SubdivisionRule& rule) {
  CpcfReport r;
  const auto& d0 = rule.base;
  const auto& d1 = rule.refined;
  std::vector<CellId> branch;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    unsigned m = local_multiplicity(rule, CellId(i));
    if (m >= 2) {
      branch.push_back(CellId(i));
      r.branch_multiplicities.push_back(m);
    }
  }
  r.branch = CellSet(d1, branch);
  for (CellId c : r.branch)
    for (CellId f : d1.faces(c))
      if (!r.branch.contains(f)) r.branch_face_closed = false;

  std::vector<CellId> p;
  for (CellId c : branch) p.push_back(rule.image[c.value]);
  p = detail::sorted_unique(std::move(p));
  for (;;) {
    ++r.iterations;
    std::vector<CellId> next = p;
    for (CellId c : p) {
      auto img = forward_image(rule, c);
      next.insert(next.end(), img.begin(), img.end());
      for (CellId f : d0.faces(c)) next.push_back(f);
    }
    next = detail::sorted_unique(std::move(next));
    if (next == p) break;
    p.swap(next);
  }
  r.postcritical = CellSet(d0, p);
  std::vector<CellId> p1;
  for (std::size_t i = 0; i < d1.size(); ++i)
    if (r.postcritical.contains(rule.parent[i])) p1.push_back(CellId(i));
  r.postcritical_refined = CellSet(d1, p1);
  for (CellId c : r.postcritical)
    for (CellId g : forward_image(rule, c))
      if (!r.postcritical.contains(g)) r.forward_invariant = false;
  for (CellId c : r.postcritical_refined)
    if (!r.postcritical.contains(rule.image[c.value])) r.restriction_cellular = false;
  for (CellId c : r.branch)
    if (!r.postcritical.contains(rule.image[c.value])) r.restriction_cellular = false;
  return r;
}

}  // namespace cellseq

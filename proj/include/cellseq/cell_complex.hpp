#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cellseq/detail/csr.hpp"
#include "cellseq/error.hpp"

namespace cellseq {

/// Index of a cell inside one CellComplex.
struct CellId {
  std::uint32_t value = 0;

  constexpr CellId() = default;
  constexpr explicit CellId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit operator std::size_t() const { return value; }
  friend constexpr auto operator<=>(CellId, CellId) = default;
};

class CellComplex;

/// Sorted duplicate-free set of cells of one complex.
class CellSet {
 public:
  CellSet() = default;
  CellSet(const CellComplex& complex, std::vector<CellId> cells);

  const CellComplex* complex() const noexcept { return complex_; }
  std::span<const CellId> cells() const noexcept { return cells_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  bool contains(CellId c) const { return std::binary_search(cells_.begin(), cells_.end(), c); }
  auto begin() const noexcept { return cells_.begin(); }
  auto end() const noexcept { return cells_.end(); }

  friend bool operator==(const CellSet& a, const CellSet& b) { return a.cells_ == b.cells_; }

 private:
  const CellComplex* complex_ = nullptr;
  std::vector<CellId> cells_;
};

/// A finite cell complex stored as its face poset.
///
/// Every cell keeps the full list of its proper faces (transitively closed)
/// and of its proper cofaces, both sorted by id.
class CellComplex {
 public:
  struct CellSpec {
    std::string name;
    int dim = 0;
    std::vector<std::string> faces;  // immediate faces suffice
  };

  CellComplex() = default;

  /// Assembles a complex from named cells. Throws ComplexError on duplicate or
  /// unknown names, on cycles, and on faces whose dimension is not smaller.
  static CellComplex from_specs(int dim_top, const std::vector<CellSpec>& specs);

  /// Assembles a complex from dimensions and proper-face lists that are already
  /// transitively closed and sorted. Names are optional.
  static CellComplex from_closed_faces(int dim_top, std::vector<std::uint8_t> dims,
                                       detail::Csr<CellId> faces,
                                       std::vector<std::string> names = {});

  int dim_top() const noexcept { return dim_top_; }
  std::size_t size() const noexcept { return dims_.size(); }
  bool has_names() const noexcept { return !names_.empty(); }

  int dim(CellId c) const { return dims_[checked(c)]; }
  std::span<const CellId> faces(CellId c) const { return faces_.row(checked(c)); }
  std::span<const CellId> cofaces(CellId c) const { return cofaces_.row(checked(c)); }
  std::span<const CellId> cells_of_dim(int k) const {
    if (k < 0 || k >= static_cast<int>(by_dim_.size())) return {};
    return by_dim_[static_cast<std::size_t>(k)];
  }
  std::span<const CellId> chambers() const { return cells_of_dim(dim_top_); }
  std::span<const CellId> vertices() const { return cells_of_dim(0); }

  std::string name(CellId c) const {
    checked(c);
    return names_.empty() ? "c" + std::to_string(c.value) : names_[c.value];
  }
  std::optional<CellId> find(std::string_view name) const;
  CellId at(std::string_view name) const {
    if (auto c = find(name)) return *c;
    throw UnknownCell("unknown cell '" + std::string(name) + "'");
  }

  /// True if `inner` is `outer` or one of its faces.
  bool contains(CellId outer, CellId inner) const {
    if (outer == inner) return true;
    auto f = faces(outer);
    return std::binary_search(f.begin(), f.end(), inner);
  }

  /// Faces that are maximal among the proper faces of `c`.
  std::vector<CellId> immediate_faces(CellId c) const;

  /// Vertices of the closure of `c`, sorted.
  std::vector<CellId> vertices_of(CellId c) const;

  CellSet closure(CellId c) const;
  CellSet star(CellId c) const;

  long euler_characteristic() const {
    long chi = 0;
    for (std::uint8_t d : dims_) chi += (d % 2 == 0) ? 1 : -1;
    return chi;
  }

  std::size_t checked(CellId c) const {
    if (c.value >= dims_.size())
      throw UnknownCell("cell index " + std::to_string(c.value) + " out of range");
    return c.value;
  }

 private:
  void finish();

  int dim_top_ = 0;
  std::vector<std::uint8_t> dims_;
  detail::Csr<CellId> faces_;
  detail::Csr<CellId> cofaces_;
  std::vector<std::vector<CellId>> by_dim_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// One failed check. `cells` names the offending cells.
struct Violation {
  std::string check;
  std::string message;
  std::vector<std::string> cells;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  void add(std::string check, std::string message, std::vector<std::string> cells) {
    violations.push_back({std::move(check), std::move(message), std::move(cells)});
  }
  bool names(std::string_view cell) const {
    for (const auto& v : violations)
      for (const auto& c : v.cells)
        if (c == cell) return true;
    return false;
  }
  void append(const ValidationReport& other, const std::string& prefix) {
    for (auto v : other.violations) {
      v.check = prefix + v.check;
      violations.push_back(std::move(v));
    }
  }
};

struct ValidateOptions {
  bool chamber_coverage = true;  // every cell lies in a top-dimensional cell
  bool pseudo_manifold = true;   // every codimension-one cell bounds exactly two chambers
};

/// Checks the poset axioms, boundary regularity of every cell and, optionally,
/// chamber coverage and the closed pseudo-manifold condition.
ValidationReport validate_complex(const CellComplex& k, const ValidateOptions& opts = {});

struct CommonFaces {
  CellSet faces;  // maximal common faces
  bool intersects = false;
};

/// Maximal cells of cl(a) ∩ cl(b).
CommonFaces common_faces(const CellComplex& k, CellId a, CellId b);

/// Whether the closed cells share a point.
bool intersects(const CellComplex& k, CellId a, CellId b);

/// Whether the cells meeting |A| have empty common intersection. The empty set
/// joins nothing.
bool joins_opposite_sides(const CellComplex& k, std::span<const CellId> a);

enum class GraphKind { Chambers, AllCells };

/// Intersection graph. Nodes are listed in id order; edges as node positions (i < j).
struct Graph {
  std::vector<CellId> nodes;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

Graph adjacency_graph(const CellComplex& k, GraphKind kind);

/// Graphviz rendering of a graph, nodes labelled by cell names.
std::string to_dot(const CellComplex& k, const Graph& g, std::string_view graph_name = "adjacency");

/// Subcomplex spanned by a face-closed set. Throws NotFaceClosed otherwise.
CellComplex restriction(const CellComplex& k, std::span<const CellId> cells);

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<CellId> sorted_unique(std::vector<CellId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <class A, class B>
bool sorted_intersects(const A& a, const B& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j)
      ++i;
    else if (*j < *i)
      ++j;
    else
      return true;
  }
  return false;
}

}  // namespace detail

inline CellSet::CellSet(const CellComplex& complex, std::vector<CellId> cells)
    : complex_(&complex), cells_(detail::sorted_unique(std::move(cells))) {
  for (CellId c : cells_) complex.checked(c);
}

inline std::optional<CellId> CellComplex::find(std::string_view name) const {
  if (names_.empty()) {
    if (name.size() > 1 && name[0] == 'c') {
      std::size_t v = 0;
      for (char ch : name.substr(1)) {
        if (ch < '0' || ch > '9') return std::nullopt;
        v = v * 10 + static_cast<std::size_t>(ch - '0');
        if (v >= dims_.size()) return std::nullopt;
      }
      return CellId(v);
    }
    return std::nullopt;
  }
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return CellId(it->second);
}

inline CellComplex CellComplex::from_specs(int dim_top, const std::vector<CellSpec>& specs) {
  CellComplex k;
  k.dim_top_ = dim_top;
  const std::size_t n = specs.size();
  k.names_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = specs[i];
    if (s.dim < 0 || s.dim > dim_top)
      throw ComplexError("cell '" + s.name + "' has dimension " + std::to_string(s.dim) +
                         " outside [0," + std::to_string(dim_top) + "]");
    if (!k.index_.emplace(s.name, static_cast<std::uint32_t>(i)).second)
      throw ComplexError("duplicate cell name '" + s.name + "'");
    k.names_.push_back(s.name);
    k.dims_.push_back(static_cast<std::uint8_t>(s.dim));
  }
  std::vector<std::vector<std::uint32_t>> imm(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& f : specs[i].faces) {
      auto it = k.index_.find(f);
      if (it == k.index_.end())
        throw ComplexError("cell '" + specs[i].name + "' lists unknown face '" + f + "'");
      imm[i].push_back(it->second);
    }
  }
  // Cycle detection by iterative depth-first search.
  std::vector<std::uint8_t> color(n, 0);
  for (std::size_t root = 0; root < n; ++root) {
    if (color[root]) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{static_cast<std::uint32_t>(root), 0}};
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, pos] = stack.back();
      if (pos < imm[v].size()) {
        std::uint32_t w = imm[v][pos++];
        if (color[w] == 1)
          throw ComplexError("face relation has a cycle through '" + specs[w].name + "'");
        if (color[w] == 0) {
          color[w] = 1;
          stack.push_back({w, 0});
        }
      } else {
        color[v] = 2;
        stack.pop_back();
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint32_t f : imm[i])
      if (k.dims_[f] >= k.dims_[i])
        throw ComplexError("face '" + specs[f].name + "' of '" + specs[i].name +
                           "' does not have smaller dimension");
  // Transitive closure in order of increasing dimension.
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return k.dims_[a] < k.dims_[b]; });
  std::vector<std::vector<CellId>> closed(n);
  for (std::uint32_t i : order) {
    std::vector<CellId> acc;
    for (std::uint32_t f : imm[i]) {
      acc.push_back(CellId(f));
      acc.insert(acc.end(), closed[f].begin(), closed[f].end());
    }
    closed[i] = detail::sorted_unique(std::move(acc));
  }
  for (std::size_t i = 0; i < n; ++i) k.faces_.push_row(closed[i]);
  k.finish();
  return k;
}

inline CellComplex CellComplex::from_closed_faces(int dim_top, std::vector<std::uint8_t> dims,
                                                  detail::Csr<CellId> faces,
                                                  std::vector<std::string> names) {
  CellComplex k;
  k.dim_top_ = dim_top;
  k.dims_ = std::move(dims);
  k.faces_ = std::move(faces);
  if (k.faces_.rows() != k.dims_.size())
    throw ComplexError("face table size does not match the number of cells");
  if (!names.empty()) {
    if (names.size() != k.dims_.size()) throw ComplexError("name table size mismatch");
    k.names_ = std::move(names);
    for (std::size_t i = 0; i < k.names_.size(); ++i)
      if (!k.index_.emplace(k.names_[i], static_cast<std::uint32_t>(i)).second)
        throw ComplexError("duplicate cell name '" + k.names_[i] + "'");
  }
  k.finish();
  return k;
}

inline void CellComplex::finish() {
  cofaces_ = faces_.transpose(dims_.size());
  by_dim_.assign(static_cast<std::size_t>(dim_top_) + 1, {});
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] > dim_top_) throw ComplexError("cell dimension exceeds dim_top");
    by_dim_[dims_[i]].push_back(CellId(i));
  }
}

inline std::vector<CellId> CellComplex::immediate_faces(CellId c) const {
  std::vector<CellId> out;
  auto f = faces(c);
  for (CellId a : f) {
    bool maximal = true;
    for (CellId b : f)
      if (b != a && contains(b, a)) {
        maximal = false;
        break;
      }
    if (maximal) out.push_back(a);
  }
  return out;
}

inline std::vector<CellId> CellComplex::vertices_of(CellId c) const {
  std::vector<CellId> out;
  if (dim(c) == 0) out.push_back(c);
  for (CellId f : faces(c))
    if (dims_[f.value] == 0) out.push_back(f);
  std::sort(out.begin(), out.end());
  return out;
}

inline CellSet CellComplex::closure(CellId c) const {
  std::vector<CellId> v(faces(c).begin(), faces(c).end());
  v.push_back(c);
  return CellSet(*this, std::move(v));
}

inline CellSet CellComplex::star(CellId c) const {
  std::vector<CellId> v(cofaces(c).begin(), cofaces(c).end());
  v.push_back(c);
  return CellSet(*this, std::move(v));
}

inline ValidationReport validate_complex(const CellComplex& k, const ValidateOptions& opts) {
  ValidationReport rep;
  const std::size_t n = k.size();
  if (n == 0) {
    rep.add("nonempty", "complex has no cells", {});
    return rep;
  }
  for (std::size_t i = 0; i < n; ++i) {
    CellId c(i);
    auto f = k.faces(c);
    const int d = k.dim(c);
    if (std::binary_search(f.begin(), f.end(), c))
      rep.add("irreflexive", "cell is listed among its own faces", {k.name(c)});
    std::vector<int> seen(static_cast<std::size_t>(d) + 1, 0);
    for (CellId g : f) {
      if (k.dim(g) >= d) {
        rep.add("dimension", "face '" + k.name(g) + "' does not have smaller dimension",
                {k.name(c), k.name(g)});
        continue;
      }
      ++seen[static_cast<std::size_t>(k.dim(g))];
      for (CellId h : k.faces(g))
        if (!std::binary_search(f.begin(), f.end(), h)) {
          rep.add("transitivity", "face of face '" + k.name(g) + "' missing", {k.name(c), k.name(h)});
          break;
        }
    }
    for (int j = 0; j < d; ++j)
      if (seen[static_cast<std::size_t>(j)] == 0)
        rep.add("face-dimensions", "no face of dimension " + std::to_string(j), {k.name(c)});
    // Boundary regularity: in the boundary of a d-cell every (d-2)-face lies in
    // exactly two (d-1)-faces, and an edge has exactly two vertices.
    if (d >= 1) {
      std::vector<CellId> facets, ridges;
      for (CellId g : f) {
        if (k.dim(g) == d - 1) facets.push_back(g);
        if (k.dim(g) == d - 2) ridges.push_back(g);
      }
      if (d == 1) {
        if (facets.size() != 2)
          rep.add("boundary", "edge has " + std::to_string(facets.size()) + " vertices", {k.name(c)});
      } else {
        for (CellId r : ridges) {
          int cnt = 0;
          for (CellId h : facets)
            if (k.contains(h, r)) ++cnt;
          if (cnt != 2) {
            rep.add("boundary",
                    "face '" + k.name(r) + "' lies in " + std::to_string(cnt) +
                        " facets of the cell instead of 2",
                    {k.name(c), k.name(r)});
            break;
          }
        }
      }
    }
    if (opts.chamber_coverage && d < k.dim_top()) {
      bool covered = false;
      for (CellId g : k.cofaces(c))
        if (k.dim(g) == k.dim_top()) {
          covered = true;
          break;
        }
      if (!covered) rep.add("chamber-coverage", "cell lies in no chamber", {k.name(c)});
    }
    if (opts.pseudo_manifold && d == k.dim_top() - 1) {
      int cnt = 0;
      for (CellId g : k.cofaces(c))
        if (k.dim(g) == k.dim_top()) ++cnt;
      if (cnt != 2)
        rep.add("pseudo-manifold", "facet bounds " + std::to_string(cnt) + " chambers instead of 2",
                {k.name(c)});
    }
  }
  return rep;
}

inline CommonFaces common_faces(const CellComplex& k, CellId a, CellId b) {
  auto ca = k.closure(a);
  auto cb = k.closure(b);
  std::vector<CellId> both;
  std::set_intersection(ca.begin(), ca.end(), cb.begin(), cb.end(), std::back_inserter(both));
  std::vector<CellId> maximal;
  for (CellId x : both) {
    bool top = true;
    for (CellId y : both)
      if (y != x && k.contains(y, x)) {
        top = false;
        break;
      }
    if (top) maximal.push_back(x);
  }
  CommonFaces out;
  out.intersects = !both.empty();
  out.faces = CellSet(k, std::move(maximal));
  return out;
}

inline bool intersects(const CellComplex& k, CellId a, CellId b) {
  if (a == b) return true;
  return detail::sorted_intersects(k.vertices_of(a), k.vertices_of(b));
}

inline bool joins_opposite_sides(const CellComplex& k, std::span<const CellId> a) {
  if (a.empty()) return false;
  // Two closed cells meet iff they share a vertex, so everything reduces to vertices.
  std::vector<CellId> va;
  for (CellId c : a) {
    auto v = k.vertices_of(c);
    va.insert(va.end(), v.begin(), v.end());
  }
  va = detail::sorted_unique(std::move(va));
  std::vector<CellId> met;
  for (CellId v : va) {
    met.push_back(v);
    for (CellId s : k.cofaces(v)) met.push_back(s);
  }
  met = detail::sorted_unique(std::move(met));
  std::vector<CellId> common(k.vertices().begin(), k.vertices().end());
  for (CellId c : met) {
    auto vc = k.vertices_of(c);
    std::vector<CellId> next;
    std::set_intersection(common.begin(), common.end(), vc.begin(), vc.end(), std::back_inserter(next));
    common.swap(next);
    if (common.empty()) return true;
  }
  return common.empty();
}

inline Graph adjacency_graph(const CellComplex& k, GraphKind kind) {
  Graph g;
  if (kind == GraphKind::Chambers) {
    g.nodes.assign(k.chambers().begin(), k.chambers().end());
  } else {
    for (std::size_t i = 0; i < k.size(); ++i) g.nodes.push_back(CellId(i));
  }
  std::vector<std::int64_t> pos(k.size(), -1);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) pos[g.nodes[i].value] = static_cast<std::int64_t>(i);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    std::vector<std::uint32_t> nb;
    for (CellId v : k.vertices_of(g.nodes[i])) {
      if (pos[v.value] >= 0) nb.push_back(static_cast<std::uint32_t>(pos[v.value]));
      for (CellId s : k.cofaces(v))
        if (pos[s.value] >= 0) nb.push_back(static_cast<std::uint32_t>(pos[s.value]));
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (std::uint32_t j : nb)
      if (j > i) g.edges.emplace_back(static_cast<std::uint32_t>(i), j);
  }
  return g;
}

inline std::string to_dot(const CellComplex& k, const Graph& g, std::string_view graph_name) {
  std::ostringstream os;
  os << "graph " << graph_name << " {\n";
  for (CellId c : g.nodes) os << "  \"" << k.name(c) << "\";\n";
  for (auto [i, j] : g.edges)
    os << "  \"" << k.name(g.nodes[i]) << "\" -- \"" << k.name(g.nodes[j]) << "\";\n";
  os << "}\n";
  return os.str();
}

inline CellComplex restriction(const CellComplex& k, std::span<const CellId> cells) {
  std::vector<CellId> s = detail::sorted_unique({cells.begin(), cells.end()});
  if (s.empty()) throw NotFaceClosed("restriction to the empty set");
  std::vector<std::int64_t> pos(k.size(), -1);
  for (std::size_t i = 0; i < s.size(); ++i) pos[k.checked(s[i])] = static_cast<std::int64_t>(i);
  int top = 0;
  std::vector<std::uint8_t> dims;
  std::vector<std::string> names;
  detail::Csr<CellId> faces;
  for (CellId c : s) {
    std::vector<CellId> row;
    for (CellId f : k.faces(c)) {
      if (pos[f.value] < 0)
        throw NotFaceClosed("face '" + k.name(f) + "' of '" + k.name(c) + "' is not in the set");
      row.push_back(CellId(static_cast<std::size_t>(pos[f.value])));
    }
    std::sort(row.begin(), row.end());
    faces.push_row(row);
    dims.push_back(static_cast<std::uint8_t>(k.dim(c)));
    names.push_back(k.name(c));
    top = std::max(top, k.dim(c));
  }
  return CellComplex::from_closed_faces(top, std::move(dims), std::move(faces), std::move(names));
}

}  // namespace cellseq

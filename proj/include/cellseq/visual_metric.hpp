#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <thread>
#include <vector>

#include "cellseq/level_cells.hpp"

namespace cellseq {

struct VisualMetricConfig {
  double lambda = 2.0;
  double eps = 1.0;
  unsigned depth = 6;         // address depth M
  unsigned sample_level = 4;  // vertices of this level are the sample points
  unsigned jobs = 1;
  bool verify_triangle = true;  // cubic in the sample size
};

/// Lambda^{-m(x,y)}, and 0 for x == y. Throws TruncatedPair for distinct points
/// whose separation level reaches the address depth.
inline double quasi_distance(const CellTower& t, const PointAddress& x, const PointAddress& y, double lambda) {
  if (!(lambda > 1.0)) throw Error("lambda must exceed 1");
  if (x == y) return 0.0;
  auto s = separation_level(t, x, y);
  if (s.truncated)
    throw TruncatedPair("separation level of " + t.name(x.carrier) + " and " + t.name(y.carrier) +
                        " reaches the depth " + std::to_string(x.depth));
  return std::pow(lambda, -static_cast<double>(s.value));
}

namespace detail {

inline constexpr std::size_t kFwBlock = 64;

// c = min(c, a (+) b) on one block, where a or b may alias c.
template <class T>
void fw_block_alias(T* c, const T* a, const T* b, std::size_t n) {
  for (std::size_t k = 0; k < kFwBlock; ++k)
    for (std::size_t i = 0; i < kFwBlock; ++i) {
      const T aik = a[i * n + k];
      T* ci = c + i * n;
      const T* bk = b + k * n;
      for (std::size_t j = 0; j < kFwBlock; ++j) {
        const T v = static_cast<T>(aik + bk[j]);
        ci[j] = v < ci[j] ? v : ci[j];
      }
    }
}

template <class T>
void fw_block(T* __restrict c, const T* __restrict a, const T* __restrict b, std::size_t n) {
  for (std::size_t i = 0; i < kFwBlock; ++i) {
    T acc[kFwBlock];
    T* ci = c + i * n;
    for (std::size_t j = 0; j < kFwBlock; ++j) acc[j] = ci[j];
    for (std::size_t k = 0; k < kFwBlock; ++k) {
      const T aik = a[i * n + k];
      const T* bk = b + k * n;
      for (std::size_t j = 0; j < kFwBlock; ++j) {
        const T v = static_cast<T>(aik + bk[j]);
        acc[j] = v < acc[j] ? v : acc[j];
      }
    }
    for (std::size_t j = 0; j < kFwBlock; ++j) ci[j] = acc[j];
  }
}

// Blocked Floyd-Warshall; n must be a multiple of the block size.
template <class T>
void blocked_floyd_warshall(std::vector<T>& d, std::size_t n, unsigned jobs) {
  const std::size_t nb = n / kFwBlock;
  auto blk = [&](std::size_t bi, std::size_t bj) { return d.data() + bi * kFwBlock * n + bj * kFwBlock; };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(nb, 1));
  for (std::size_t kb = 0; kb < nb; ++kb) {
    fw_block_alias(blk(kb, kb), blk(kb, kb), blk(kb, kb), n);
    for (std::size_t j = 0; j < nb; ++j)
      if (j != kb) fw_block_alias(blk(kb, j), blk(kb, kb), blk(kb, j), n);
    for (std::size_t i = 0; i < nb; ++i)
      if (i != kb) fw_block_alias(blk(i, kb), blk(i, kb), blk(kb, kb), n);
    auto rows = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        if (i == kb) continue;
        for (std::size_t j = 0; j < nb; ++j)
          if (j != kb) fw_block(blk(i, j), blk(i, kb), blk(kb, j), n);
      }
    };
    if (workers == 1) {
      rows(0, nb);
      continue;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(rows, nb * w / workers, nb * (w + 1) / workers);
  }
}

template <class T>
void padded_floyd_warshall(std::vector<T>& d, std::size_t n, unsigned jobs, T pad) {
  const std::size_t np = (n + kFwBlock - 1) / kFwBlock * kFwBlock;
  if (np == n) {
    blocked_floyd_warshall(d, n, jobs);
    return;
  }
  std::vector<T> p(np * np, pad);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(d.data() + i * n, n, p.data() + i * np);
  blocked_floyd_warshall(p, np, jobs);
  for (std::size_t i = 0; i < n; ++i) std::copy_n(p.data() + i * np, n, d.data() + i * n);
}

}  // namespace detail

/// In-place Floyd-Warshall on an n x n row-major matrix of nonnegative weights.
/// Blocks of rows are split across `jobs` threads; the result does not depend
/// on the split.
inline void all_pairs_shortest_paths(std::vector<double>& d, std::size_t n, unsigned jobs = 1) {
  detail::padded_floyd_warshall(d, n, jobs, std::numeric_limits<double>::infinity());
}

/// Integer variant for weights at most 0x7fff, so that no sum overflows.
inline void all_pairs_shortest_paths(std::vector<std::uint16_t>& d, std::size_t n, unsigned jobs = 1) {
  for (auto x : d)
    if (x > 0x7fff) throw Error("integer shortest paths need weights below 2^15");
  detail::padded_floyd_warshall<std::uint16_t>(d, n, jobs, 0x7fff);
}

struct VisualMetricReport {
  VisualMetricConfig config;
  std::size_t points = 0;
  std::vector<double> weight;  // q^eps, row-major
  std::vector<double> rho;     // chain metric, row-major
  std::vector<std::uint8_t> separation;  // m(x,y); the depth where truncated
  std::size_t truncated_pairs = 0;
  double c_meas = 0;                 // max over untruncated pairs of max(rho/q^eps, q^eps/rho)
  bool symmetric = true;
  bool positive = true;
  bool rho_below_q = true;           // rho <= q^eps
  bool exact = false;                // dyadic weights, integer shortest paths
  double triangle_violation = 0;     // max of rho(x,z) - rho(x,y) - rho(y,z)
  bool metric() const noexcept { return symmetric && positive && triangle_violation <= 1e-9; }
  double at(std::size_t i, std::size_t j) const { return rho[i * points + j]; }
};

/// Chain metric of q^eps on the sample: the least sum of q^eps over chains.
/// Truncated pairs get the depth as separation level, which only shortens q.
inline VisualMetricReport chain_metric(const CellTower& t, std::span<const PointAddress> pts,
                                       const VisualMetricConfig& cfg) {
  if (!(cfg.lambda > 1.0)) throw Error("lambda must exceed 1");
  if (!(cfg.eps > 0.0)) throw Error("eps must be positive");
  VisualMetricReport rep;
  rep.config = cfg;
  const std::size_t n = pts.size();
  rep.points = n;
  SeparationTable sep(t, pts);
  rep.weight.assign(n * n, 0.0);
  rep.separation.assign(n * n, 0);
  std::vector<double> powers(cfg.depth + 1);
  for (unsigned m = 0; m <= cfg.depth; ++m) powers[m] = std::pow(cfg.lambda, -cfg.eps * static_cast<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      auto s = sep.level(i, j);
      if (s.truncated) ++rep.truncated_pairs;
      rep.separation[i * n + j] = rep.separation[j * n + i] = static_cast<std::uint8_t>(s.value);
      rep.weight[i * n + j] = rep.weight[j * n + i] = powers[s.value];
    }
  // When Lambda^eps = 2^s with s a positive integer, every weight is a dyadic
  // 2^{s(M-m)} / 2^{sM} and shortest paths are computed exactly in integers.
  const double s_exp = std::log2(std::pow(cfg.lambda, cfg.eps));
  const long s_int = std::lround(s_exp);
  rep.exact = s_int >= 1 && std::abs(s_exp - static_cast<double>(s_int)) < 1e-12 &&
              s_int * static_cast<long>(cfg.depth) <= 14;
  if (rep.exact) {
    const unsigned top = static_cast<unsigned>(s_int) * cfg.depth;
    std::vector<std::uint16_t> w(n * n, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) w[i * n + j] = static_cast<std::uint16_t>(1u << (top - static_cast<unsigned>(s_int) * rep.separation[i * n + j]));
    all_pairs_shortest_paths(w, n, cfg.jobs);
    const double unit = std::ldexp(1.0, -static_cast<int>(top));
    rep.rho.resize(n * n);
    for (std::size_t i = 0; i < n * n; ++i) rep.rho[i] = w[i] * unit;
    for (unsigned m = 0; m <= cfg.depth; ++m) powers[m] = std::ldexp(1.0, -static_cast<int>(s_int * m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) rep.weight[i * n + j] = powers[rep.separation[i * n + j]];
  } else {
    rep.rho = rep.weight;
    all_pairs_shortest_paths(rep.rho, n, cfg.jobs);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = rep.rho[i * n + j], w = rep.weight[i * n + j];
      if (r != rep.rho[j * n + i]) rep.symmetric = false;
      if (i != j && !(r > 0)) rep.positive = false;
      if (r > w) rep.rho_below_q = false;
      if (i < j && rep.separation[i * n + j] < cfg.depth) rep.c_meas = std::max({rep.c_meas, r / w, w / r});
    }
  // rho(i,k) <= rho(i,j) + rho(j,k) for all triples.
  for (std::size_t i = 0; i < (cfg.verify_triangle ? n : 0); ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double* rj = rep.rho.data() + j * n;
      const double* ri = rep.rho.data() + i * n;
      const double rij = ri[j];
      double worst = 0;
      for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, ri[k] - rij - rj[k]);
      rep.triangle_violation = std::max(rep.triangle_violation, worst);
    }
  return rep;
}

struct CellMetricRow {
  unsigned level = 0;
  std::size_t chambers = 0;
  std::size_t chambers_covered = 0;   // chambers holding at least two sample points
  double diam_max_scaled = 0;         // max diam_rho(X) * Lambda^(eps m)
  double diam_min_scaled = 0;
  double dist_min_scaled = 0;         // min over disjoint chambers of dist_rho * Lambda^(eps m)
  double c_prime = 0;
};

struct CellMetricReport {
  std::vector<CellMetricRow> rows;
  double c_prime = 0;  // one constant valid at every listed level
  bool covered = true;
};

/// Diameters of chambers and distances of disjoint chambers under rho, from the
/// sample points they contain, rescaled by Lambda^(eps m).
inline CellMetricReport cell_metric_report(const CellTower& t, std::span<const PointAddress> pts,
                                           const VisualMetricReport& vm, unsigned min_m, unsigned max_m) {
  CellMetricReport rep;
  const std::size_t n = pts.size();
  const double scale_base = std::pow(vm.config.lambda, vm.config.eps);
  for (unsigned m = min_m; m <= max_m; ++m) {
    CellMetricRow row;
    row.level = m;
    const auto& k = t.complex(m);
    row.chambers = k.chambers().size();
    std::vector<std::int64_t> chpos(k.size(), -1);
    for (std::size_t i = 0; i < k.chambers().size(); ++i) chpos[k.chambers()[i].value] = static_cast<std::int64_t>(i);
    // Chambers containing each point, and their intersection neighbourhoods.
    std::vector<std::vector<std::uint32_t>> in(n);
    std::vector<std::vector<std::size_t>> members(row.chambers);
    for (std::size_t p = 0; p < n; ++p) {
      LevelCell c = t.ancestor(pts[p].carrier, m);
      if (k.dim(c.id()) == k.dim_top()) in[p].push_back(static_cast<std::uint32_t>(chpos[c.index]));
      for (CellId s : k.cofaces(c.id()))
        if (k.dim(s) == k.dim_top()) in[p].push_back(static_cast<std::uint32_t>(chpos[s.value]));
      for (auto x : in[p]) members[x].push_back(p);
    }
    const double sc = std::pow(scale_base, static_cast<double>(m));
    row.diam_min_scaled = std::numeric_limits<double>::infinity();
    for (const auto& mem : members) {
      if (mem.size() < 2) continue;
      ++row.chambers_covered;
      double d = 0;
      for (std::size_t a = 0; a < mem.size(); ++a)
        for (std::size_t b = a + 1; b < mem.size(); ++b) d = std::max(d, vm.at(mem[a], mem[b]));
      row.diam_max_scaled = std::max(row.diam_max_scaled, d * sc);
      row.diam_min_scaled = std::min(row.diam_min_scaled, d * sc);
    }
    if (row.chambers_covered < row.chambers) rep.covered = false;
    // Disjoint chamber pairs: if m(x,y) < m no level-m chambers around x and y
    // meet; otherwise test the chamber pairs explicitly.
    std::vector<std::vector<std::uint32_t>> chverts(row.chambers);
    for (std::size_t i = 0; i < row.chambers; ++i) {
      for (CellId v : k.vertices_of(k.chambers()[i])) chverts[i].push_back(v.value);
    }
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const double r = vm.at(a, b);
        if (r * sc >= dmin) continue;
        bool disjoint_pair = vm.separation[a * n + b] < m;
        if (!disjoint_pair)
          for (auto x : in[a]) {
            for (auto y : in[b])
              if (!detail::sorted_intersects(chverts[x], chverts[y])) {
                disjoint_pair = true;
                break;
              }
            if (disjoint_pair) break;
          }
        if (disjoint_pair) dmin = r * sc;
      }
    row.dist_min_scaled = dmin;
    row.c_prime = std::max({row.diam_max_scaled, 1.0 / row.diam_min_scaled,
                            std::isinf(dmin) ? 0.0 : 1.0 / row.dist_min_scaled});
    rep.c_prime = std::max(rep.c_prime, row.c_prime);
    rep.rows.push_back(row);
  }
  return rep;
}

struct HyperbolicityReport {
  unsigned sample_level = 0;
  unsigned eval_depth = 0;
  std::size_t points = 0;
  std::size_t truncated_pairs = 0;
  int k0 = 0;  // max over triples of min(m(x,z), m(z,y)) - m(x,y)
  unsigned iteration_depth = 0;
  std::size_t iteration_pairs = 0;
  std::size_t iteration_failures = 0;  // pairs with m(fx, fy) < m(x, y) - 1
  bool iteration_ok() const noexcept { return iteration_failures == 0; }
};

/// Empirical Gromov constant k0 over all triples of level-`sample_level`
/// vertices (addressed at `eval_depth`), and the iteration inequality over all
/// pairs of those vertices addressed at depth `sample_level`.
inline HyperbolicityReport hyperbolicity_constants(const CellTower& t, unsigned sample_level, unsigned eval_depth) {
  if (eval_depth < sample_level) throw LevelError("evaluation depth below the sample level");
  HyperbolicityReport rep;
  rep.sample_level = sample_level;
  rep.eval_depth = eval_depth;
  {
    auto pts = vertex_addresses(t, sample_level, eval_depth);
    const std::size_t n = pts.size();
    rep.points = n;
    SeparationTable sep(t, pts);
    std::vector<std::uint8_t> mm(n * n, 255);  // the diagonal never constrains the maximum
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        auto s = sep.level(i, j);
        if (s.truncated) ++rep.truncated_pairs;
        mm[i * n + j] = mm[j * n + i] = static_cast<std::uint8_t>(s.value);
      }
    int k0 = 0;
    for (std::size_t x = 0; x < n; ++x) {
      const std::uint8_t* rx = mm.data() + x * n;
      for (std::size_t y = x + 1; y < n; ++y) {
        const std::uint8_t* ry = mm.data() + y * n;
        std::uint8_t best = 0;
        for (std::size_t z = 0; z < n; ++z) {
          const std::uint8_t v = rx[z] < ry[z] ? rx[z] : ry[z];
          best = v > best ? v : best;
        }
        k0 = std::max(k0, static_cast<int>(best) - static_cast<int>(rx[y]));
      }
    }
    rep.k0 = k0;
  }
  if (sample_level >= 1) {
    auto pts = vertex_addresses(t, sample_level, sample_level);
    std::vector<PointAddress> imgs;
    std::vector<std::size_t> where(pts.size());
    std::map<std::uint32_t, std::size_t> seen;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto fx = image_address(t, pts[i]);
      auto [it, fresh] = seen.emplace(fx.carrier.index, imgs.size());
      if (fresh) imgs.push_back(fx);
      where[i] = it->second;
    }
    SeparationTable sx(t, pts), sf(t, imgs);
    rep.iteration_depth = sample_level;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        ++rep.iteration_pairs;
        const auto a = sx.level(i, j);
        const auto b = (where[i] == where[j]) ? SeparationLevel{sample_level - 1, true} : sf.level(where[i], where[j]);
        if (static_cast<int>(b.value) < static_cast<int>(a.value) - 1 && !b.truncated) ++rep.iteration_failures;
      }
  }
  return rep;
}

}  // namespace cellseq

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "cellseq/level_cells.hpp"
#include "cellseq/realization.hpp"
#include "cellseq/visual_metric.hpp"

namespace cellseq {

// ---------------------------------------------------------------------------
// Quasi-visual constants

struct QvConfig {
  unsigned max_m = 5;
  unsigned max_k = 5;
  // (sample level, address depth) pairs for mu; one row each.
  std::vector<std::pair<unsigned, unsigned>> mu_samples = {{3, 5}, {4, 6}};
};

struct MuRow {
  unsigned sample_level = 0;
  unsigned depth = 0;
  std::size_t pairs = 0;
  std::size_t truncated = 0;
  double lo = 0;  // min of d(x,y) / diam Z
  double hi = 0;  // max of d(x,y) / diam Z
  double mu = 0;  // max(hi, 1/lo)
};

struct QvConstants {
  QvConfig config;
  std::vector<double> alpha;             // index k-1: min diam Z / diam W, Z at level m, W at m+k
  std::vector<double> beta;              // same, max
  std::vector<std::size_t> pairs;        // intersecting pairs inspected per k
  std::vector<std::optional<double>> lambda_by_level;  // empty where no two chambers are disjoint
  double lambda_sep = std::numeric_limits<double>::infinity();
  std::vector<MuRow> mu_rows;
  double mu = 0;
  bool alpha_increasing = true;
};

// ---------------------------------------------------------------------------
// BQS envelope

struct BqsConfig {
  unsigned min_m = 1;
  unsigned max_m = 6;
  std::vector<double> fractions = {0.25, 0.5, 1.0};  // portions of each polyline
  int points_per_leg = 4;
  std::size_t vertices_per_level = 48;  // random subset above this many
  std::uint64_t seed = 0;
};

/// A step function: value on [t_i, t_{i+1}) is eta_i; undefined below t_0.
struct StepFunction {
  std::vector<std::pair<double, double>> steps;

  std::optional<double> operator()(double t) const {
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](double x, const std::pair<double, double>& s) { return x < s.first; });
    if (it == steps.begin()) return std::nullopt;
    return std::prev(it)->second;
  }
};

/// Running maximum of the samples in order of t.
inline StepFunction running_max(std::vector<std::pair<double, double>> samples) {
  std::sort(samples.begin(), samples.end());
  StepFunction f;
  for (const auto& [t, r] : samples) {
    if (!f.steps.empty() && f.steps.back().first == t) {
      f.steps.back().second = std::max(f.steps.back().second, r);
      continue;
    }
    double v = f.steps.empty() ? r : std::max(r, f.steps.back().second);
    f.steps.emplace_back(t, v);
  }
  for (std::size_t i = 1; i < f.steps.size(); ++i)
    f.steps[i].second = std::max(f.steps[i].second, f.steps[i - 1].second);
  return f;
}

struct BqsLevel {
  unsigned level = 0;
  std::size_t vertices = 0;
  std::size_t pairs = 0;
  std::size_t rejected = 0;  // continua of diameter 0
  StepFunction envelope;
  double ratio_min = 0;  // min over steps of eta(t) / t
  double ratio_max = 0;
};

struct BqsEnvelope {
  BqsConfig config;
  std::vector<BqsLevel> levels;
  StepFunction envelope;  // over all levels
  double ratio_min = 0;
  double ratio_max = 0;
  double stability = 1;  // max over level pairs and shared t of eta_a(t) / eta_b(t)
};

// ---------------------------------------------------------------------------
// Approximations by flowers

struct Approximation {
  int level = -1;  // -1 when no level-0 flower contains the sample
  std::optional<LevelCell> vertex;
};

// ---------------------------------------------------------------------------
// CXC axioms

struct CxcConfig {
  unsigned max_m = 5;
  std::size_t vertices_per_level = 64;
  std::uint64_t seed = 0;
  unsigned reach_level = 1;
};

struct DegreeWindow {
  unsigned m = 0;
  unsigned k = 0;
  unsigned max = 0;
  bool integral = true;  // chamber counts divide evenly
};

struct CxcReport {
  CxcConfig config;
  std::vector<double> flower_mesh;  // largest flower diameter per level
  std::vector<double> flower_min;   // smallest flower diameter per level
  std::vector<double> ratio;        // flower_mesh[m+1] / flower_mesh[m]
  double rate = 1;                  // largest ratio over m >= 1
  bool expanding = false;
  std::vector<DegreeWindow> degree;
  unsigned deg_max = 0;
  double round_min = 0;             // outradius / inradius at the centre vertex
  double round_max = 0;
  double round_distortion = 1;      // max over windows of Round(f^k U) / Round(U) and inverse
  double diam_distortion = 1;       // max over windows of relative-diameter ratios
  double K = 1;
  double C = 1;
  double theta = 1;
  ReachabilityReport irreducibility;  // combinatorial proxy
};

// ---------------------------------------------------------------------------
// Quasisymmetry modulus of the identity

struct QsModulus {
  std::size_t points = 0;
  std::size_t triples = 0;
  StepFunction theta;       // theta(t) over sampled t
  double bilip_lo = 0;      // min of rho / d
  double bilip_hi = 0;      // max of rho / d
  double slope = 0;         // bilip_hi / bilip_lo
  bool monotone = true;
  bool affine_bounded = true;  // theta(t) <= slope * t on the sampled range
};

QvConstants qv_constants(const Geometry& g, const QvConfig& cfg = {});
BqsEnvelope bqs_envelope(const Geometry& g, const Marking& mk, const BqsConfig& cfg = {});
Approximation approximation_of(const Geometry& g, std::span<const Point> sample, unsigned max_level);
CxcReport cxc_report(const Geometry& g, const CxcConfig& cfg = {});
QsModulus qs_identity_modulus(const VisualMetricReport& vm, std::span<const Point> positions,
                              const QuotientSpace& space);

// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<LevelCell> level_vertices(const CellTower& t, unsigned m) {
  std::vector<LevelCell> out;
  for (CellId v : t.complex(m).vertices()) out.push_back({m, v.value});
  return out;
}

// All of `cells` when few enough, else a seeded subset kept in index order.
inline std::vector<LevelCell> subset(std::vector<LevelCell> cells, std::size_t cap, std::uint64_t seed) {
  if (cells.size() <= cap) return cells;
  std::mt19937_64 rng(seed);
  std::vector<LevelCell> out;
  std::sample(cells.begin(), cells.end(), std::back_inserter(out), cap, rng);
  return out;
}

inline unsigned chambers_at_vertex(const CellTower& t, LevelCell v) {
  return vertex_chamber_count(t.complex(v.level), v.id());
}

}  // namespace detail

inline QvConstants qv_constants(const Geometry& g, const QvConfig& cfg) {
  const auto& t = g.tower();
  QvConstants q;
  q.config = cfg;
  for (unsigned k = 1; k <= cfg.max_k; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    std::size_t n = 0;
    for (unsigned m = 0; m + k <= cfg.max_m; ++m) {
      const auto& kl = t.complex(m);
      const auto& kf = t.complex(m + k);
      for (CellId w : kf.chambers()) {
        // Level-m chambers meeting W: those around the level-m carriers of W's vertices.
        std::vector<CellId> zs;
        for (CellId v : kf.vertices_of(w)) {
          LevelCell a = t.ancestor({m + k, v.value}, m);
          if (kl.dim(a.id()) == kl.dim_top()) zs.push_back(a.id());
          for (CellId s : kl.cofaces(a.id()))
            if (kl.dim(s) == kl.dim_top()) zs.push_back(s);
        }
        zs = detail::sorted_unique(std::move(zs));
        const double dw = g.diam({m + k, w.value});
        for (CellId z : zs) {
          const double r = g.diam({m, z.value}) / dw;
          lo = std::min(lo, r);
          hi = std::max(hi, r);
          ++n;
        }
      }
    }
    q.alpha.push_back(lo);
    q.beta.push_back(hi);
    q.pairs.push_back(n);
  }
  for (std::size_t k = 1; k < q.alpha.size(); ++k)
    if (!(q.alpha[k] > q.alpha[k - 1])) q.alpha_increasing = false;

  for (unsigned m = 0; m <= cfg.max_m; ++m) {
    const auto& k = t.complex(m);
    const auto& ch = k.chambers();
    std::vector<std::vector<CellId>> verts;
    std::vector<double> diam;
    for (CellId c : ch) {
      verts.push_back(k.vertices_of(c));
      diam.push_back(g.diam({m, c.value}));
    }
    std::optional<double> best;
    for (std::size_t i = 0; i < ch.size(); ++i)
      for (std::size_t j = i + 1; j < ch.size(); ++j) {
        if (detail::sorted_intersects(verts[i], verts[j])) continue;
        const double r = g.dist({m, ch[i].value}, {m, ch[j].value}) / std::max(diam[i], diam[j]);
        if (!best || r < *best) best = r;
      }
    q.lambda_by_level.push_back(best);
    if (best) q.lambda_sep = std::min(q.lambda_sep, *best);
  }

  for (auto [level, depth] : cfg.mu_samples) {
    MuRow row;
    row.sample_level = level;
    row.depth = depth;
    row.lo = std::numeric_limits<double>::infinity();
    auto pts = vertex_addresses(t, level, depth);
    std::vector<Point> pos;
    for (const auto& p : pts) pos.push_back(g.vertex_point(p.carrier));
    SeparationTable sep(t, pts);
    std::map<std::pair<unsigned, std::uint32_t>, double> zdiam;
    auto carrier_diam = [&](std::size_t i, unsigned m) {
      LevelCell c = carrier_at(t, pts[i], m);
      auto key = std::make_pair(m, c.index);
      if (auto it = zdiam.find(key); it != zdiam.end()) return it->second;
      const auto& k = t.complex(m);
      double d = k.dim(c.id()) == k.dim_top() ? g.diam(c) : 0.0;
      for (CellId s : k.cofaces(c.id()))
        if (k.dim(s) == k.dim_top()) d = std::max(d, g.diam({m, s.value}));
      zdiam.emplace(key, d);
      return d;
    };
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        auto s = sep.level(i, j);
        if (s.truncated) {
          ++row.truncated;
          continue;
        }
        const double r = g.space().distance(pos[i], pos[j]) / carrier_diam(i, s.value);
        row.lo = std::min(row.lo, r);
        row.hi = std::max(row.hi, r);
        ++row.pairs;
      }
    row.mu = row.pairs ? std::max({row.hi, 1.0 / row.lo, 1.0}) : 1.0;
    q.mu = std::max(q.mu, row.mu);
    q.mu_rows.push_back(row);
  }
  return q;
}

namespace detail {

// Axis-by-axis path from a to b, cut at `fraction` of its length, sampled with
// `per_leg` intervals on each leg.
inline std::vector<Point> axis_polyline(const Point& a, const Point& b, int dim, double fraction, int per_leg) {
  double total = 0;
  for (int i = 0; i < dim; ++i) total += std::abs(b[i] - a[i]);
  double budget = fraction * total;
  std::vector<Point> out{a};
  Point cur = a;
  for (int i = 0; i < dim && budget > 0; ++i) {
    const double leg = std::abs(b[i] - a[i]);
    if (leg == 0) continue;
    const double len = std::min(leg, budget);
    const double dir = b[i] > a[i] ? 1.0 : -1.0;
    const double start = cur[i];
    for (int s = 1; s <= per_leg; ++s) {
      cur[i] = start + dir * len * s / per_leg;
      out.push_back(cur);
    }
    budget -= len;
  }
  return out;
}

inline double envelope_ratio_max(const StepFunction& f) {
  double r = 0;
  for (auto [t, e] : f.steps) r = std::max(r, e / t);
  return r;
}

inline double envelope_ratio_min(const StepFunction& f) {
  double r = std::numeric_limits<double>::infinity();
  for (auto [t, e] : f.steps) r = std::min(r, e / t);
  return r;
}

}  // namespace detail

inline BqsEnvelope bqs_envelope(const Geometry& g, const Marking& mk, const BqsConfig& cfg) {
  const auto& t = g.tower();
  if (cfg.min_m == 0 || cfg.min_m > cfg.max_m) throw Error("bqs levels must satisfy 1 <= min <= max");
  if (mk.points.size() <= cfg.max_m) throw Error("marking does not reach level " + std::to_string(cfg.max_m));
  BqsEnvelope env;
  env.config = cfg;
  std::vector<std::pair<double, double>> all;
  for (unsigned m = cfg.min_m; m <= cfg.max_m; ++m) {
    BqsLevel lv;
    lv.level = m;
    auto verts = detail::subset(detail::level_vertices(t, m), cfg.vertices_per_level, cfg.seed + m);
    lv.vertices = verts.size();
    std::vector<std::pair<double, double>> samples;
    for (LevelCell v : verts) {
      // Continua: partial axis paths from v towards the marking of each chamber of its flower.
      std::vector<double> d, fd;
      for (LevelCell x : g.flower_chambers(v)) {
        const Box& bx = g.box(x);
        auto p = g.space().place_point_into(g.vertex_point(v), bx);
        if (!p) throw RealizationError("vertex outside the chart of its chamber");
        auto c = g.space().place_point_into(mk.at(x), bx);
        if (!c) throw RealizationError("marking outside its chamber");
        for (double fr : cfg.fractions) {
          auto e = detail::axis_polyline(*p, *c, g.dim(), fr, cfg.points_per_leg);
          std::vector<Point> fe;
          for (const auto& y : e) fe.push_back(g.forward_iterate(x, y, m));
          const double de = g.set_diameter(e), dfe = g.set_diameter(fe);
          if (de == 0 || dfe == 0) {
            ++lv.rejected;
            continue;
          }
          d.push_back(de);
          fd.push_back(dfe);
        }
      }
      for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d.size(); ++j) samples.emplace_back(d[i] / d[j], fd[i] / fd[j]);
    }
    lv.pairs = samples.size();
    all.insert(all.end(), samples.begin(), samples.end());
    lv.envelope = running_max(std::move(samples));
    lv.ratio_min = detail::envelope_ratio_min(lv.envelope);
    lv.ratio_max = detail::envelope_ratio_max(lv.envelope);
    env.levels.push_back(std::move(lv));
  }
  env.envelope = running_max(std::move(all));
  env.ratio_min = std::numeric_limits<double>::infinity();
  for (const auto& lv : env.levels) {
    env.ratio_min = std::min(env.ratio_min, lv.ratio_min);
    env.ratio_max = std::max(env.ratio_max, lv.ratio_max);
  }
  for (const auto& a : env.levels)
    for (const auto& b : env.levels) {
      if (&a == &b) continue;
      for (auto [x, e] : a.envelope.steps)
        if (auto eb = b.envelope(x)) env.stability = std::max(env.stability, e / *eb);
    }
  return env;
}

inline Approximation approximation_of(const Geometry& g, std::span<const Point> sample, unsigned max_level) {
  if (sample.empty()) throw Error("empty continuum sample");
  if (g.set_diameter(sample) == 0) throw Error("degenerate continuum sample (a single point)");
  const auto& t = g.tower();
  std::vector<PointAddress> addr;
  for (const auto& p : sample) addr.push_back(g.snap(p, max_level));
  Approximation out;
  for (unsigned l = 0; l <= max_level; ++l) {
    const auto& k = t.complex(l);
    // x lies in the open flower of v iff v is a vertex of the level-l carrier of x.
    std::vector<CellId> common;
    for (std::size_t i = 0; i < addr.size(); ++i) {
      auto vs = k.vertices_of(carrier_at(t, addr[i], l).id());
      if (i == 0) {
        common = std::move(vs);
        continue;
      }
      std::vector<CellId> next;
      std::set_intersection(common.begin(), common.end(), vs.begin(), vs.end(), std::back_inserter(next));
      common.swap(next);
      if (common.empty()) break;
    }
    if (common.empty()) break;
    out.level = static_cast<int>(l);
    out.vertex = LevelCell{l, common.front().value};
  }
  return out;
}

inline CxcReport cxc_report(const Geometry& g, const CxcConfig& cfg) {
  const auto& t = g.tower();
  CxcReport rep;
  rep.config = cfg;
  std::vector<std::vector<LevelCell>> sampled;
  for (unsigned m = 0; m <= cfg.max_m; ++m) {
    auto all = detail::level_vertices(t, m);
    double hi = 0, lo = std::numeric_limits<double>::infinity();
    for (LevelCell v : all) {
      const double d = g.flower_diameter(v);
      hi = std::max(hi, d);
      lo = std::min(lo, d);
    }
    rep.flower_mesh.push_back(hi);
    rep.flower_min.push_back(lo);
    sampled.push_back(detail::subset(std::move(all), cfg.vertices_per_level, cfg.seed + m));
  }
  for (unsigned m = 0; m < cfg.max_m; ++m) rep.ratio.push_back(rep.flower_mesh[m + 1] / rep.flower_mesh[m]);
  // Level 0 flowers may wrap around the whole space, so the rate starts at level 1.
  rep.rate = 0;
  for (unsigned m = 1; m < cfg.max_m; ++m) rep.rate = std::max(rep.rate, rep.ratio[m]);
  if (cfg.max_m < 2) rep.rate = rep.ratio.empty() ? 1.0 : rep.ratio[0];
  rep.expanding = rep.rate < 1.0 - 1e-9;
  rep.theta = rep.expanding ? rep.rate : 1.0;
  rep.C = 1;
  for (unsigned m = 0; m <= cfg.max_m; ++m) {
    const double s = std::pow(rep.theta, static_cast<double>(m));
    rep.C = std::max({rep.C, rep.flower_mesh[m] / s, s / rep.flower_min[m]});
  }

  for (unsigned k = 1; k <= cfg.max_m; ++k)
    for (unsigned m = 0; m + k <= cfg.max_m; ++m) {
      DegreeWindow w{m, k, 0, true};
      for (CellId v : t.complex(m + k).vertices()) {
        LevelCell up{m + k, v.value};
        const unsigned a = detail::chambers_at_vertex(t, up);
        const unsigned b = detail::chambers_at_vertex(t, t.iterate_image(up, k));
        if (a % b != 0) w.integral = false;
        w.max = std::max(w.max, a / b);
      }
      rep.deg_max = std::max(rep.deg_max, w.max);
      rep.degree.push_back(w);
    }

  std::map<LevelCell, double> round_cache;
  auto roundness = [&](LevelCell v) {
    if (auto it = round_cache.find(v); it != round_cache.end()) return it->second;
    const Point y = g.vertex_point(v);
    const double r = g.flower_outradius(v, y) / g.flower_inradius(v, y);
    round_cache.emplace(v, r);
    return r;
  };
  rep.round_min = std::numeric_limits<double>::infinity();
  for (const auto& level : sampled)
    for (LevelCell v : level) {
      const double r = roundness(v);
      rep.round_min = std::min(rep.round_min, r);
      rep.round_max = std::max(rep.round_max, r);
    }
  rep.K = rep.round_max;
  for (unsigned k = 1; k <= cfg.max_m; ++k)
    for (unsigned m = 0; m + k <= cfg.max_m; ++m)
      for (LevelCell w : sampled[m + k]) {
        LevelCell fw = t.iterate_image(w, k);
        const double a = roundness(w), b = roundness(fw);
        rep.round_distortion = std::max({rep.round_distortion, a / b, b / a});
        const double du = g.flower_diameter(w), dfu = g.flower_diameter(fw);
        for (LevelCell x : g.flower_chambers(w)) {
          const double rel = g.diam(x) / du;
          const double frel = g.diam(t.iterate_image(x, k)) / dfu;
          rep.diam_distortion = std::max({rep.diam_distortion, rel / frel, frel / rel});
        }
      }
  rep.irreducibility = image_reachability(t, cfg.reach_level);
  return rep;
}

inline QsModulus qs_identity_modulus(const VisualMetricReport& vm, std::span<const Point> positions,
                                     const QuotientSpace& space) {
  const std::size_t n = vm.points;
  if (positions.size() != n) throw Error("one position per sample point is required");
  QsModulus q;
  q.points = n;
  std::vector<double> d(n * n, 0.0);
  q.bilip_lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d[i * n + j] = space.distance(positions[i], positions[j]);
      if (d[i * n + j] == 0) throw Error("two sample points share a position");
      const double r = vm.at(i, j) / d[i * n + j];
      q.bilip_lo = std::min(q.bilip_lo, r);
      q.bilip_hi = std::max(q.bilip_hi, r);
    }
  if (n < 2) q.bilip_lo = q.bilip_hi = 1;
  q.slope = q.bilip_hi / q.bilip_lo;
  std::map<double, double> best;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t a = 0; a < n; ++a) {
      if (a == x) continue;
      for (std::size_t b = 0; b < n; ++b) {
        if (b == x || b == a) continue;
        const double tr = vm.at(x, a) / vm.at(x, b);
        const double s = d[x * n + a] / d[x * n + b];
        auto [it, fresh] = best.emplace(tr, s);
        if (!fresh) it->second = std::max(it->second, s);
        ++q.triples;
      }
    }
  q.theta = running_max({best.begin(), best.end()});
  for (std::size_t i = 1; i < q.theta.steps.size(); ++i)
    if (q.theta.steps[i].second < q.theta.steps[i - 1].second) q.monotone = false;
  for (auto [tr, s] : q.theta.steps)
    if (s > q.slope * tr * (1 + 1e-12)) q.affine_bounded = false;
  return q;
}

}  // namespace cellseq

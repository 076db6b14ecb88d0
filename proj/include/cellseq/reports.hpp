#pragma once

#include <sstream>
#include <string>

#include "cellseq/diagnostics.hpp"
#include "cellseq/io.hpp"

// JSON forms of every report. Key order is fixed by nlohmann's sorted objects,
// so equal reports always serialize to the same bytes.

namespace cellseq {

namespace detail {

inline json names_json(const CellSet& s) {
  json a = json::array();
  for (CellId c : s) a.push_back(s.complex()->name(c));
  return a;
}

inline json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json steps_json(const StepFunction& f) {
  json a = json::array();
  for (auto [t, v] : f.steps) a.push_back({t, v});
  return a;
}

}  // namespace detail

inline json to_json(const MultiplicityTable& t, const SubdivisionRule& rule) {
  json rows = json::array();
  for (const auto& r : t.vertices)
    rows.push_back({{"vertex", rule.refined.name(r.vertex)},
                    {"image", rule.base.name(rule.image[r.vertex.value])},
                    {"multiplicity", r.multiplicity},
                    {"refined_count", r.refined_count},
                    {"base_count", r.base_count}});
  unsigned max = 0;
  for (auto m : t.multiplicity) max = std::max(max, m);
  return {{"vertices", rows}, {"max", max}, {"inequality_holds", t.inequality_holds}};
}

inline json to_json(const CpcfReport& r) {
  return {{"branch", detail::names_json(r.branch)},
          {"branch_multiplicities", r.branch_multiplicities},
          {"postcritical", detail::names_json(r.postcritical)},
          {"postcritical_refined", detail::names_json(r.postcritical_refined)},
          {"iterations", r.iterations},
          {"branch_face_closed", r.branch_face_closed},
          {"forward_invariant", r.forward_invariant},
          {"restriction_cellular", r.restriction_cellular}};
}

inline json to_json(const FlowerInvarianceReport& r) {
  return {{"level", r.level},
          {"vertices_checked", r.vertices_checked},
          {"image_failures", r.image_failures},
          {"component_failures", r.component_failures},
          {"failing", r.failing},
          {"ok", r.ok()}};
}

inline json to_json(const CellTower& t, const JoiningReport& r) {
  json w = json::array();
  for (auto c : r.witness) w.push_back(t.name(c));
  return {{"level", r.level},
          {"value", r.value ? json(*r.value) : json(nullptr)},
          {"exceeded_cap", r.exceeded_cap},
          {"lower_bound", detail::optional_json(r.lower_bound)},
          {"witness", w}};
}

inline json to_json(const FfiReport& r) {
  return {{"sup_chambers_at_vertex", r.sup_chambers_at_vertex}, {"max", r.max}};
}

inline json to_json(const ReachabilityReport& r) {
  return {{"level", r.level},
          {"onto", r.onto},
          {"proxy", true},
          {"proxy_k", r.proxy_k ? json(*r.proxy_k) : json(nullptr)},
          {"stuck", r.stuck}};
}

inline json to_json(const ExpansionReport& r) {
  return {{"mesh", r.mesh}, {"ratio", r.ratio}, {"rate", r.rate}, {"expanding", r.expanding}};
}

inline json to_json(const LebesgueReport& r, int dim) {
  return {{"level", r.level}, {"value", r.value}, {"samples", r.samples}, {"worst", detail::point_to_json(r.worst, dim)}};
}

inline json to_json(const VisualMetricReport& r) {
  return {{"lambda", r.config.lambda},
          {"eps", r.config.eps},
          {"depth", r.config.depth},
          {"sample_level", r.config.sample_level},
          {"points", r.points},
          {"truncated_pairs", r.truncated_pairs},
          {"c_meas", r.c_meas},
          {"symmetric", r.symmetric},
          {"positive", r.positive},
          {"rho_below_q", r.rho_below_q},
          {"exact", r.exact},
          {"triangle_checked", r.config.verify_triangle},
          {"triangle_violation", r.triangle_violation},
          {"metric", r.metric()}};
}

inline json to_json(const CellMetricReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"level", x.level},
                    {"chambers", x.chambers},
                    {"chambers_covered", x.chambers_covered},
                    {"diam_max_scaled", x.diam_max_scaled},
                    {"diam_min_scaled", x.diam_min_scaled},
                    {"dist_min_scaled", x.dist_min_scaled},
                    {"c_prime", x.c_prime}});
  return {{"rows", rows}, {"c_prime", r.c_prime}, {"covered", r.covered}};
}

inline json to_json(const HyperbolicityReport& r) {
  return {{"sample_level", r.sample_level},
          {"eval_depth", r.eval_depth},
          {"points", r.points},
          {"truncated_pairs", r.truncated_pairs},
          {"k0", r.k0},
          {"iteration_depth", r.iteration_depth},
          {"iteration_pairs", r.iteration_pairs},
          {"iteration_failures", r.iteration_failures},
          {"iteration_ok", r.iteration_ok()}};
}

inline json to_json(const QvConstants& q) {
  json mu = json::array();
  for (const auto& r : q.mu_rows)
    mu.push_back({{"sample_level", r.sample_level},
                  {"depth", r.depth},
                  {"pairs", r.pairs},
                  {"truncated", r.truncated},
                  {"lo", r.lo},
                  {"hi", r.hi},
                  {"mu", r.mu}});
  json lam = json::array();
  for (const auto& l : q.lambda_by_level) lam.push_back(detail::optional_json(l));
  return {{"max_m", q.config.max_m},
          {"max_k", q.config.max_k},
          {"alpha", q.alpha},
          {"beta", q.beta},
          {"pairs", q.pairs},
          {"alpha_increasing", q.alpha_increasing},
          {"lambda_by_level", lam},
          {"lambda_sep", q.lambda_sep},
          {"mu_rows", mu},
          {"mu", q.mu}};
}

inline json to_json(const BqsEnvelope& b) {
  json levels = json::array();
  for (const auto& l : b.levels)
    levels.push_back({{"level", l.level},
                      {"vertices", l.vertices},
                      {"pairs", l.pairs},
                      {"rejected", l.rejected},
                      {"envelope", detail::steps_json(l.envelope)},
                      {"ratio_min", l.ratio_min},
                      {"ratio_max", l.ratio_max}});
  return {{"min_m", b.config.min_m},
          {"max_m", b.config.max_m},
          {"seed", b.config.seed},
          {"levels", levels},
          {"envelope", detail::steps_json(b.envelope)},
          {"ratio_min", b.ratio_min},
          {"ratio_max", b.ratio_max},
          {"stability", b.stability}};
}

inline json to_json(const CxcReport& r) {
  json deg = json::array();
  for (const auto& w : r.degree) deg.push_back({{"m", w.m}, {"k", w.k}, {"max", w.max}, {"integral", w.integral}});
  return {{"max_m", r.config.max_m},
          {"seed", r.config.seed},
          {"expans", {{"flower_mesh", r.flower_mesh}, {"flower_min", r.flower_min}, {"ratio", r.ratio},
                      {"rate", r.rate}, {"expanding", r.expanding}}},
          {"deg", {{"windows", deg}, {"max", r.deg_max}}},
          {"round", {{"min", r.round_min}, {"max", r.round_max}, {"distortion", r.round_distortion}}},
          {"diam", {{"distortion", r.diam_distortion}}},
          {"irred", to_json(r.irreducibility)},
          {"K", r.K},
          {"C", r.C},
          {"theta", r.theta}};
}

inline json to_json(const QsModulus& q) {
  return {{"points", q.points},
          {"triples", q.triples},
          {"theta", detail::steps_json(q.theta)},
          {"bilip_lo", q.bilip_lo},
          {"bilip_hi", q.bilip_hi},
          {"slope", q.slope},
          {"monotone", q.monotone},
          {"affine_bounded", q.affine_bounded}};
}

/// Scatter data: one line per unordered pair, q^eps against rho.
inline std::string visual_scatter_csv(const VisualMetricReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "i,j,separation,q_eps,rho\n";
  for (std::size_t i = 0; i < r.points; ++i)
    for (std::size_t j = i + 1; j < r.points; ++j)
      os << i << ',' << j << ',' << static_cast<unsigned>(r.separation[i * r.points + j]) << ','
         << r.weight[i * r.points + j] << ',' << r.rho[i * r.points + j] << '\n';
  return os.str();
}

inline std::string envelope_csv(const BqsEnvelope& b) {
  std::ostringstream os;
  os.precision(17);
  os << "level,t,eta\n";
  for (const auto& l : b.levels)
    for (auto [t, e] : l.envelope.steps) os << l.level << ',' << t << ',' << e << '\n';
  return os.str();
}

}  // namespace cellseq

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cellseq/reports.hpp"

namespace cellseq::cli {

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2 };

class UsageError : public Error {
 public:
  using Error::Error;
};

struct Loaded {
  std::string label;
  std::shared_ptr<const SubdivisionRule> rule;
  std::optional<Realization> realization;
};

/// A rule argument is a path to a rule file or the name of a built-in example.
inline Loaded load_argument(const std::string& arg, bool validate = true) {
  if (std::filesystem::exists(arg)) {
    auto r = load_rule(arg, validate);
    return {arg, r.rule, r.realization};
  }
  for (const auto& n : builtin_example_names())
    if (n == arg) {
      auto ex = builtin_example(arg);
      return {arg, ex.rule, ex.realization};
    }
  throw UsageError("'" + arg + "' is neither a rule file nor a built-in example");
}

inline unsigned default_jobs() {
  if (const char* s = std::getenv("CELLSEQ_JOBS")) {
    try {
      long v = std::stol(s);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(path + ": cannot write file");
  f << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline const Realization& need_realization(const Loaded& l) {
  if (!l.realization) throw UsageError(l.label + ": this command needs a realization");
  return *l.realization;
}

struct Options {
  std::string rule;
  std::string out;
  std::string csv;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  // iterate / export
  unsigned level = 3;
  std::string emit = "counts";
  std::string what = "rule";
  // visual / diagnose
  double lambda = 2.0;
  double eps = 1.0;
  unsigned depth = 6;
  std::optional<unsigned> sample_level;
  std::string sample = "vertices";
  unsigned cells_max = 0;
  bool hyperbolicity = false;
  std::string suite = "qv";
  unsigned max_level = 5;
  std::string example;
  std::string dump_path;
};

inline int cmd_validate(const Options& o, std::ostream& out) {
  auto l = load_argument(o.rule, false);
  auto rep = validate_rule(*l.rule);
  if (l.realization) rep.append(validate_realization(*l.rule, *l.realization), "");
  json j = validation_to_json(rep);
  j["rule"] = l.label;
  write_text(o.out, dump(j), out);
  return rep.ok() ? kOk : kFailed;
}

inline int cmd_iterate(const Options& o, std::ostream& out) {
  auto l = load_argument(o.rule);
  CellTower t(l.rule);
  if (o.emit == "counts") {
    json rows = json::array();
    for (unsigned m = 0; m <= o.level; ++m)
      rows.push_back({{"level", m}, {"chambers", t.count_chambers(m)}, {"cells", t.count_cells(m)}});
    write_text(o.out, dump({{"rule", l.label}, {"counts", rows}}), out);
  } else if (o.emit == "cells") {
    const auto& k = t.complex(o.level);
    json cells = json::array();
    for (std::size_t i = 0; i < k.size(); ++i) {
      LevelCell c{o.level, static_cast<std::uint32_t>(i)};
      json faces = json::array();
      for (CellId f : k.immediate_faces(c.id())) faces.push_back(t.name({o.level, f.value}));
      json e = {{"id", t.name(c)}, {"dim", k.dim(c.id())}, {"faces", faces}, {"address", t.address(c)}};
      if (o.level >= 1) {
        e["parent"] = t.name(t.minimal_parent(c));
        e["image"] = t.name(t.image(c));
      }
      cells.push_back(std::move(e));
    }
    write_text(o.out, dump({{"rule", l.label}, {"level", o.level}, {"cells", cells}}), out);
  } else if (o.emit == "adjacency") {
    const auto& k = t.complex(o.level);
    write_text(o.out, to_dot(k, adjacency_graph(k, GraphKind::Chambers), "level" + std::to_string(o.level)), out);
  } else {
    throw UsageError("--emit must be counts, cells or adjacency");
  }
  return kOk;
}

inline unsigned sample_level_of(const Options& o) {
  unsigned s = o.sample_level ? *o.sample_level : (o.depth >= 2 ? o.depth - 2 : 0);
  if (s > o.depth) throw UsageError("--sample-level must not exceed --depth");
  return s;
}

inline int cmd_visual(const Options& o, std::ostream& out) {
  if (o.sample != "vertices") throw UsageError("--sample supports only 'vertices'");
  auto l = load_argument(o.rule);
  CellTower t(l.rule);
  VisualMetricConfig cfg;
  cfg.lambda = o.lambda;
  cfg.eps = o.eps;
  cfg.depth = o.depth;
  cfg.sample_level = sample_level_of(o);
  cfg.jobs = o.jobs;
  auto pts = vertex_addresses(t, cfg.sample_level, cfg.depth);
  if (pts.empty()) throw UsageError("empty sample");
  auto vm = chain_metric(t, pts, cfg);
  json j = {{"rule", l.label}, {"visual", to_json(vm)}};
  if (o.cells_max > 0) j["cells"] = to_json(cell_metric_report(t, pts, vm, 1, o.cells_max));
  if (o.hyperbolicity) j["hyperbolicity"] = to_json(hyperbolicity_constants(t, cfg.sample_level, cfg.depth));
  if (!o.csv.empty()) write_text(o.csv, visual_scatter_csv(vm), out);
  write_text(o.out, dump(j), out);
  return kOk;
}

inline int cmd_diagnose(const Options& o, std::ostream& out) {
  auto l = load_argument(o.rule);
  CellTower t(l.rule);
  json j = {{"rule", l.label}, {"suite", o.suite}, {"seed", o.seed}};
  if (o.suite == "core") {
    j["multiplicity"] = to_json(multiplicity_table(*l.rule), *l.rule);
    j["cpcf"] = to_json(cpcf_data(*l.rule));
    j["ffi"] = to_json(ffi_report(t, o.max_level));
    json fl = json::array();
    for (unsigned m = 1; m <= o.max_level; ++m) fl.push_back(to_json(check_flower_invariance(t, m)));
    j["flower_invariance"] = fl;
    j["reachability"] = to_json(image_reachability(t, 1));
  } else if (o.suite == "qv") {
    Geometry g(t, need_realization(l));
    QvConfig cfg;
    cfg.max_m = o.max_level;
    cfg.max_k = o.max_level;
    j["qv"] = to_json(qv_constants(g, cfg));
  } else if (o.suite == "bqs") {
    Geometry g(t, need_realization(l));
    BqsConfig cfg;
    cfg.max_m = std::max(1u, o.max_level);
    cfg.seed = o.seed;
    auto mk = make_marking(g, default_base_points(g), cfg.max_m);
    auto b = bqs_envelope(g, mk, cfg);
    if (!o.csv.empty()) write_text(o.csv, envelope_csv(b), out);
    j["bqs"] = to_json(b);
  } else if (o.suite == "cxc") {
    Geometry g(t, need_realization(l));
    CxcConfig cfg;
    cfg.max_m = o.max_level;
    cfg.seed = o.seed;
    j["cxc"] = to_json(cxc_report(g, cfg));
    j["expansion"] = to_json(expansion_check(g, o.max_level));
  } else if (o.suite == "qs") {
    Geometry g(t, need_realization(l));
    VisualMetricConfig cfg;
    cfg.lambda = o.lambda;
    cfg.eps = o.eps;
    cfg.depth = o.depth;
    cfg.sample_level = sample_level_of(o);
    cfg.jobs = o.jobs;
    auto pts = vertex_addresses(t, cfg.sample_level, cfg.depth);
    auto vm = chain_metric(t, pts, cfg);
    std::vector<Point> pos;
    for (const auto& p : pts) pos.push_back(g.vertex_point(p.carrier));
    j["visual"] = to_json(vm);
    j["qs"] = to_json(qs_identity_modulus(vm, pos, g.space()));
  } else {
    throw UsageError("--suite must be core, qv, bqs, cxc or qs");
  }
  write_text(o.out, dump(j), out);
  return kOk;
}

inline int cmd_example(const Options& o, std::ostream& out) {
  Example ex;
  try {
    ex = builtin_example(o.example);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::string text = dump(rule_to_json(*ex.rule, &ex.realization));
  write_text(o.dump_path, text, out);
  return kOk;
}

inline int cmd_export(const Options& o, std::ostream& out) {
  auto l = load_argument(o.rule);
  CellTower t(l.rule);
  if (o.what == "rule") {
    write_text(o.out, dump(rule_to_json(*l.rule, l.realization ? &*l.realization : nullptr)), out);
  } else if (o.what == "dot") {
    const auto& k = t.complex(o.level);
    write_text(o.out, to_dot(k, adjacency_graph(k, GraphKind::AllCells), "level" + std::to_string(o.level)), out);
  } else if (o.what == "mesh") {
    Geometry g(t, need_realization(l));
    write_text(o.out, mesh_csv(g, o.level), out);
  } else {
    throw UsageError("--what must be rule, dot or mesh");
  }
  return kOk;
}

/// Runs the command line `args` (without the program name). Reports go to
/// `out` unless an output path is given; diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  o.jobs = default_jobs();
  CLI::App app{"Cellular subdivision sequences: validation, iteration, visual metrics and diagnostics", "cellseq"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--jobs", o.jobs, "Worker threads (default: CELLSEQ_JOBS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Seed for sampled subsets")->capture_default_str();

  auto rule_arg = [&](CLI::App* c) { c->add_option("rule", o.rule, "Rule file or built-in example name")->required(); };
  auto out_opt = [&](CLI::App* c) { c->add_option("--out,-o", o.out, "Output path (default stdout)"); };

  auto* validate = app.add_subcommand("validate", "Check a rule and its realization");
  rule_arg(validate);
  out_opt(validate);

  auto* iterate = app.add_subcommand("iterate", "Cells of the level complexes");
  rule_arg(iterate);
  out_opt(iterate);
  iterate->add_option("--level", o.level, "Deepest level")->capture_default_str();
  iterate->add_option("--emit", o.emit, "counts | cells | adjacency (DOT)")
      ->check(CLI::IsMember({"counts", "cells", "adjacency"}))
      ->capture_default_str();

  auto* visual = app.add_subcommand("visual", "Chain metric of Lambda^(-eps m(x,y)) on vertex samples");
  rule_arg(visual);
  out_opt(visual);
  visual->add_option("--lambda", o.lambda, "Expansion factor")->capture_default_str();
  visual->add_option("--eps", o.eps, "Exponent in (0,1]")->capture_default_str();
  visual->add_option("--depth", o.depth, "Address depth")->capture_default_str();
  visual->add_option("--sample", o.sample, "Sample kind")->capture_default_str();
  visual->add_option("--sample-level", o.sample_level, "Level whose vertices are sampled (default depth-2)");
  visual->add_option("--cells", o.cells_max, "Cell-metric table for levels 1..N");
  visual->add_flag("--hyperbolicity", o.hyperbolicity, "Add k0 and the iteration check");
  visual->add_option("--csv", o.csv, "Scatter data (q^eps, rho) per pair");

  auto* diagnose = app.add_subcommand("diagnose", "Quasisymmetry, BQS and CXC diagnostics");
  rule_arg(diagnose);
  out_opt(diagnose);
  diagnose->add_option("--suite", o.suite, "core | qv | bqs | cxc | qs")
      ->check(CLI::IsMember({"core", "qv", "bqs", "cxc", "qs"}))
      ->capture_default_str();
  diagnose->add_option("--max-level", o.max_level, "Deepest level")->capture_default_str();
  diagnose->add_option("--lambda", o.lambda, "Expansion factor (qs)")->capture_default_str();
  diagnose->add_option("--eps", o.eps, "Exponent (qs)")->capture_default_str();
  diagnose->add_option("--depth", o.depth, "Address depth (qs)");
  diagnose->add_option("--sample-level", o.sample_level, "Sampled vertex level (qs)");
  diagnose->add_option("--csv", o.csv, "Envelope table (bqs)");

  auto* example = app.add_subcommand("example", "Print or dump a built-in example");
  example->add_option("name", o.example, "torus2 | torus3 | pillow | identity2")->required();
  example->add_option("--dump", o.dump_path, "Write the rule JSON here");

  auto* exp = app.add_subcommand("export", "Rule JSON, DOT face graph or mesh CSV");
  rule_arg(exp);
  out_opt(exp);
  exp->add_option("--what", o.what, "rule | dot | mesh")
      ->check(CLI::IsMember({"rule", "dot", "mesh"}))
      ->capture_default_str();
  exp->add_option("--level", o.level, "Level for dot and mesh")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "cellseq: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }
  // Subcommand defaults that depend on the command.
  if (diagnose->parsed() && diagnose->count("--depth") == 0) o.depth = 4;
  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (iterate->parsed()) return cmd_iterate(o, out);
    if (visual->parsed()) return cmd_visual(o, out);
    if (diagnose->parsed()) return cmd_diagnose(o, out);
    if (example->parsed()) return cmd_example(o, out);
    if (exp->parsed()) return cmd_export(o, out);
  } catch (const UsageError& e) {
    err << "cellseq: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationFailed& e) {
    err << "cellseq: " << e.what() << '\n';
    out << dump(validation_to_json(e.report()));
    return kFailed;
  } catch (const Error& e) {
    err << "cellseq: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace cellseq::cli

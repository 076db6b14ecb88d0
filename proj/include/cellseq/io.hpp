#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "cellseq/examples.hpp"
#include "cellseq/realization.hpp"
#include "cellseq/subdivision_rule.hpp"

namespace cellseq {

using json = nlohmann::json;

/// A rule read from JSON, with its realization when the file has one.
struct LoadedRule {
  std::shared_ptr<const SubdivisionRule> rule;
  std::optional<Realization> realization;
};

/// Thrown by load_rule when the rule parses but fails validation.
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport rep)
      : Error("rule failed validation (" + std::to_string(rep.violations.size()) + " violations)"),
        report_(std::move(rep)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

json complex_to_json(const CellComplex& k);
CellComplex complex_from_json(const json& j, const std::string& path = "$");
json realization_to_json(const SubdivisionRule& rule, const Realization& r);
Realization realization_from_json(const SubdivisionRule& rule, const json& j, const std::string& path = "$.realization");
json rule_to_json(const SubdivisionRule& rule, const Realization* realization = nullptr);
LoadedRule rule_from_json(const json& j);

/// Reads and validates a rule file. Throws SchemaError on malformed input and
/// ValidationFailed if the rule is inconsistent.
LoadedRule load_rule(const std::string& path, bool validate = true);
void dump_rule(const std::string& path, const SubdivisionRule& rule, const Realization* realization = nullptr);

json validation_to_json(const ValidationReport& rep);

// ---------------------------------------------------------------------------

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "." + key + ": missing");
  return *it;
}

inline Point point_from_json(const json& j, int dim, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw SchemaError(path + ": expected an array of " + std::to_string(dim) + " numbers");
  Point p;
  for (int i = 0; i < dim; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) throw SchemaError(path + ": expected numbers");
    p[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return p;
}

inline json point_to_json(const Point& p, int dim) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(p[i]);
  return a;
}

}  // namespace detail

inline json complex_to_json(const CellComplex& k) {
  json cells = json::array();
  for (std::size_t i = 0; i < k.size(); ++i) {
    CellId c(i);
    json faces = json::array();
    for (CellId f : k.immediate_faces(c)) faces.push_back(k.name(f));
    cells.push_back({{"id", k.name(c)}, {"dim", k.dim(c)}, {"faces", faces}});
  }
  return {{"dim_top", k.dim_top()}, {"cells", cells}};
}

inline CellComplex complex_from_json(const json& j, const std::string& path) {
  const json& top = detail::require(j, "dim_top", path);
  if (!top.is_number_integer()) throw SchemaError(path + ".dim_top: expected an integer");
  const json& cells = detail::require(j, "cells", path);
  if (!cells.is_array()) throw SchemaError(path + ".cells: expected an array");
  std::vector<CellComplex::CellSpec> specs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string p = path + ".cells[" + std::to_string(i) + "]";
    const json& c = cells[i];
    const json& id = detail::require(c, "id", p);
    const json& dim = detail::require(c, "dim", p);
    if (!id.is_string()) throw SchemaError(p + ".id: expected a string");
    if (!dim.is_number_integer()) throw SchemaError(p + ".dim: expected an integer");
    CellComplex::CellSpec s{id.get<std::string>(), dim.get<int>(), {}};
    if (auto it = c.find("faces"); it != c.end()) {
      if (!it->is_array()) throw SchemaError(p + ".faces: expected an array");
      for (const auto& f : *it) {
        if (!f.is_string()) throw SchemaError(p + ".faces: expected cell ids");
        s.faces.push_back(f.get<std::string>());
      }
    }
    specs.push_back(std::move(s));
  }
  try {
    return CellComplex::from_specs(top.get<int>(), specs);
  } catch (const ComplexError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

inline json realization_to_json(const SubdivisionRule& rule, const Realization& r) {
  auto boxes = [&](const CellComplex& k, const std::vector<Box>& bs) {
    json o = json::object();
    for (std::size_t i = 0; i < k.size(); ++i)
      o[k.name(CellId(i))] = {{"lo", detail::point_to_json(bs[i].lo, r.dim)},
                              {"hi", detail::point_to_json(bs[i].hi, r.dim)}};
    return o;
  };
  json branches = json::object();
  for (std::size_t i = 0; i < rule.refined.size(); ++i)
    if (r.branch_inverses[i])
      branches[rule.refined.name(CellId(i))] = {{"scale", r.branch_inverses[i]->scale},
                                                {"offset", detail::point_to_json(r.branch_inverses[i]->offset, r.dim)}};
  return {{"model", r.model},
          {"dim", r.dim},
          {"side", r.side},
          {"boxes", {{"base", boxes(rule.base, r.base_boxes)}, {"refined", boxes(rule.refined, r.refined_boxes)}}},
          {"branch_inverses", branches}};
}

inline Realization realization_from_json(const SubdivisionRule& rule, const json& j, const std::string& path) {
  Realization r;
  const json& model = detail::require(j, "model", path);
  if (!model.is_string()) throw SchemaError(path + ".model: expected a string");
  r.model = model.get<std::string>();
  if (r.model != "flat_torus" && r.model != "pillowcase")
    throw SchemaError(path + ".model: unsupported model '" + r.model + "'");
  const json& dim = detail::require(j, "dim", path);
  if (!dim.is_number_integer() || dim.get<int>() < 1 || dim.get<int>() > kMaxDim)
    throw SchemaError(path + ".dim: expected an integer in [1," + std::to_string(kMaxDim) + "]");
  r.dim = dim.get<int>();
  const json& side = detail::require(j, "side", path);
  if (!side.is_number() || !(side.get<double>() > 0)) throw SchemaError(path + ".side: expected a positive number");
  r.side = side.get<double>();
  const json& boxes = detail::require(j, "boxes", path);
  auto read_boxes = [&](const CellComplex& k, const char* key) {
    const std::string p = path + ".boxes." + key;
    const json& o = detail::require(boxes, key, path + ".boxes");
    if (!o.is_object()) throw SchemaError(p + ": expected an object");
    std::vector<Box> out(k.size());
    std::vector<bool> seen(k.size(), false);
    for (auto it = o.begin(); it != o.end(); ++it) {
      auto c = k.find(it.key());
      if (!c) throw SchemaError(p + "." + it.key() + ": unknown cell");
      out[c->value].lo = detail::point_from_json(detail::require(*it, "lo", p + "." + it.key()), r.dim, p + "." + it.key() + ".lo");
      out[c->value].hi = detail::point_from_json(detail::require(*it, "hi", p + "." + it.key()), r.dim, p + "." + it.key() + ".hi");
      seen[c->value] = true;
    }
    for (std::size_t i = 0; i < k.size(); ++i)
      if (!seen[i]) throw SchemaError(p + "." + k.name(CellId(i)) + ": missing");
    return out;
  };
  r.base_boxes = read_boxes(rule.base, "base");
  r.refined_boxes = read_boxes(rule.refined, "refined");
  r.branch_inverses.assign(rule.refined.size(), std::nullopt);
  const std::string bp = path + ".branch_inverses";
  const json& br = detail::require(j, "branch_inverses", path);
  if (!br.is_object()) throw SchemaError(bp + ": expected an object");
  for (auto it = br.begin(); it != br.end(); ++it) {
    auto c = rule.refined.find(it.key());
    if (!c) throw SchemaError(bp + "." + it.key() + ": unknown refined cell");
    const json& sc = detail::require(*it, "scale", bp + "." + it.key());
    if (!sc.is_number()) throw SchemaError(bp + "." + it.key() + ".scale: expected a number");
    Affine a;
    a.scale = sc.get<double>();
    a.offset = detail::point_from_json(detail::require(*it, "offset", bp + "." + it.key()), r.dim,
                                       bp + "." + it.key() + ".offset");
    r.branch_inverses[c->value] = a;
  }
  return r;
}

inline json rule_to_json(const SubdivisionRule& rule, const Realization* realization) {
  json parent = json::object(), image = json::object();
  for (std::size_t i = 0; i < rule.refined.size(); ++i) {
    const auto n = rule.refined.name(CellId(i));
    parent[n] = rule.base.name(rule.parent[i]);
    image[n] = rule.base.name(rule.image[i]);
  }
  json j = {{"base", complex_to_json(rule.base)},
            {"refined", complex_to_json(rule.refined)},
            {"parent", parent},
            {"image", image}};
  if (realization) j["realization"] = realization_to_json(rule, *realization);
  return j;
}

inline LoadedRule rule_from_json(const json& j) {
  auto rule = std::make_shared<SubdivisionRule>();
  rule->base = complex_from_json(detail::require(j, "base", "$"), "$.base");
  rule->refined = complex_from_json(detail::require(j, "refined", "$"), "$.refined");
  auto read_map = [&](const char* key, std::vector<CellId>& out) {
    const std::string p = std::string("$.") + key;
    const json& m = detail::require(j, key, "$");
    if (!m.is_object()) throw SchemaError(p + ": expected an object");
    out.assign(rule->refined.size(), CellId());
    std::vector<bool> seen(rule->refined.size(), false);
    for (auto it = m.begin(); it != m.end(); ++it) {
      auto c = rule->refined.find(it.key());
      if (!c) throw SchemaError(p + "." + it.key() + ": unknown refined cell");
      if (!it->is_string()) throw SchemaError(p + "." + it.key() + ": expected a base cell id");
      auto b = rule->base.find(it->get<std::string>());
      if (!b) throw SchemaError(p + "." + it.key() + ": unknown base cell '" + it->get<std::string>() + "'");
      out[c->value] = *b;
      seen[c->value] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) throw SchemaError(p + "." + rule->refined.name(CellId(i)) + ": missing");
  };
  read_map("parent", rule->parent);
  read_map("image", rule->image);
  LoadedRule out;
  if (auto it = j.find("realization"); it != j.end()) out.realization = realization_from_json(*rule, *it);
  out.rule = std::move(rule);
  return out;
}

inline LoadedRule load_rule(const std::string& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  LoadedRule r = rule_from_json(j);
  if (validate) {
    auto rep = validate_rule(*r.rule);
    if (r.realization) rep.append(validate_realization(*r.rule, *r.realization), "");
    if (!rep.ok()) throw ValidationFailed(std::move(rep));
  }
  return r;
}

inline void dump_rule(const std::string& path, const SubdivisionRule& rule, const Realization* realization) {
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot write file");
  out << rule_to_json(rule, realization).dump(2) << '\n';
}

inline json validation_to_json(const ValidationReport& rep) {
  json v = json::array();
  for (const auto& x : rep.violations) v.push_back({{"check", x.check}, {"message", x.message}, {"cells", x.cells}});
  return {{"ok", rep.ok()}, {"violations", v}};
}

}  // namespace cellseq

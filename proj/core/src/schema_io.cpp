#include <fstream>

#include "dce/error.hpp"
#include "dce/schema.hpp"

namespace dce {

using nlohmann::json;

namespace {

AttributeScope parse_scope(const std::string& s) {
  if (s == "alternative_specific") return AttributeScope::alternative_specific;
  if (s == "shared_across_alternatives" || s == "shared") return AttributeScope::shared_across_alternatives;
  if (s == "context") return AttributeScope::context;
  if (s == "demographic") return AttributeScope::demographic;
  throw Error("schema_parse", "unknown attribute scope '" + s + "'");
}

Coding parse_coding(const std::string& s) {
  if (s == "effects") return Coding::effects;
  if (s == "linear") return Coding::linear;
  throw Error("schema_parse", "unknown coding '" + s + "' (dummy coding is not supported)");
}

json interactions_to_json(const std::vector<Interaction>& list) {
  json out = json::array();
  for (const auto& ia : list) out.push_back({{"attribute", ia.attribute}, {"alternative", ia.alternative}});
  return out;
}

std::vector<Interaction> interactions_from_json(const json& j) {
  std::vector<Interaction> out;
  for (const auto& e : j) out.push_back({e.at("attribute").get<std::string>(), e.at("alternative").get<std::string>()});
  return out;
}

} // namespace

json schema_to_json(const ExperimentSchema& schema) {
  json alts = json::array();
  for (const auto& a : schema.alternatives) {
    alts.push_back({{"id", a.id}, {"label", a.label}, {"reference", a.is_reference}});
  }
  json attrs = json::array();
  for (const auto& a : schema.attributes) {
    json levels = json::array();
    for (const auto& lv : a.levels) {
      json l = {{"label", lv.label}};
      if (lv.value) l["value"] = *lv.value;
      if (lv.weight) l["weight"] = *lv.weight;
      levels.push_back(std::move(l));
    }
    json e = {
        {"name", a.name},
        {"column", a.column.empty() ? a.name : a.column},
        {"scope", to_string(a.scope)},
        {"applies_to", a.applies_to},
        {"coding", to_string(a.coding)},
        {"levels", std::move(levels)},
    };
    if (a.is_cost) e["cost"] = true;
    attrs.push_back(std::move(e));
  }
  return {
      {"name", schema.name},
      {"alternatives", std::move(alts)},
      {"attributes", std::move(attrs)},
      {"interactions",
       {{"context", interactions_to_json(schema.context_interactions)},
        {"demographic", interactions_to_json(schema.demographic_interactions)}}},
  };
}

ExperimentSchema schema_from_json(const json& j) {
  try {
    ExperimentSchema s;
    s.name = j.value("name", std::string{});
    for (const auto& a : j.at("alternatives")) {
      s.alternatives.push_back({a.at("id").get<std::string>(), a.value("label", a.at("id").get<std::string>()),
                                a.value("reference", false)});
    }
    for (const auto& a : j.at("attributes")) {
      AttributeDef def;
      def.name = a.at("name").get<std::string>();
      def.column = a.value("column", def.name);
      def.scope = parse_scope(a.at("scope").get<std::string>());
      def.applies_to = a.value("applies_to", std::vector<std::string>{});
      def.coding = parse_coding(a.value("coding", std::string("effects")));
      def.is_cost = a.value("cost", false);
      for (const auto& lv : a.at("levels")) {
        Level level;
        level.label = lv.at("label").get<std::string>();
        if (lv.contains("value")) level.value = lv.at("value").get<double>();
        if (lv.contains("weight")) level.weight = lv.at("weight").get<double>();
        def.levels.push_back(std::move(level));
      }
      s.attributes.push_back(std::move(def));
    }
    if (j.contains("interactions")) {
      const auto& ia = j.at("interactions");
      if (ia.contains("context")) s.context_interactions = interactions_from_json(ia.at("context"));
      if (ia.contains("demographic")) s.demographic_interactions = interactions_from_json(ia.at("demographic"));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error("schema_parse", std::string("malformed schema JSON: ") + e.what());
  }
}

ExperimentSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open schema file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("schema_parse", "schema file '" + path + "' is not valid JSON: " + e.what());
  }
  return schema_from_json(j);
}

void save_schema(const ExperimentSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write schema file '" + path + "'");
  out << schema_to_json(schema).dump(2) << '\n';
}

} // namespace dce

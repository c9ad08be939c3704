#include "dce/schema.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dce/error.hpp"

namespace dce {

std::string to_string(AttributeScope scope) {
  switch (scope) {
  case AttributeScope::alternative_specific: return "alternative_specific";
  case AttributeScope::shared_across_alternatives: return "shared_across_alternatives";
  case AttributeScope::context: return "context";
  case AttributeScope::demographic: return "demographic";
  }
  return "unknown";
}

std::string to_string(Coding coding) { return coding == Coding::effects ? "effects" : "linear"; }

std::optional<std::size_t> AttributeDef::find_level(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].label == label) return i;
  }
  return std::nullopt;
}

std::size_t AttributeDef::level_index(std::string_view label) const {
  if (auto i = find_level(label)) return *i;
  throw Error("unknown_level", "attribute '" + name + "' has no level '" + std::string(label) + "'");
}

std::size_t AttributeDef::width() const {
  if (coding == Coding::linear) return 1;
  return levels.empty() ? 0 : levels.size() - 1;
}

std::optional<std::size_t> ExperimentSchema::find_alternative(std::string_view id) const {
  for (std::size_t i = 0; i < alternatives.size(); ++i) {
    if (alternatives[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t ExperimentSchema::alternative_index(std::string_view id) const {
  if (auto i = find_alternative(id)) return *i;
  throw Error("unknown_alternative", "schema has no alternative '" + std::string(id) + "'");
}

std::optional<std::size_t> ExperimentSchema::find_attribute(std::string_view attr) const {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (attributes[i].name == attr) return i;
  }
  return std::nullopt;
}

std::size_t ExperimentSchema::attribute_index(std::string_view attr) const {
  if (auto i = find_attribute(attr)) return *i;
  throw Error("unknown_attribute", "schema has no attribute '" + std::string(attr) + "'");
}

std::size_t ExperimentSchema::reference_index() const {
  for (std::size_t i = 0; i < alternatives.size(); ++i) {
    if (alternatives[i].is_reference) return i;
  }
  throw Error("no_reference", "schema has no reference alternative");
}

bool ExperimentSchema::applies(std::size_t attr, std::size_t alt) const {
  const auto& a = attributes[attr];
  if (!a.is_design_attribute()) return false;
  if (a.applies_to.empty()) return true;
  return std::find(a.applies_to.begin(), a.applies_to.end(), alternatives[alt].id) != a.applies_to.end();
}

std::optional<std::size_t> ExperimentSchema::cost_attribute(std::string_view alternative) const {
  const auto alt = find_alternative(alternative);
  if (!alt) return std::nullopt;
  for (std::size_t a = 0; a < attributes.size(); ++a) {
    if (attributes[a].is_cost && applies(a, *alt)) return a;
  }
  return std::nullopt;
}

std::vector<double> code_level(const AttributeDef& attr, std::size_t level) {
  if (level >= attr.levels.size()) {
    throw Error("unknown_level", "level " + std::to_string(level) + " out of range for '" + attr.name + "'");
  }
  if (attr.coding == Coding::linear) {
    return {attr.levels[level].value.value_or(0.0)};
  }
  const std::size_t width = attr.width();
  std::vector<double> row(width, 0.0);
  if (level == width) {
    std::fill(row.begin(), row.end(), -1.0);
  } else {
    row[level] = 1.0;
  }
  return row;
}

std::vector<double> effects_code(const AttributeDef& attr, std::string_view level_label) {
  return code_level(attr, attr.level_index(level_label));
}

std::vector<SchemaViolation> validate_schema(const ExperimentSchema& schema) {
  std::vector<SchemaViolation> out;
  auto add = [&out](std::string code, std::string detail) { out.push_back({std::move(code), std::move(detail)}); };

  if (schema.alternatives.size() < 2) add("too_few_alternatives", "a choice needs at least two alternatives");
  std::set<std::string> alt_ids;
  std::size_t n_ref = 0;
  for (const auto& alt : schema.alternatives) {
    if (alt.id.empty()) add("empty_identifier", "alternative with empty id");
    if (!alt_ids.insert(alt.id).second) add("duplicate_alternative", alt.id);
    if (alt.is_reference) ++n_ref;
  }
  if (n_ref == 0) add("no_reference", "exactly one alternative must be the reference");
  if (n_ref > 1) add("multiple_reference", std::to_string(n_ref) + " alternatives marked as reference");

  std::set<std::string> attr_names;
  // column -> (scope, alternatives covered)
  std::map<std::string, std::pair<AttributeScope, std::set<std::string>>> columns;
  for (const auto& attr : schema.attributes) {
    if (attr.name.empty()) add("empty_identifier", "attribute with empty name");
    if (!attr_names.insert(attr.name).second) add("duplicate_attribute", attr.name);
    if (attr.levels.size() < 2) {
      add("degenerate_attribute", attr.name + " has " + std::to_string(attr.levels.size()) + " level(s)");
    }
    std::set<std::string> labels;
    for (const auto& lv : attr.levels) {
      if (!labels.insert(lv.label).second) add("duplicate_level", attr.name + ":" + lv.label);
      if ((attr.coding == Coding::linear || attr.is_cost) && !lv.value) {
        add("missing_numeric_value", attr.name + ":" + lv.label);
      }
    }
    for (const auto& id : attr.applies_to) {
      if (!alt_ids.contains(id)) add("unknown_alternative", attr.name + " applies to '" + id + "'");
    }
    if (attr.is_cost && attr.scope != AttributeScope::alternative_specific) {
      add("invalid_cost_attribute", attr.name + " must be alternative_specific");
    }
    if (attr.scope == AttributeScope::demographic) {
      bool any = false;
      double sum = 0.0;
      for (const auto& lv : attr.levels) {
        if (lv.weight) {
          any = true;
          if (*lv.weight < 0.0) add("invalid_weights", attr.name + " has a negative weight");
          sum += *lv.weight;
        }
      }
      if (any && std::fabs(sum - 1.0) > 1e-9) add("invalid_weights", attr.name + " weights sum to " + std::to_string(sum));
    }

    const std::string col = attr.column.empty() ? attr.name : attr.column;
    std::set<std::string> covered;
    if (attr.applies_to.empty() || !attr.is_design_attribute()) {
      covered = alt_ids;
    } else {
      covered.insert(attr.applies_to.begin(), attr.applies_to.end());
    }
    auto [it, inserted] = columns.try_emplace(col, attr.scope, covered);
    if (!inserted) {
      auto& [scope, seen] = it->second;
      bool overlap = scope != attr.scope || !attr.is_design_attribute();
      for (const auto& id : covered) overlap = overlap || seen.contains(id);
      if (overlap) add("column_conflict", "column '" + col + "' is claimed by overlapping attributes");
      seen.insert(covered.begin(), covered.end());
    }
  }

  auto check_interactions = [&](const std::vector<Interaction>& list, AttributeScope scope, const char* kind) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& ia : list) {
      const auto a = schema.find_attribute(ia.attribute);
      if (!a) {
        add("unknown_attribute", std::string(kind) + " interaction on '" + ia.attribute + "'");
      } else if (schema.attributes[*a].scope != scope) {
        add("interaction_scope_mismatch", ia.attribute + " is not a " + kind + " attribute");
      }
      const auto alt = schema.find_alternative(ia.alternative);
      if (!alt) {
        add("unknown_alternative", std::string(kind) + " interaction with '" + ia.alternative + "'");
      } else if (schema.alternatives[*alt].is_reference) {
        add("reference_interaction", ia.attribute + " interacts with reference alternative '" + ia.alternative + "'");
      }
      if (!seen.emplace(ia.attribute, ia.alternative).second) {
        add("duplicate_interaction", ia.attribute + "x" + ia.alternative);
      }
    }
  };
  check_interactions(schema.demographic_interactions, AttributeScope::demographic, "demographic");
  check_interactions(schema.context_interactions, AttributeScope::context, "context");
  return out;
}

void require_valid(const ExperimentSchema& schema) {
  const auto report = validate_schema(schema);
  if (report.empty()) return;
  std::ostringstream msg;
  msg << "invalid schema:";
  for (const auto& v : report) msg << "\n  " << v.code << ": " << v.detail;
  throw Error("invalid_schema", msg.str());
}

// ---------------------------------------------------------------------------

ParameterIndex::ParameterIndex(std::vector<ParameterInfo> params, std::size_t n_fixed)
    : params_(std::move(params)), n_fixed_(n_fixed) {
  std::set<std::string> names;
  for (const auto& p : params_) {
    if (!names.insert(p.name).second) throw Error("duplicate_parameter", "parameter '" + p.name + "' defined twice");
  }
}

std::vector<std::string> ParameterIndex::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

std::optional<std::size_t> ParameterIndex::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterIndex::at(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw Error("unknown_parameter", "unknown parameter '" + std::string(name) + "'");
}

std::vector<std::size_t> ParameterIndex::random_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t i = n_fixed_; i < params_.size(); ++i) out.push_back(params_[i].sd_of);
  return out;
}

std::string parameter_prefix(const ExperimentSchema& schema, const AttributeDef& attr, std::string_view alternative) {
  if (attr.scope == AttributeScope::shared_across_alternatives) return attr.name;
  if (attr.scope != AttributeScope::alternative_specific) return attr.name + "_" + std::string(alternative);
  const std::size_t n_alts = attr.applies_to.empty() ? schema.alternatives.size() : attr.applies_to.size();
  return n_alts > 1 ? attr.name + "_" + std::string(alternative) : attr.name;
}

std::string parameter_name(std::string_view prefix, std::string_view level) {
  if (level.empty()) return std::string(prefix);
  return std::string(prefix) + "[" + std::string(level) + "]";
}

std::string asc_name(std::string_view alternative) { return "asc_" + std::string(alternative); }
std::string sd_name(std::string_view param) { return "sd_" + std::string(param); }

namespace {

void append_attribute(std::vector<ParameterInfo>& out, const AttributeDef& attr, const std::string& prefix,
                      const std::string& alternative, ParamKind kind) {
  if (attr.coding == Coding::linear) {
    out.push_back({prefix, kind, attr.name, alternative, "", 0, 0});
    return;
  }
  for (std::size_t k = 0; k + 1 < attr.levels.size(); ++k) {
    out.push_back({parameter_name(prefix, attr.levels[k].label), kind, attr.name, alternative, attr.levels[k].label, k, 0});
  }
}

std::vector<std::string> alternatives_of(const ExperimentSchema& schema, const AttributeDef& attr) {
  if (!attr.applies_to.empty()) return attr.applies_to;
  std::vector<std::string> out;
  for (const auto& alt : schema.alternatives) out.push_back(alt.id);
  return out;
}

} // namespace

ParameterIndex build_parameter_index(const ExperimentSchema& schema) {
  require_valid(schema);
  std::vector<ParameterInfo> out;
  for (const auto& alt : schema.alternatives) {
    if (!alt.is_reference) out.push_back({asc_name(alt.id), ParamKind::asc, "", alt.id, "asc", 0, 0});
  }
  for (const auto& ia : schema.context_interactions) {
    const auto& attr = schema.attributes[schema.attribute_index(ia.attribute)];
    append_attribute(out, attr, attr.name + "_" + ia.alternative, ia.alternative, ParamKind::context_interaction);
  }
  for (const auto& attr : schema.attributes) {
    if (attr.scope == AttributeScope::shared_across_alternatives) {
      append_attribute(out, attr, attr.name, "", ParamKind::attribute);
    } else if (attr.scope == AttributeScope::alternative_specific) {
      for (const auto& alt : alternatives_of(schema, attr)) {
        append_attribute(out, attr, parameter_prefix(schema, attr, alt), alt, ParamKind::attribute);
      }
    }
  }
  for (const auto& ia : schema.demographic_interactions) {
    const auto& attr = schema.attributes[schema.attribute_index(ia.attribute)];
    append_attribute(out, attr, attr.name + "_" + ia.alternative, ia.alternative, ParamKind::demographic_interaction);
  }
  const std::size_t n_fixed = out.size();
  return ParameterIndex(std::move(out), n_fixed);
}

ParameterIndex build_parameter_index(const ExperimentSchema& schema, const MixingSpec& mixing) {
  const ParameterIndex fixed = build_parameter_index(schema);
  std::vector<ParameterInfo> out = fixed.entries();
  std::set<std::string> seen;
  for (const auto& name : mixing.random_params) {
    const std::size_t col = fixed.at(name);
    if (!seen.insert(name).second) throw Error("duplicate_parameter", "random parameter '" + name + "' listed twice");
    const auto& mean = fixed[col];
    out.push_back({sd_name(name), ParamKind::sd, mean.attribute, mean.alternative, "sd", mean.level_slot, col});
  }
  return ParameterIndex(std::move(out), fixed.size());
}

// ---------------------------------------------------------------------------

ExperimentSchema default_schema() {
  ExperimentSchema s;
  s.name = "drone_delivery_japan";
  s.alternatives = {
      {"drone", "Drone", false},
      {"truck", "Truck", false},
      {"motorcycle", "Motorcycle", true},
  };

  auto levels = [](std::initializer_list<const char*> labels) {
    std::vector<Level> out;
    for (const char* l : labels) out.push_back({l, std::nullopt, std::nullopt});
    return out;
  };
  auto yen = [](std::initializer_list<int> amounts) {
    std::vector<Level> out;
    for (int a : amounts) out.push_back({std::to_string(a), static_cast<double>(a), std::nullopt});
    return out;
  };
  auto weighted = [](std::initializer_list<std::pair<const char*, int>> counts) {
    double total = 0.0;
    for (const auto& c : counts) total += c.second;
    std::vector<Level> out;
    for (const auto& [label, n] : counts) out.push_back({label, std::nullopt, n / total});
    return out;
  };

  using S = AttributeScope;
  s.attributes = {
      {"product_type", "product_type", S::context, {},
       levels({"daily_goods", "medicine_health", "electronics", "gift"}), Coding::effects, false},
      {"dropoff_motorcycle", "dropoff", S::alternative_specific, {"motorcycle"},
       levels({"doorstep", "smart_storage_box"}), Coding::effects, false},
      {"dropoff_drone", "dropoff", S::alternative_specific, {"drone"},
       levels({"doorstep", "window_balcony"}), Coding::effects, false},
      {"dropoff_truck", "dropoff", S::alternative_specific, {"truck"},
       levels({"doorstep", "smart_storage_box"}), Coding::effects, false},
      {"date", "date", S::alternative_specific, {"motorcycle", "drone", "truck"},
       levels({"next_day", "day_after_tomorrow"}), Coding::effects, false},
      {"cost_motorcycle", "cost", S::alternative_specific, {"motorcycle"}, yen({1070, 870, 670, 470}), Coding::effects, true},
      {"cost_drone", "cost", S::alternative_specific, {"drone"}, yen({1080, 880, 680, 480}), Coding::effects, true},
      {"cost_truck", "cost", S::alternative_specific, {"truck"}, yen({1180, 980, 780, 580}), Coding::effects, true},
      {"social", "social", S::shared_across_alternatives, {},
       levels({"neighbor_30", "neighbor_70", "family_30", "family_70"}), Coding::effects, false},
      {"gender", "gender", S::demographic, {}, weighted({{"male", 274}, {"female", 254}}), Coding::effects, false},
      {"age_group", "age_group", S::demographic, {},
       weighted({{"18_34", 146}, {"55_74", 111}, {"75_plus", 31}, {"35_54", 240}}), Coding::effects, false},
      {"education_group", "education_group", S::demographic, {},
       weighted({{"university_graduate", 244}, {"vocational_junior_college", 86}, {"other", 198}}),
       Coding::effects, false},
  };
  s.context_interactions = {{"product_type", "drone"}, {"product_type", "truck"}};
  s.demographic_interactions = {
      {"gender", "drone"},    {"gender", "truck"},          {"age_group", "drone"},
      {"age_group", "truck"}, {"education_group", "drone"}, {"education_group", "truck"},
  };
  return s;
}

} // namespace dce

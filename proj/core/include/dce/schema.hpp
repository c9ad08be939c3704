#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dce/mixing.hpp"

namespace dce {

struct AlternativeDef {
  std::string id;
  std::string label;
  bool is_reference = false;

  bool operator==(const AlternativeDef&) const = default;
};

enum class AttributeScope { alternative_specific, shared_across_alternatives, context, demographic };
enum class Coding { effects, linear };

std::string to_string(AttributeScope scope);
std::string to_string(Coding coding);

struct Level {
  std::string label;
  std::optional<double> value;  // numeric value with units (yen for cost)
  std::optional<double> weight; // sampling share, demographic attributes only

  bool operator==(const Level&) const = default;
};

struct AttributeDef {
  std::string name;
  /// Data column this attribute is read from; several alternative-specific
  /// attributes with disjoint `applies_to` may share one column.
  std::string column;
  AttributeScope scope = AttributeScope::alternative_specific;
  std::vector<std::string> applies_to; // empty = every alternative
  std::vector<Level> levels;
  Coding coding = Coding::effects;
  bool is_cost = false;

  bool operator==(const AttributeDef&) const = default;

  /// Throws Error("unknown_level") naming the attribute and label.
  std::size_t level_index(std::string_view label) const;
  std::optional<std::size_t> find_level(std::string_view label) const;
  /// Number of coded columns: L-1 for effects, 1 for linear.
  std::size_t width() const;
  bool is_design_attribute() const {
    return scope == AttributeScope::alternative_specific || scope == AttributeScope::shared_across_alternatives;
  }
};

struct Interaction {
  std::string attribute;
  std::string alternative;

  bool operator==(const Interaction&) const = default;
};

struct ExperimentSchema {
  std::string name;
  std::vector<AlternativeDef> alternatives;
  std::vector<AttributeDef> attributes;
  std::vector<Interaction> demographic_interactions;
  std::vector<Interaction> context_interactions;

  bool operator==(const ExperimentSchema&) const = default;

  std::optional<std::size_t> find_alternative(std::string_view id) const;
  std::size_t alternative_index(std::string_view id) const;
  std::optional<std::size_t> find_attribute(std::string_view name) const;
  std::size_t attribute_index(std::string_view name) const;
  std::size_t reference_index() const;
  /// Whether design attribute `attr` is presented for alternative `alt`.
  bool applies(std::size_t attr, std::size_t alt) const;
  /// Index of the cost attribute of an alternative, if any.
  std::optional<std::size_t> cost_attribute(std::string_view alternative) const;
};

/// Effects coding of one level: the base (last) level is -1 in every column,
/// level k is +1 in column k. Linear coding returns the numeric value.
std::vector<double> effects_code(const AttributeDef& attr, std::string_view level_label);
std::vector<double> code_level(const AttributeDef& attr, std::size_t level);

struct SchemaViolation {
  std::string code;
  std::string detail;
};

/// Empty iff the schema satisfies every structural invariant.
std::vector<SchemaViolation> validate_schema(const ExperimentSchema& schema);

/// Throws Error("invalid_schema") listing every violation.
void require_valid(const ExperimentSchema& schema);

// ---------------------------------------------------------------------------

enum class ParamKind { asc, attribute, context_interaction, demographic_interaction, sd };

struct ParameterInfo {
  std::string name;
  ParamKind kind = ParamKind::attribute;
  std::string attribute;   // source attribute (empty for ASC)
  std::string alternative; // empty when shared across alternatives
  std::string level;       // level label, "asc", or "sd"
  std::size_t level_slot = 0;
  /// For SD entries, the column of the random mean they belong to.
  std::size_t sd_of = 0;

  bool operator==(const ParameterInfo&) const = default;
};

class ParameterIndex {
public:
  ParameterIndex() = default;
  ParameterIndex(std::vector<ParameterInfo> params, std::size_t n_fixed);

  std::size_t size() const { return params_.size(); }
  std::size_t fixed_size() const { return n_fixed_; }
  std::size_t random_size() const { return params_.size() - n_fixed_; }

  const ParameterInfo& operator[](std::size_t i) const { return params_[i]; }
  const std::vector<ParameterInfo>& entries() const { return params_; }
  std::vector<std::string> names() const;

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws Error("unknown_parameter").
  std::size_t at(std::string_view name) const;
  /// Fixed-part columns that carry a random deviation, in SD order.
  std::vector<std::size_t> random_columns() const;

  bool operator==(const ParameterIndex&) const = default;

private:
  std::vector<ParameterInfo> params_;
  std::size_t n_fixed_ = 0;
};

/// Column prefix of an alternative-specific or shared attribute as it applies
/// to `alternative` ("date_drone", "cost_drone", "social").
std::string parameter_prefix(const ExperimentSchema& schema, const AttributeDef& attr, std::string_view alternative);
std::string parameter_name(std::string_view prefix, std::string_view level);
std::string asc_name(std::string_view alternative);
std::string sd_name(std::string_view param);

ParameterIndex build_parameter_index(const ExperimentSchema& schema);
/// Appends one SD column per random parameter; throws Error("unknown_parameter").
ParameterIndex build_parameter_index(const ExperimentSchema& schema, const MixingSpec& mixing);

// ---------------------------------------------------------------------------

/// Drone / truck / motorcycle delivery schema with Japanese yen cost levels.
ExperimentSchema default_schema();

nlohmann::json schema_to_json(const ExperimentSchema& schema);
/// Throws Error("schema_parse") on malformed input.
ExperimentSchema schema_from_json(const nlohmann::json& j);
ExperimentSchema load_schema(const std::string& path);
void save_schema(const ExperimentSchema& schema, const std::string& path);

} // namespace dce

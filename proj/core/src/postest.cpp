#include "dce/postest.hpp"

#include <cmath>
#include <set>

#include "dce/error.hpp"
#include "dce/numerics.hpp"

namespace dce {

LrTest lr_test(double ll_restricted, double ll_full, double df) {
  if (ll_full < ll_restricted) {
    throw Error("misordered_models", "full model log-likelihood is below the restricted model's");
  }
  if (!(df >= 1.0)) throw Error("invalid_df", "likelihood-ratio test needs at least one degree of freedom");
  const double stat = 2.0 * (ll_full - ll_restricted);
  return {stat, df, chi_square_upper_tail(stat, df)};
}

CostSlope ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("invalid_cost_slope", "cost slope needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("invalid_cost_slope", "cost levels have no variance in yen");
  CostSlope out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  out.yen = x;
  out.coefficients = y;
  return out;
}

namespace {

std::string prefix_for(const ExperimentSchema& schema, const AttributeDef& attr, const std::string& mode) {
  switch (attr.scope) {
  case AttributeScope::shared_across_alternatives:
    return attr.name;
  case AttributeScope::alternative_specific:
    if (mode.empty()) throw Error("missing_mode", "attribute '" + attr.name + "' needs an alternative");
    return parameter_prefix(schema, attr, mode);
  case AttributeScope::context:
  case AttributeScope::demographic:
    if (mode.empty()) throw Error("missing_mode", "attribute '" + attr.name + "' needs an alternative");
    return attr.name + "_" + mode;
  }
  return attr.name;
}

const AttributeDef& attribute_of(const ExperimentSchema& schema, const std::string& name) {
  auto a = schema.find_attribute(name);
  if (!a) throw Error("unknown_attribute", "schema has no attribute '" + name + "'");
  return schema.attributes[*a];
}

} // namespace

double level_coefficient(const EstimationResult& result, const ExperimentSchema& schema, const std::string& attribute,
                         const std::string& mode, const std::string& level) {
  const AttributeDef& attr = attribute_of(schema, attribute);
  const std::string prefix = prefix_for(schema, attr, mode);
  if (attr.coding == Coding::linear) {
    throw Error("linear_attribute", "attribute '" + attribute + "' is linear-coded and has no level coefficients");
  }
  const std::size_t lv = attr.level_index(level);
  if (lv + 1 < attr.levels.size()) return result.estimate(parameter_name(prefix, level));
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < attr.levels.size(); ++k) sum += result.estimate(parameter_name(prefix, attr.levels[k].label));
  return -sum;
}

std::vector<std::pair<std::string, double>> implied_base_coefficients(const EstimationResult& result,
                                                                      const ExperimentSchema& schema) {
  std::vector<std::pair<std::string, double>> out;
  std::set<std::string> seen;
  auto visit = [&](const AttributeDef& attr, const std::string& prefix) {
    if (attr.coding != Coding::effects || !seen.insert(prefix).second) return;
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < attr.levels.size(); ++k) {
      auto i = result.find(parameter_name(prefix, attr.levels[k].label));
      if (!i) return;
      sum += result.params[static_cast<Eigen::Index>(*i)];
    }
    out.emplace_back(parameter_name(prefix, attr.levels.back().label), -sum);
  };
  for (const auto& ia : schema.context_interactions) {
    visit(attribute_of(schema, ia.attribute), ia.attribute + "_" + ia.alternative);
  }
  for (const auto& attr : schema.attributes) {
    if (attr.scope == AttributeScope::shared_across_alternatives) {
      visit(attr, attr.name);
    } else if (attr.scope == AttributeScope::alternative_specific) {
      for (std::size_t j = 0; j < schema.alternatives.size(); ++j) {
        const auto a = schema.attribute_index(attr.name);
        if (schema.applies(a, j)) visit(attr, parameter_prefix(schema, attr, schema.alternatives[j].id));
      }
    }
  }
  for (const auto& ia : schema.demographic_interactions) {
    visit(attribute_of(schema, ia.attribute), ia.attribute + "_" + ia.alternative);
  }
  return out;
}

CostSlope cost_slope(const EstimationResult& result, const ExperimentSchema& schema, const std::string& mode) {
  if (!schema.find_alternative(mode)) throw Error("unknown_alternative", "schema has no alternative '" + mode + "'");
  const auto ca = schema.cost_attribute(mode);
  if (!ca) throw Error("missing_cost", "alternative '" + mode + "' has no cost attribute");
  const AttributeDef& attr = schema.attributes[*ca];
  const std::string prefix = parameter_prefix(schema, attr, mode);
  if (attr.coding == Coding::linear) {
    CostSlope out;
    out.mode = mode;
    out.slope = result.estimate(prefix);
    return out;
  }
  if (attr.levels.size() < 2) throw Error("invalid_cost_slope", "cost attribute needs at least two levels");

  std::vector<double> yen;
  if (auto it = result.cost_levels.find(prefix); it != result.cost_levels.end()) {
    yen = it->second;
    if (yen.size() != attr.levels.size()) {
      throw Error("invalid_cost_slope", "result lists " + std::to_string(yen.size()) + " cost levels for " + prefix +
                                            ", schema has " + std::to_string(attr.levels.size()));
    }
  } else {
    for (const auto& lv : attr.levels) {
      if (!lv.value) throw Error("missing_cost", "cost level '" + lv.label + "' of " + attr.name + " has no yen value");
      yen.push_back(*lv.value);
    }
  }
  std::vector<double> coef;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < attr.levels.size(); ++k) {
    coef.push_back(result.estimate(parameter_name(prefix, attr.levels[k].label)));
    sum += coef.back();
  }
  coef.push_back(-sum);
  CostSlope out = ols_slope(yen, coef);
  out.mode = mode;
  return out;
}

std::string default_shared_slope_mode(const ExperimentSchema& schema) {
  for (const auto& alt : schema.alternatives) {
    if (schema.cost_attribute(alt.id)) return alt.id;
  }
  throw Error("missing_cost", "schema has no cost attribute");
}

WtpEntry wtp(const EstimationResult& result, const ExperimentSchema& schema, const WtpRequest& req) {
  const AttributeDef& attr = attribute_of(schema, req.attribute);
  if (attr.is_cost) throw Error("self_referential", "WTP of the cost attribute '" + attr.name + "' is undefined");
  if (attr.coding != Coding::effects) {
    throw Error("linear_attribute", "WTP level pairs need an effects-coded attribute");
  }
  WtpEntry e;
  e.attribute = attr.name;
  e.mode = attr.scope == AttributeScope::shared_across_alternatives ? std::string{} : req.mode;
  e.from_level = req.from_level.value_or(attr.levels.back().label);
  e.to_level = req.to_level.value_or(attr.levels.front().label);
  e.delta_utility = level_coefficient(result, schema, attr.name, e.mode, e.to_level) -
                    level_coefficient(result, schema, attr.name, e.mode, e.from_level);
  e.slope_mode = req.slope_mode.empty() ? (e.mode.empty() ? default_shared_slope_mode(schema) : e.mode) : req.slope_mode;
  e.slope = cost_slope(result, schema, e.slope_mode).slope;
  if (e.slope == 0.0) throw Error("invalid_cost_slope", "cost slope of " + e.slope_mode + " is zero");
  e.wtp_yen = -e.delta_utility / e.slope;
  return e;
}

std::vector<WtpRequest> default_wtp_requests(const ExperimentSchema& schema) {
  std::vector<WtpRequest> out;
  const std::string shared_mode = default_shared_slope_mode(schema);
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& attr = schema.attributes[a];
    if (!attr.is_design_attribute() || attr.is_cost || attr.coding != Coding::effects) continue;
    if (attr.scope == AttributeScope::shared_across_alternatives) {
      for (std::size_t i = 0; i < attr.levels.size(); ++i) {
        for (std::size_t k = i + 1; k < attr.levels.size(); ++k) {
          out.push_back({attr.name, "", shared_mode, attr.levels[i].label, attr.levels[k].label});
        }
      }
      continue;
    }
    for (std::size_t j = 0; j < schema.alternatives.size(); ++j) {
      if (!schema.applies(a, j)) continue;
      const std::string& mode = schema.alternatives[j].id;
      const std::string slope_mode = schema.cost_attribute(mode) ? mode : shared_mode;
      out.push_back({attr.name, mode, slope_mode, std::nullopt, std::nullopt});
    }
  }
  return out;
}

double own_cost_elasticity(double slope, double price, double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw Error("invalid_probability", "baseline probability must lie strictly between 0 and 1");
  }
  return slope * price * (1.0 - probability);
}

ElasticityEntry own_cost_elasticity(const EstimationResult& result, const ExperimentSchema& schema,
                                    const std::string& mode, double price, double probability) {
  ElasticityEntry e;
  e.mode = mode;
  e.slope = cost_slope(result, schema, mode).slope;
  e.price = price;
  e.probability = probability;
  e.elasticity = own_cost_elasticity(e.slope, price, probability);
  return e;
}

std::vector<std::pair<double, double>> price_probability_grid(double slope, double base_price, double base_probability,
                                                              const std::vector<double>& prices) {
  if (!(base_probability > 0.0 && base_probability < 1.0)) {
    throw Error("invalid_probability", "baseline probability must lie strictly between 0 and 1");
  }
  // Logit of the own alternative against the fixed rest, shifted by the utility change.
  const double base_logit = std::log(base_probability / (1.0 - base_probability));
  std::vector<std::pair<double, double>> out;
  out.reserve(prices.size());
  for (double p : prices) {
    const double z = base_logit + slope * (p - base_price);
    out.emplace_back(p, 1.0 / (1.0 + std::exp(-z)));
  }
  return out;
}

} // namespace dce

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dce/result.hpp"
#include "dce/schema.hpp"

namespace dce {

struct LrTest {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// 2 (ll_full - ll_restricted) against a chi-square upper tail. Throws
/// Error("misordered_models") if ll_full < ll_restricted.
LrTest lr_test(double ll_restricted, double ll_full, double df);

/// Linearized cost sensitivity of one alternative: OLS of the level
/// coefficients (base level included as minus the sum of the others) on yen.
struct CostSlope {
  std::string mode;
  double slope = 0.0; // utility per yen
  double intercept = 0.0;
  double r_squared = 1.0;
  std::vector<double> yen;
  std::vector<double> coefficients;
};

CostSlope cost_slope(const EstimationResult& result, const ExperimentSchema& schema, const std::string& mode);
/// OLS on explicit points. Throws Error("invalid_cost_slope") for fewer than
/// two points or zero variance in x.
CostSlope ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Coefficient of one level; base levels of effects-coded groups are
/// implied as minus the sum of the estimated levels.
double level_coefficient(const EstimationResult& result, const ExperimentSchema& schema, const std::string& attribute,
                         const std::string& mode, const std::string& level);

/// Implied base-level coefficients of every effects-coded group in the result.
std::vector<std::pair<std::string, double>> implied_base_coefficients(const EstimationResult& result,
                                                                      const ExperimentSchema& schema);

struct WtpRequest {
  std::string attribute;  // schema attribute name ("date", "social")
  std::string mode;       // alternative the attribute is valued for; empty for shared attributes
  std::string slope_mode; // alternative whose cost slope converts utility to yen
  /// Level pair; defaults to base -> first level, which doubles a binary
  /// effects-coded coefficient.
  std::optional<std::string> from_level;
  std::optional<std::string> to_level;
};

struct WtpEntry {
  std::string attribute;
  std::string mode;
  std::string from_level;
  std::string to_level;
  double delta_utility = 0.0;
  std::string slope_mode;
  double slope = 0.0;
  double wtp_yen = 0.0;
};

/// wtp_yen = -delta_utility / slope. Throws Error("self_referential") for a
/// cost attribute.
WtpEntry wtp(const EstimationResult& result, const ExperimentSchema& schema, const WtpRequest& request);

/// First alternative (schema order) with a cost attribute; used for shared
/// attributes.
std::string default_shared_slope_mode(const ExperimentSchema& schema);

/// Every non-cost design attribute: first level against base for each
/// alternative it applies to (own slope), and every ordered level pair of
/// shared attributes (default shared slope).
std::vector<WtpRequest> default_wtp_requests(const ExperimentSchema& schema);

/// E = slope * price * (1 - P). Throws Error("invalid_probability") unless 0 < P < 1.
double own_cost_elasticity(double slope, double price, double probability);

struct ElasticityEntry {
  std::string mode;
  double slope = 0.0;
  double price = 0.0;
  double probability = 0.0;
  double elasticity = 0.0;
};

ElasticityEntry own_cost_elasticity(const EstimationResult& result, const ExperimentSchema& schema,
                                    const std::string& mode, double price, double probability);

/// Choice probability when the price moves from base_price, holding the
/// other alternatives' utilities fixed under linearized cost utility.
std::vector<std::pair<double, double>> price_probability_grid(double slope, double base_price, double base_probability,
                                                              const std::vector<double>& prices);

} // namespace dce

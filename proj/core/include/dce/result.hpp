#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dce/mixing.hpp"
#include "dce/numerics.hpp"

namespace dce {

struct FitStats {
  double rho2 = 0.0;
  double rho2_adj = 0.0;
};

/// rho2 = 1 - ll/ll0, rho2_adj = 1 - (ll - k)/ll0. Throws Error("invalid_fit")
/// if ll_null >= 0 or ll_final > 0.
FitStats fit_stats(double ll_final, double ll_null, std::size_t k);

struct EstimationResult {
  std::string model; // "mnl" or "mmnl"
  std::vector<std::string> names;
  Eigen::VectorXd params;
  Eigen::VectorXd std_errors; // NaN where unavailable
  Eigen::VectorXd t_stats;
  Eigen::VectorXd p_values;
  Eigen::MatrixXd covariance; // empty if the Hessian was not invertible
  bool std_errors_available = false;

  double ll_null = 0.0;
  double ll_final = 0.0;
  std::size_t k_params = 0;
  double rho2 = 0.0;
  double rho2_adj = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string status;
  std::vector<double> trace; // log-likelihood after each accepted iteration

  std::size_t n_respondents = 0;
  std::size_t n_tasks = 0;
  std::optional<MixingSpec> mixing;

  /// Yen value of each cost level keyed by cost prefix ("cost_drone"), in
  /// parameter order followed by the base level. Set by fixtures whose
  /// printed labels differ from the schema; postest prefers it when present.
  std::map<std::string, std::vector<double>> cost_levels;

  std::optional<std::size_t> find(const std::string& name) const;
  /// Throws Error("unknown_parameter").
  double estimate(const std::string& name) const;
};

/// Fills t-statistics, p-values and fit indices from params, covariance and
/// log-likelihoods.
void finalize_inference(EstimationResult& result);

/// Inverse of the negative log-likelihood Hessian at the optimum.
void attach_covariance(EstimationResult& result, const Eigen::MatrixXd& neg_hessian);

nlohmann::json result_to_json(const EstimationResult& result);
/// Accepts both full results and coefficient-only fixtures (no std_error,
/// no covariance). Throws Error("result_parse").
EstimationResult result_from_json(const nlohmann::json& j);
EstimationResult load_result(const std::string& path);

/// Aligned plain-text table: parameter, estimate, std. error, p-value, then
/// the fit block.
std::string format_result_table(const EstimationResult& result);

} // namespace dce

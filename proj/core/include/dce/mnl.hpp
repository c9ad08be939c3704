#pragma once

#include <optional>

#include <Eigen/Dense>

#include "dce/dataset.hpp"
#include "dce/numerics.hpp"
#include "dce/result.hpp"

namespace dce {

struct EstimateOptions {
  OptimizerOptions optimizer{};
  unsigned threads = 1;
  std::optional<Eigen::VectorXd> start;
  double hessian_step = 1e-5; // relative to |param| + 1
};

/// Softmax of rows * params with max subtraction. Throws
/// NumericalError("non_finite_utility").
Eigen::VectorXd mnl_probabilities(const Eigen::VectorXd& params, const Eigen::MatrixXd& rows);

double mnl_loglik(const Eigen::VectorXd& params, const CodedPanel& panel, unsigned threads = 1);
Eigen::VectorXd mnl_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, unsigned threads = 1);
/// Both at once; per-respondent terms are reduced in respondent order so the
/// result does not depend on `threads`.
double mnl_loglik_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, Eigen::VectorXd& grad,
                           unsigned threads = 1);

/// Equal-shares log-likelihood, -sum over tasks of ln(alternatives).
double null_loglik(const CodedPanel& panel);

/// Throws Error("degenerate_column") naming the first parameter whose column
/// never differs between alternatives of a task.
void require_identified(const CodedPanel& panel, const std::vector<std::string>& names);

EstimationResult estimate_mnl(const CodedPanel& panel, const ParameterIndex& index, const EstimateOptions& opts = {});

} // namespace dce

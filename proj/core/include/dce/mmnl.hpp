#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "dce/dataset.hpp"
#include "dce/mixing.hpp"
#include "dce/mnl.hpp"

namespace dce {

/// Standard-normal deviates per (individual, draw, random dimension). Held
/// fixed across optimizer iterations.
class MslDraws {
public:
  MslDraws(std::size_t n_individuals, std::size_t n_draws, std::size_t n_dims)
      : n_individuals_(n_individuals), n_draws_(n_draws), n_dims_(n_dims), z_(n_individuals * n_draws * n_dims) {}

  double operator()(std::size_t i, std::size_t r, std::size_t d) const { return z_[(i * n_draws_ + r) * n_dims_ + d]; }
  double& operator()(std::size_t i, std::size_t r, std::size_t d) { return z_[(i * n_draws_ + r) * n_dims_ + d]; }

  std::size_t n_individuals() const { return n_individuals_; }
  std::size_t n_draws() const { return n_draws_; }
  std::size_t n_dims() const { return n_dims_; }

private:
  std::size_t n_individuals_;
  std::size_t n_draws_;
  std::size_t n_dims_;
  std::vector<double> z_;
};

/// Halton points mapped through the inverse normal CDF, one prime per random
/// parameter. With antithetic pairing, draw 2m+1 is the negation of draw 2m.
/// With no random parameters a single (empty) draw is produced.
MslDraws make_msl_draws(const MixingSpec& mixing, std::size_t n_individuals);

/// Log per-task probabilities below this are clamped; clamped tasks
/// contribute nothing to the gradient.
inline constexpr double kLogProbFloor = -700.0;

/// Panel simulated log-likelihood. `params` holds the fixed part followed by
/// one SD per random column of `index`.
double msl_loglik(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                  const MslDraws& draws, unsigned threads = 1);
Eigen::VectorXd msl_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                             const MslDraws& draws, unsigned threads = 1);
double msl_loglik_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                           const MslDraws& draws, Eigen::VectorXd& grad, unsigned threads = 1);

/// Draw-averaged choice probabilities of one task, using the first n_draws
/// points of individual 0's Halton slice.
Eigen::VectorXd mmnl_predict(const Eigen::VectorXd& params, const Eigen::MatrixXd& rows, const ParameterIndex& index,
                             const MixingSpec& mixing, std::size_t n_draws);

/// Starts from the MNL estimates with every SD at 0.5 unless opts.start is
/// given. SDs are reported as absolute values.
EstimationResult estimate_mmnl(const CodedPanel& panel, const ParameterIndex& index, const MixingSpec& mixing,
                               const EstimateOptions& opts = {});

} // namespace dce

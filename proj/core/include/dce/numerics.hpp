#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dce {

// ---------------------------------------------------------------------------
// Halton sequences

struct HaltonConfig {
  std::vector<std::uint32_t> primes{2, 3};
  std::size_t drop = 10;
  std::size_t n_draws = 500;
  /// Random digit permutation per base (Braaten-Weller style); off by default.
  bool scramble = false;
  std::uint64_t scramble_seed = 0;
};

/// Throws dce::Error("invalid_halton_config") if the configuration is unusable.
void validate(const HaltonConfig& cfg);

bool is_prime(std::uint64_t n);

/// Radical inverse of `index` (>= 1) in a prime `base`.
double halton(std::uint64_t index, std::uint32_t base);

/// Radical inverse with the digits passed through `perm` (perm[0] must be 0).
double halton_scrambled(std::uint64_t index, std::uint32_t base,
                        std::span<const std::uint32_t> perm);

/// Dense [individual][draw][dimension] block of Halton points.
class HaltonMatrix {
public:
  HaltonMatrix(std::size_t n_individuals, std::size_t n_draws, std::size_t n_dims)
      : n_individuals_(n_individuals), n_draws_(n_draws), n_dims_(n_dims),
        values_(n_individuals * n_draws * n_dims) {}

  double operator()(std::size_t individual, std::size_t draw, std::size_t dim) const {
    return values_[(individual * n_draws_ + draw) * n_dims_ + dim];
  }
  double& operator()(std::size_t individual, std::size_t draw, std::size_t dim) {
    return values_[(individual * n_draws_ + draw) * n_dims_ + dim];
  }

  std::size_t n_individuals() const { return n_individuals_; }
  std::size_t n_draws() const { return n_draws_; }
  std::size_t n_dims() const { return n_dims_; }
  const std::vector<double>& values() const { return values_; }

  bool operator==(const HaltonMatrix&) const = default;

private:
  std::size_t n_individuals_;
  std::size_t n_draws_;
  std::size_t n_dims_;
  std::vector<double> values_;
};

/// Individual i receives indices [drop + i*n_draws + 1, drop + (i+1)*n_draws]
/// of one global sequence per dimension; dimension d uses primes[d].
HaltonMatrix halton_matrix(const HaltonConfig& cfg, std::size_t n_individuals);

// ---------------------------------------------------------------------------
// Normal distribution

/// Inverse standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
/// Throws dce::Error("domain_error") unless 0 < u < 1.
double inv_normal_cdf(double u);

double normal_cdf(double x);

/// Two-sided p-value of a standard-normal test statistic.
double two_sided_normal_p(double z);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_upper_tail(double statistic, double df);

// ---------------------------------------------------------------------------
// Derivatives

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using GradientFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central differences per coordinate with absolute step h.
/// Throws dce::Error("non_finite") naming the coordinate on a bad evaluation.
Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& x, double h);

/// Symmetrized central-difference Jacobian of an analytic gradient, with
/// step rel_step * (|x_i| + 1) per coordinate.
Eigen::MatrixXd finite_diff_hessian(const GradientFunction& grad, const Eigen::VectorXd& x,
                                    double rel_step = 1e-5);

// ---------------------------------------------------------------------------
// Quasi-Newton minimization

struct OptimizerOptions {
  double gradient_tolerance = 1e-6; // relative gradient, see bfgs_minimize
  double step_tolerance = 1e-12;    // infinity norm of the accepted step
  int max_iterations = 1000;
  double sufficient_decrease = 1e-4;
  double curvature = 0.9;
  int max_line_search_evals = 40;
};

void validate(const OptimizerOptions& opts);

enum class OptimizerStatus {
  converged,
  max_iterations,
  step_tolerance,
  line_search_failed,
  non_finite,
};

std::string to_string(OptimizerStatus status);

struct OptimizerResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  OptimizerStatus status = OptimizerStatus::max_iterations;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> trace; // objective after each accepted iteration

  bool converged() const { return status == OptimizerStatus::converged; }
};

/// Objective returning f(x) and writing the gradient into `grad`.
using DifferentiableFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// BFGS with a strong-Wolfe line search. Converges when
/// max_k |g_k| max(|x_k|, 1) / max(|f|, 1) <= gradient_tolerance.
/// Throws dce::NumericalError if the objective or gradient is non-finite at x0.
OptimizerResult bfgs_minimize(const DifferentiableFunction& fg, const Eigen::VectorXd& x0,
                              const OptimizerOptions& opts = {});

OptimizerResult bfgs_minimize(const ScalarFunction& f, const GradientFunction& grad,
                              const Eigen::VectorXd& x0, const OptimizerOptions& opts = {});

// ---------------------------------------------------------------------------
// Misc

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(std::span<const double> v);

/// Runs body(i) for i in [0, n) over `threads` workers with a static partition.
/// Callers write into per-index slots and reduce in index order afterwards.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Worker count: DCE_THREADS if set, otherwise `requested` (0 = logical cores).
unsigned resolve_threads(unsigned requested);

} // namespace dce

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dce/error.hpp"
#include "dce/mnl.hpp"
#include "test_support.hpp"

namespace {

using dce::CodedPanel;

double naive_loglik(const Eigen::VectorXd& b, const CodedPanel& p) {
  double ll = 0.0;
  for (const auto& r : p.respondents) {
    for (const auto& t : r.tasks) {
      double denom = 0.0;
      for (Eigen::Index j = 0; j < t.rows.rows(); ++j) denom += std::exp(t.rows.row(j).dot(b));
      ll += t.rows.row(static_cast<Eigen::Index>(t.chosen)).dot(b) - std::log(denom);
    }
  }
  return ll;
}

// Closed-form MNL Hessian: -sum_t sum_j P_j (x_j - xbar)(x_j - xbar)'.
Eigen::MatrixXd analytic_hessian(const Eigen::VectorXd& b, const CodedPanel& p) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(b.size(), b.size());
  for (const auto& r : p.respondents) {
    for (const auto& t : r.tasks) {
      Eigen::VectorXd e = (t.rows * b).array().exp();
      e /= e.sum();
      const Eigen::VectorXd xbar = t.rows.transpose() * e;
      for (Eigen::Index j = 0; j < t.rows.rows(); ++j) {
        const Eigen::VectorXd d = t.rows.row(j).transpose() - xbar;
        h -= e[j] * d * d.transpose();
      }
    }
  }
  return h;
}

// Panel of binary tasks with a single ASC column: `a` picks of the first
// alternative and `b` of the second.
CodedPanel asc_panel(int a, int b, std::size_t n_alt = 2) {
  CodedPanel p;
  p.width = n_alt - 1;
  p.n_alternatives = n_alt;
  dce::CodedRespondent r;
  r.id = "all";
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_alt), static_cast<Eigen::Index>(n_alt - 1));
  for (std::size_t j = 0; j + 1 < n_alt; ++j) rows(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
  for (int i = 0; i < a; ++i) r.tasks.push_back({rows, 0});
  for (int i = 0; i < b; ++i) r.tasks.push_back({rows, n_alt - 1});
  p.respondents.push_back(r);
  return p;
}

dce::ParameterIndex asc_index(std::size_t n) {
  std::vector<dce::ParameterInfo> info;
  for (std::size_t i = 0; i < n; ++i) {
    dce::ParameterInfo p;
    p.name = "asc_" + std::to_string(i);
    p.kind = dce::ParamKind::asc;
    info.push_back(p);
  }
  return dce::ParameterIndex(info, n);
}

TEST(Probabilities, SoftmaxOracle) {
  Eigen::MatrixXd rows(3, 2);
  rows << 1, 0.5, -1, 2, 0, 0;
  const Eigen::Vector2d b(0.3, -0.4);
  const double v0 = 0.3 - 0.2, v1 = -0.3 - 0.8, v2 = 0.0;
  const double den = std::exp(v0) + std::exp(v1) + std::exp(v2);
  const auto p = dce::mnl_probabilities(b, rows);
  EXPECT_NEAR(p[0], std::exp(v0) / den, 1e-15);
  EXPECT_NEAR(p[1], std::exp(v1) / den, 1e-15);
  EXPECT_NEAR(p[2], std::exp(v2) / den, 1e-15);
}

TEST(Probabilities, StableAtExtremeUtilities) {
  Eigen::MatrixXd rows(2, 1);
  rows << 1000, 0;
  const auto p = dce::mnl_probabilities(Eigen::VectorXd::Ones(1), rows);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_LT(p[1], 1e-300);
  rows(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(dce::mnl_probabilities(Eigen::VectorXd::Ones(1), rows), dce::NumericalError);
}

TEST(LogLik, MatchesNaiveSumAndNullIdentity) {
  const auto panel = dce::testing::simulated_panel(30, 4);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::VectorXd b(static_cast<Eigen::Index>(panel.width));
  for (auto& x : b) x = u(rng);
  EXPECT_NEAR(dce::mnl_loglik(b, panel), naive_loglik(b, panel), 1e-9);
  const double null_oracle = -static_cast<double>(panel.n_tasks()) * std::log(3.0);
  EXPECT_NEAR(dce::null_loglik(panel), null_oracle, 1e-9);
  EXPECT_NEAR(dce::mnl_loglik(Eigen::VectorXd::Zero(b.size()), panel), null_oracle, 1e-9);
}

TEST(Gradient, MatchesCentralDifferences) {
  const auto panel = dce::testing::simulated_panel(20, 5);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd b(static_cast<Eigen::Index>(panel.width));
    for (auto& x : b) x = u(rng);
    const Eigen::VectorXd g = dce::mnl_gradient(b, panel);
    for (Eigen::Index k = 0; k < b.size(); ++k) {
      const double h = 1e-5 * (std::fabs(b[k]) + 1.0);
      Eigen::VectorXd hi = b, lo = b;
      hi[k] += h;
      lo[k] -= h;
      const double fd = (naive_loglik(hi, panel) - naive_loglik(lo, panel)) / (2.0 * h);
      EXPECT_NEAR(g[k], fd, 1e-6 * std::max(1.0, std::fabs(fd))) << "column " << k;
    }
  }
}

TEST(Gradient, IndependentOfThreadCount) {
  const auto panel = dce::testing::simulated_panel(40, 6);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(panel.width), -0.4, 0.4);
  Eigen::VectorXd g1, g4;
  const double l1 = dce::mnl_loglik_gradient(b, panel, g1, 1);
  const double l4 = dce::mnl_loglik_gradient(b, panel, g4, 4);
  EXPECT_EQ(l1, l4);
  EXPECT_EQ(g1, g4);
}

// The stopping rule bounds |g| by 1e-6 |LL|, so |asc - exact| <= 1e-6 |LL| / H,
// about 3e-6 for these panels.
constexpr double kAscTol = 1e-5;

TEST(Estimate, BinaryAscClosedForm) {
  const auto r = dce::estimate_mnl(asc_panel(75, 25), asc_index(1));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.params[0], std::log(3.0), kAscTol);
  // Var(asc) = 1 / (n p (1 - p)).
  EXPECT_NEAR(r.std_errors[0], std::sqrt(1.0 / (100 * 0.75 * 0.25)), 1e-5);
  const double ll = 75 * std::log(0.75) + 25 * std::log(0.25);
  EXPECT_NEAR(r.ll_final, ll, 1e-9);
  EXPECT_NEAR(r.ll_null, 100 * std::log(0.5), 1e-12);
}

TEST(Estimate, ThreeWayAscSharesClosedForm) {
  // 50 / 30 / 20 split: asc_j = ln(share_j / share_ref).
  auto p = asc_panel(50, 20, 3);
  Eigen::MatrixXd rows = p.respondents[0].tasks[0].rows;
  for (int i = 0; i < 30; ++i) p.respondents[0].tasks.push_back({rows, 1});
  const auto r = dce::estimate_mnl(p, asc_index(2));
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.params[0], std::log(50.0 / 20.0), kAscTol);
  EXPECT_NEAR(r.params[1], std::log(30.0 / 20.0), kAscTol);
}

TEST(Estimate, SimulatedPanelOptimumAndCovariance) {
  const auto panel = dce::testing::simulated_panel(150, 8);
  const auto idx = dce::build_parameter_index(dce::default_schema());
  const auto r = dce::estimate_mnl(panel, idx);
  ASSERT_TRUE(r.converged) << r.status;
  EXPECT_EQ(r.k_params, 38u);
  EXPECT_EQ(r.names, idx.names());
  EXPECT_LT(dce::mnl_gradient(r.params, panel).cwiseAbs().maxCoeff(), 1e-2);
  ASSERT_TRUE(r.std_errors_available);
  const Eigen::MatrixXd cov = (-analytic_hessian(r.params, panel)).inverse();
  for (Eigen::Index k = 0; k < r.params.size(); ++k) {
    EXPECT_NEAR(r.std_errors[k], std::sqrt(cov(k, k)), 1e-4 * std::sqrt(cov(k, k))) << r.names[k];
    EXPECT_NEAR(r.t_stats[k], r.params[k] / r.std_errors[k], 1e-12);
  }
  EXPECT_NEAR(r.rho2, 1.0 - r.ll_final / r.ll_null, 1e-14);
  EXPECT_NEAR(r.rho2_adj, 1.0 - (r.ll_final - 38.0) / r.ll_null, 1e-14);
  // The log-likelihood trace is non-decreasing.
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
}

TEST(Estimate, DegenerateColumnNamed) {
  auto p = asc_panel(10, 10, 3);
  for (auto& t : p.respondents[0].tasks) t.rows.col(1).setZero();
  try {
    dce::estimate_mnl(p, asc_index(2));
    FAIL();
  } catch (const dce::Error& e) {
    EXPECT_EQ(e.code(), "degenerate_column");
    EXPECT_NE(std::string(e.what()).find("asc_1"), std::string::npos);
  }
}

TEST(Estimate, EmptyPanelAndBadStartRejected) {
  dce::CodedPanel empty;
  empty.width = 1;
  EXPECT_THROW(dce::estimate_mnl(empty, asc_index(1)), dce::Error);
  dce::EstimateOptions opts;
  opts.start = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(dce::estimate_mnl(asc_panel(3, 1), asc_index(1), opts), dce::Error);
}

} // namespace

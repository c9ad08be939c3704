#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dce/error.hpp"
#include "dce/postest.hpp"
#include "test_support.hpp"

namespace {

using nlohmann::json;

json raw_fixture(const std::string& name) {
  std::ifstream in(dce::testing::source_path("fixtures/" + name));
  return json::parse(in);
}

double coef(const json& j, const std::string& name) { return j["parameters"][name]["estimate"].get<double>(); }

// OLS slope of the three printed cost coefficients plus the implied base level
// against the yen labels, straight from the fixture file.
double fixture_slope(const json& j, const std::string& prefix) {
  const auto yen = j["cost_levels"][prefix].get<std::vector<double>>();
  std::vector<double> b;
  const auto& order = j["parameter_order"];
  for (const auto& n : order) {
    const std::string s = n.get<std::string>();
    if (s.rfind(prefix + "[", 0) == 0) b.push_back(coef(j, s));
  }
  b.push_back(-(b[0] + b[1] + b[2]));
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    mx += yen[i] / 4;
    my += b[i] / 4;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (yen[i] - mx) * (b[i] - my);
    sxx += (yen[i] - mx) * (yen[i] - mx);
  }
  return sxy / sxx;
}

TEST(FitStats, FormulaAndErrors) {
  const auto f = dce::fit_stats(-3641.33, -4640.54, 38);
  EXPECT_NEAR(f.rho2, 1.0 - 3641.33 / 4640.54, 1e-15);
  EXPECT_NEAR(f.rho2_adj, 1.0 - (3641.33 + 38) / 4640.54, 1e-15);
  EXPECT_THROW(dce::fit_stats(-1.0, 0.0, 1), dce::Error);
  EXPECT_THROW(dce::fit_stats(1.0, -10.0, 1), dce::Error);
}

TEST(LrTest, StatisticAndTail) {
  const auto t = dce::lr_test(-10.0, -7.0, 2);
  EXPECT_DOUBLE_EQ(t.statistic, 6.0);
  EXPECT_NEAR(t.p_value, std::exp(-3.0), 1e-15);
  EXPECT_THROW(dce::lr_test(-7.0, -10.0, 2), dce::Error);
  EXPECT_THROW(dce::lr_test(-10.0, -7.0, 0), dce::Error);
}

TEST(OlsSlope, ExactLineAndErrors) {
  const auto s = dce::ols_slope({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(s.slope, 2.0, 1e-15);
  EXPECT_NEAR(s.intercept, 1.0, 1e-14);
  EXPECT_NEAR(s.r_squared, 1.0, 1e-15);
  EXPECT_THROW(dce::ols_slope({1}, {1}), dce::Error);
  EXPECT_THROW(dce::ols_slope({2, 2, 2}, {1, 2, 3}), dce::Error);
}

TEST(CostSlope, MatchesFixtureOracle) {
  const auto j = raw_fixture("table4_mmnl.json");
  const auto r = dce::testing::table4_mmnl();
  const auto s = dce::default_schema();
  for (const char* mode : {"drone", "truck", "motorcycle"}) {
    const auto cs = dce::cost_slope(r, s, mode);
    EXPECT_NEAR(cs.slope, fixture_slope(j, std::string("cost_") + mode), 1e-15) << mode;
    EXPECT_EQ(cs.yen.size(), 4u);
    EXPECT_NEAR(cs.coefficients[0] + cs.coefficients[1] + cs.coefficients[2] + cs.coefficients[3], 0.0, 1e-15);
  }
}

TEST(CostSlope, FallsBackToSchemaYen) {
  auto r = dce::testing::table4_mmnl();
  r.cost_levels.clear();
  const auto cs = dce::cost_slope(r, dce::default_schema(), "drone");
  EXPECT_EQ(cs.yen, (std::vector<double>{1080, 880, 680, 480}));
}

TEST(Wtp, EffectsCodedBinaryIsDoubled) {
  const auto j = raw_fixture("table4_mmnl.json");
  const auto r = dce::testing::table4_mmnl();
  const auto s = dce::default_schema();
  const double slope = fixture_slope(j, "cost_drone");
  const auto e = dce::wtp(r, s, {"date", "drone", "drone", std::nullopt, std::nullopt});
  EXPECT_EQ(e.from_level, "day_after_tomorrow");
  EXPECT_EQ(e.to_level, "next_day");
  EXPECT_NEAR(e.delta_utility, 2.0 * coef(j, "date_drone[next_day]"), 1e-15);
  EXPECT_NEAR(e.wtp_yen, -2.0 * coef(j, "date_drone[next_day]") / slope, 1e-9);
}

TEST(Wtp, SharedAttributeLevelPair) {
  const auto j = raw_fixture("table4_mmnl.json");
  const auto r = dce::testing::table4_mmnl();
  const auto e = dce::wtp(r, dce::default_schema(), {"social", "", "drone", "neighbor_30", "neighbor_70"});
  const double d = coef(j, "social[neighbor_70]") - coef(j, "social[neighbor_30]");
  EXPECT_NEAR(e.wtp_yen, -d / fixture_slope(j, "cost_drone"), 1e-9);
  // Reversing the pair flips the sign.
  const auto back = dce::wtp(r, dce::default_schema(), {"social", "", "drone", "neighbor_70", "neighbor_30"});
  EXPECT_NEAR(back.wtp_yen, -e.wtp_yen, 1e-12);
}

TEST(Wtp, BaseLevelImpliedAsNegativeSum) {
  const auto j = raw_fixture("table4_mmnl.json");
  const auto r = dce::testing::table4_mmnl();
  const double fam70 = dce::level_coefficient(r, dce::default_schema(), "social", "", "family_70");
  EXPECT_NEAR(fam70, -(coef(j, "social[neighbor_30]") + coef(j, "social[neighbor_70]") + coef(j, "social[family_30]")),
              1e-15);
  const auto base = dce::implied_base_coefficients(r, dce::default_schema());
  bool found = false;
  for (const auto& [name, v] : base) {
    if (name == "social[family_70]") {
      found = true;
      EXPECT_NEAR(v, fam70, 1e-15);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Wtp, ErrorsForCostAndUnknownNames) {
  const auto r = dce::testing::table4_mmnl();
  const auto s = dce::default_schema();
  try {
    dce::wtp(r, s, {"cost_drone", "drone", "drone", std::nullopt, std::nullopt});
    FAIL();
  } catch (const dce::Error& e) {
    EXPECT_EQ(e.code(), "self_referential");
  }
  EXPECT_THROW(dce::wtp(r, s, {"colour", "drone", "drone", std::nullopt, std::nullopt}), dce::Error);
  EXPECT_THROW(dce::wtp(r, s, {"date", "drone", "drone", "tomorrow", std::nullopt}), dce::Error);
}

TEST(Wtp, DefaultRequestsCoverEveryAttribute) {
  const auto s = dce::default_schema();
  EXPECT_EQ(dce::default_shared_slope_mode(s), "drone");
  const auto reqs = dce::default_wtp_requests(s);
  // 3 dropoff + 3 date + 6 social pairs.
  EXPECT_EQ(reqs.size(), 12u);
  const auto r = dce::testing::table4_mmnl();
  for (const auto& q : reqs) EXPECT_TRUE(std::isfinite(dce::wtp(r, s, q).wtp_yen));
}

TEST(Elasticity, FormulaAndBounds) {
  EXPECT_NEAR(dce::own_cost_elasticity(-0.006, 700, 0.4), -0.006 * 700 * 0.6, 1e-15);
  EXPECT_THROW(dce::own_cost_elasticity(-0.006, 700, 1.0), dce::Error);
  EXPECT_THROW(dce::own_cost_elasticity(-0.006, 700, 0.0), dce::Error);
  const auto r = dce::testing::table4_mmnl();
  const auto e = dce::own_cost_elasticity(r, dce::default_schema(), "drone", 680, 0.25);
  EXPECT_NEAR(e.elasticity, e.slope * 680 * 0.75, 1e-15);
}

TEST(Elasticity, PriceGridShiftsTheLogit) {
  const double slope = -0.005, p0 = 0.3, base = 700;
  const auto grid = dce::price_probability_grid(slope, base, p0, {500, 700, 900});
  ASSERT_EQ(grid.size(), 3u);
  EXPECT_NEAR(grid[1].second, p0, 1e-15);
  for (const auto& [price, p] : grid) {
    const double logit = std::log(p0 / (1 - p0)) + slope * (price - base);
    EXPECT_NEAR(p, 1.0 / (1.0 + std::exp(-logit)), 1e-14);
  }
  // The analytic derivative of the grid matches the point elasticity.
  const double h = 1e-3;
  const auto g = dce::price_probability_grid(slope, base, p0, {base - h, base + h});
  const double numeric = (g[1].second - g[0].second) / (2 * h) * base / p0;
  EXPECT_NEAR(numeric, dce::own_cost_elasticity(slope, base, p0), 1e-6);
}

TEST(ResultJson, RoundTripKeepsInference) {
  auto r = dce::testing::table4_mnl();
  r.std_errors = Eigen::VectorXd::Constant(r.params.size(), 0.1);
  r.covariance = Eigen::MatrixXd::Identity(r.params.size(), r.params.size()) * 0.01;
  r.std_errors_available = true;
  dce::finalize_inference(r);
  const auto back = dce::result_from_json(dce::result_to_json(r));
  EXPECT_EQ(back.names, r.names);
  EXPECT_EQ(back.params, r.params);
  EXPECT_EQ(back.std_errors, r.std_errors);
  EXPECT_EQ(back.covariance, r.covariance);
  EXPECT_DOUBLE_EQ(back.ll_final, r.ll_final);
  EXPECT_EQ(back.cost_levels, r.cost_levels);
}

TEST(ResultJson, FixtureHasNoStandardErrors) {
  const auto r = dce::testing::table4_mmnl();
  EXPECT_FALSE(r.std_errors_available);
  EXPECT_TRUE(std::isnan(r.std_errors[0]));
  EXPECT_EQ(r.k_params, 40u);
  EXPECT_THROW(r.estimate("asc_bus"), dce::Error);
  EXPECT_THROW(dce::result_from_json(json::parse(R"({"model": "mnl"})")), dce::Error);
}

TEST(ResultTable, ListsEveryParameter) {
  const auto r = dce::testing::table4_mmnl();
  const std::string t = dce::format_result_table(r);
  for (const auto& n : r.names) EXPECT_NE(t.find(n), std::string::npos) << n;
  EXPECT_NE(t.find("-3367.430"), std::string::npos);
}

} // namespace

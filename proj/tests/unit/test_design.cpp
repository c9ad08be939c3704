#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dce/design.hpp"
#include "dce/error.hpp"
#include "test_support.hpp"

namespace {

using dce::BlockedDesign;

struct Column {
  std::size_t factor;
  std::vector<double> values;
};

// Effects-coded columns assembled directly from the run levels.
std::vector<Column> coded_columns(const dce::ExperimentSchema& s, const BlockedDesign& d) {
  std::vector<Column> cols;
  for (std::size_t f = 0; f < d.factors.size(); ++f) {
    const auto& attr = s.attributes[d.factors[f].attribute];
    const std::size_t w = attr.levels.size() - 1;
    for (std::size_t c = 0; c < w; ++c) {
      Column col{f, {}};
      for (const auto& run : d.runs) {
        const std::size_t l = run.levels[f];
        col.values.push_back(l == w ? -1.0 : (l == c ? 1.0 : 0.0));
      }
      cols.push_back(std::move(col));
    }
  }
  return cols;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(Factors, OneColumnPerAlternativeAttributePlusContext) {
  const auto f = dce::design_factors(dce::default_schema());
  // 4 attributes x 3 alternatives + product type.
  ASSERT_EQ(f.size(), 13u);
  EXPECT_EQ(f.back().column, "product_type");
  EXPECT_FALSE(f.back().alternative.has_value());
  std::set<std::string> names;
  for (const auto& x : f) names.insert(x.column);
  EXPECT_EQ(names.size(), f.size());
  EXPECT_TRUE(names.contains("drone.cost"));
}

TEST(FullFactorial, SizeAndOrdering) {
  const auto s = dce::default_schema();
  const auto ff = dce::full_factorial(s, "drone");
  // dropoff 2 x date 2 x cost 4 x social 4.
  ASSERT_EQ(ff.size(), 64u);
  EXPECT_EQ(ff[0], (std::vector<std::size_t>{0, 0, 0, 0}));
  EXPECT_EQ(ff[1], (std::vector<std::size_t>{0, 0, 0, 1}));
  EXPECT_EQ(ff.back(), (std::vector<std::size_t>{1, 1, 3, 3}));
  EXPECT_THROW(dce::full_factorial(s, "drone", 10), dce::Error);
}

TEST(Design, DefaultDesignIsBalancedAndOrthogonal) {
  const auto s = dce::default_schema();
  const auto& d = dce::testing::default_design();
  ASSERT_EQ(d.runs.size(), 64u);
  ASSERT_EQ(d.n_blocks(), 8u);

  for (std::size_t f = 0; f < d.factors.size(); ++f) {
    const std::size_t L = d.factors[f].n_levels;
    std::vector<int> counts(L, 0);
    for (const auto& r : d.runs) ++counts[r.levels[f]];
    for (int c : counts) EXPECT_EQ(c, static_cast<int>(64 / L)) << d.factors[f].column;

    for (const auto& block : d.blocks) {
      ASSERT_EQ(block.size(), 8u);
      std::vector<double> bc(L, 0.0);
      for (auto run : block) bc[d.runs[run].levels[f]] += 1.0;
      for (double c : bc) EXPECT_LE(std::fabs(c - 8.0 / L), 1.0) << d.factors[f].column;
    }
  }

  const auto cols = coded_columns(s, d);
  double worst = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      if (cols[i].factor == cols[j].factor) continue;
      worst = std::max(worst, std::fabs(pearson(cols[i].values, cols[j].values)));
    }
  }
  EXPECT_LE(worst, 0.05);
  EXPECT_NEAR(d.diagnostics.max_abs_column_correlation, worst, 1e-12);
  EXPECT_FALSE(d.diagnostics.singular);
}

TEST(Design, EveryRunInExactlyOneBlock) {
  const auto& d = dce::testing::default_design();
  std::vector<int> seen(d.runs.size(), 0);
  for (const auto& b : d.blocks)
    for (auto r : b) ++seen[r];
  for (int s : seen) EXPECT_EQ(s, 1);
  for (std::size_t b = 0; b < d.blocks.size(); ++b)
    for (auto r : d.blocks[b]) EXPECT_EQ(d.block_of(r), b);
}

TEST(Design, SameSeedSameDesign) {
  const auto s = dce::default_schema();
  const auto a = dce::select_fraction(s, 32, 9, 2000);
  const auto b = dce::select_fraction(s, 32, 9, 2000);
  EXPECT_EQ(a.runs, b.runs);
  dce::FractionOptions threaded;
  threaded.threads = 3;
  const auto c = dce::select_fraction(s, 32, 9, 2000, threaded);
  EXPECT_EQ(a.runs, c.runs);
}

TEST(Design, DiagnosticsRecomputeFromRuns) {
  const auto s = dce::default_schema();
  const auto& d = dce::testing::default_design();
  const auto again = dce::design_diagnostics(s, d);
  EXPECT_DOUBLE_EQ(again.d_efficiency, d.diagnostics.d_efficiency);
  EXPECT_DOUBLE_EQ(again.max_block_deviation, d.diagnostics.max_block_deviation);
  const Eigen::MatrixXd x = dce::coded_design_matrix(s, d);
  EXPECT_EQ(x.rows(), 64);
  EXPECT_EQ(static_cast<std::size_t>(x.cols()), coded_columns(s, d).size());
}

TEST(Design, RejectsBlocksThatDoNotDivideRuns) {
  const auto s = dce::default_schema();
  auto d = dce::select_fraction(s, 32, 1, 100);
  try {
    dce::block_design(d, 7, 1);
    FAIL() << "expected an error";
  } catch (const dce::Error& e) {
    EXPECT_EQ(e.code(), "blocks_do_not_divide_runs");
  }
}

TEST(Design, TooFewRunsRejected) {
  const auto s = dce::default_schema();
  ASSERT_GT(dce::minimum_runs(s), 8u);
  EXPECT_THROW(dce::select_fraction(s, 8, 1, 100), dce::Error);
}

TEST(DesignCsv, RoundTrip) {
  const auto s = dce::default_schema();
  const auto& d = dce::testing::default_design();
  std::stringstream buf;
  dce::write_design_csv(s, d, buf);
  const auto back = dce::read_design_csv(s, buf);
  EXPECT_EQ(back.runs, d.runs);
  EXPECT_EQ(back.blocks, d.blocks);
  EXPECT_EQ(back.factors, d.factors);
}

TEST(DesignCsv, UnknownLevelRejected) {
  const auto s = dce::default_schema();
  std::stringstream buf;
  dce::write_design_csv(s, dce::testing::default_design(), buf);
  std::string text = buf.str();
  const auto pos = text.find("next_day");
  text.replace(pos, 8, "someday!");
  std::stringstream bad(text);
  EXPECT_THROW(dce::read_design_csv(s, bad), dce::Error);
}

} // namespace

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "manifest.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run dce_run(std::initializer_list<std::string> args) {
  std::vector<std::string> store{"dce"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : store) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = dce::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "dce_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // A small design shared by the pipeline tests.
    const auto r = dce_run({"design", "-o", path("design.csv"), "--iters", "5000", "--restarts", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }
  static std::string path(const std::string& name) { return (dir_ / name).string(); }

  static fs::path dir_;
};

fs::path CliTest::dir_;

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(dce_run({"--help"}).code, 0);
  EXPECT_EQ(dce_run({}).code, 2);
  EXPECT_EQ(dce_run({"frobnicate"}).code, 2);
  EXPECT_EQ(dce_run({"estimate", "probit", "--data", "x.csv", "-o", "y.json"}).code, 2);
  EXPECT_EQ(dce_run({"postest", "wtp"}).code, 2);
}

TEST(Manifest, Sha256KnownVector) {
  const auto p = fs::temp_directory_path() / "dce_sha_abc.txt";
  std::ofstream(p) << "abc";
  EXPECT_EQ(dce::cli::sha256_file(p.string()), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove(p);
}

TEST_F(CliTest, DesignWritesDiagnosticsAndManifest) {
  const json diag = json::parse(slurp(path("design.csv.diagnostics.json")));
  EXPECT_EQ(diag["runs"], 64);
  EXPECT_EQ(diag["blocks"], 8);
  EXPECT_EQ(diag["max_level_deviation"], 0.0);
  const json m = json::parse(slurp(path("design.csv.manifest.json")));
  EXPECT_EQ(m["command"], "design");
  EXPECT_EQ(m["seeds"]["design"], 1);
  ASSERT_EQ(m["outputs"].size(), 2u);
  EXPECT_EQ(m["outputs"][0]["sha256"], dce::cli::sha256_file(path("design.csv")));
}

TEST_F(CliTest, DesignRejectsIndivisibleBlocks) {
  const auto r = dce_run({"design", "-o", path("bad.csv"), "--blocks", "7"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("blocks must divide runs"), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteReproducible) {
  for (const char* name : {"a.csv", "b.csv"}) {
    const auto r = dce_run({"simulate", "--design", path("design.csv"), "--fixture", "table4", "--n", "40", "--seed",
                            "9", "-o", path(name)});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_FALSE(slurp(path("a.csv")).empty());
}

TEST_F(CliTest, SimulateEstimateMnlPipeline) {
  ASSERT_EQ(dce_run({"simulate", "--design", path("design.csv"), "--fixture", "table4_mnl", "--n", "200", "-o",
                     path("choices.csv"), "--respondents-out", path("resp.csv")})
                .code,
            0);
  const auto r = dce_run({"estimate", "mnl", "--data", path("choices.csv"), "--respondents", path("resp.csv"), "-o",
                          path("mnl.json"), "--table", path("mnl.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("date_drone[next_day]"), std::string::npos);
  const json j = json::parse(slurp(path("mnl.json")));
  EXPECT_EQ(j["model"], "mnl");
  EXPECT_EQ(j["parameter_order"].size(), 38u);
  EXPECT_NEAR(j["fit"]["ll_null"].get<double>(), -1600.0 * std::log(3.0), 1e-6);
  EXPECT_EQ(j["screening"]["n_kept"], 200);
  EXPECT_TRUE(j["derived"].contains("social[family_70]"));
  EXPECT_EQ(j["manifest"], "mnl.json.manifest.json");
  EXPECT_TRUE(fs::exists(path("mnl.json.manifest.json")));
  EXPECT_EQ(slurp(path("mnl.txt")), r.out);

  // Results feed back into postest and the LR test.
  const auto fit = dce_run({"postest", "fit", "--result", path("mnl.json")});
  EXPECT_EQ(fit.code, 0);
  EXPECT_NE(fit.out.find("rho^2"), std::string::npos);
}

TEST_F(CliTest, NonConvergenceExitsThreeButWritesResult) {
  ASSERT_EQ(dce_run({"simulate", "--design", path("design.csv"), "--fixture", "table4_mnl", "--n", "50", "-o",
                     path("c50.csv"), "--respondents-out", path("r50.csv")})
                .code,
            0);
  const auto r = dce_run({"estimate", "mnl", "--data", path("c50.csv"), "--respondents", path("r50.csv"), "--max-iter",
                          "1", "-o", path("short.json")});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("did not converge"), std::string::npos);
  EXPECT_FALSE(json::parse(slurp(path("short.json")))["fit"]["converged"].get<bool>());
}

TEST_F(CliTest, InputErrorsExitTwo) {
  EXPECT_EQ(dce_run({"estimate", "mnl", "--data", path("missing.csv"), "-o", path("x.json")}).code, 2);
  std::ofstream(path("broken.csv")) << "respondent_id,task_id\n1,1\n";
  const auto r = dce_run({"estimate", "mnl", "--data", path("broken.csv"), "-o", path("x.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing_column"), std::string::npos);
  EXPECT_EQ(dce_run({"estimate", "mmnl", "--data", path("c50.csv"), "--random", "asc_bus", "-o", path("x.json")}).code,
            2);
}

TEST(CliPostest, WtpFromFixture) {
  const auto r = dce_run({"postest", "wtp", "--fixture", "table4"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* v : {"156.1", "47.2", "93.4", "29.7"}) EXPECT_NE(r.out.find(v), std::string::npos) << v;
  const auto one = dce_run({"postest", "wtp", "--fixture", "table4", "--attribute", "social", "--slope-mode", "drone",
                            "--from", "neighbor_30", "--to", "neighbor_70"});
  EXPECT_EQ(one.code, 0);
  EXPECT_NE(one.out.find("29.7"), std::string::npos);
  EXPECT_EQ(dce_run({"postest", "wtp", "--fixture", "table4", "--attribute", "cost_drone", "--mode", "drone"}).code, 2);
}

TEST(CliPostest, WtpJsonOutput) {
  const auto out = (fs::temp_directory_path() / "dce_wtp.json").string();
  ASSERT_EQ(dce_run({"postest", "wtp", "--fixture", "table4", "-o", out}).code, 0);
  const json j = json::parse(slurp(out));
  EXPECT_EQ(j["wtp"].size(), 12u);
  EXPECT_NEAR(j["cost_slopes"]["drone"]["slope"].get<double>(), -0.006264, 1e-6);
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));
  fs::remove(out);
  fs::remove(out + ".manifest.json");
}

TEST(CliPostest, FitLrElasticity) {
  const auto fit = dce_run({"postest", "fit", "--fixture", "table4_mnl"});
  EXPECT_NE(fit.out.find("0.2153"), std::string::npos);
  EXPECT_NE(fit.out.find("0.2071"), std::string::npos);

  const auto lr = dce_run({"postest", "lr", "--ll-restricted", "-3641.330", "--ll-full", "-3367.430", "--df", "2"});
  EXPECT_EQ(lr.code, 0);
  EXPECT_NE(lr.out.find("547.80"), std::string::npos);
  EXPECT_EQ(dce_run({"postest", "lr", "--ll-restricted", "-3367.43", "--ll-full", "-3641.33", "--df", "2"}).code, 2);

  const auto el = dce_run({"postest", "elasticity", "--price", "680", "--prob", "0.333333333333"});
  EXPECT_EQ(el.code, 0);
  EXPECT_NE(el.out.find("-2.840"), std::string::npos);
  EXPECT_NE(el.out.find("extension"), std::string::npos);
  EXPECT_EQ(dce_run({"postest", "elasticity", "--price", "680", "--prob", "1.5"}).code, 2);
}

TEST(CliPostest, ElasticityGrid) {
  const auto grid = (fs::temp_directory_path() / "dce_grid.csv").string();
  const auto r = dce_run({"postest", "elasticity", "--slope", "-0.005", "--price", "680", "--prob", "0.4",
                          "--emit-grid", grid, "--grid-step", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(grid);
  EXPECT_EQ(text.rfind("price,probability,elasticity\n", 0), 0u);
  // Drone cost levels 480..1080 in steps of 100.
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 8);
  EXPECT_NE(text.find("680.00,0.400000"), std::string::npos);
  fs::remove(grid);
  fs::remove(grid + ".manifest.json");
}

} // namespace

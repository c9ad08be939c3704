#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dce/dataset.hpp"
#include "dce/design.hpp"
#include "dce/error.hpp"
#include "dce/mmnl.hpp"
#include "dce/mnl.hpp"
#include "dce/postest.hpp"
#include "dce/result.hpp"
#include "dce/schema.hpp"
#include "dce/simulate.hpp"
#include "dce_fixtures.hpp"
#include "manifest.hpp"

namespace dce::cli {

namespace {

using nlohmann::json;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string basename_of(const std::string& path) { return std::filesystem::path(path).filename().string(); }

ExperimentSchema schema_from(const std::string& path) {
  ExperimentSchema s = path.empty() ? default_schema() : load_schema(path);
  require_valid(s);
  return s;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

/// Result source shared by the postest subcommands.
struct ResultSource {
  std::string result_path;
  std::string fixture;

  void attach(CLI::App* app) {
    app->add_option("--result", result_path, "Estimation result JSON");
    app->add_option("--fixture", fixture, "Shipped coefficients: table4 (mixed logit) or table4_mnl")
        ->check(CLI::IsMember({"table4", "table4_mmnl", "table4_mnl"}));
  }

  bool given() const { return !result_path.empty() || !fixture.empty(); }

  EstimationResult load() const {
    if (!result_path.empty() && !fixture.empty()) throw Error("usage", "give either --result or --fixture, not both");
    if (!result_path.empty()) return load_result(result_path);
    if (fixture == "table4" || fixture == "table4_mmnl") return result_from_json(json::parse(fixtures::table4_mmnl));
    if (fixture == "table4_mnl") return result_from_json(json::parse(fixtures::table4_mnl));
    throw Error("usage", "one of --result or --fixture is required");
  }

  std::string label() const { return result_path.empty() ? "fixture:" + fixture : result_path; }
};

// ---------------------------------------------------------------------------

struct DesignArgs {
  std::string schema;
  std::size_t runs = 64;
  std::size_t blocks = 8;
  std::uint64_t seed = 1;
  std::size_t iters = 100000;
  std::size_t restarts = 4;
  unsigned threads = 0;
  std::string out;
  std::string diagnostics;
};

json diagnostics_json(const BlockedDesign& d) {
  json balance = json::object();
  for (const auto& b : d.diagnostics.level_balance) balance[b.column] = b.max_deviation;
  return {
      {"runs", d.runs.size()},
      {"blocks", d.blocks.size()},
      {"seed", d.seed},
      {"level_balance", balance},
      {"max_level_deviation", d.diagnostics.max_level_deviation},
      {"max_block_deviation", d.diagnostics.max_block_deviation},
      {"max_abs_column_correlation", d.diagnostics.max_abs_column_correlation},
      {"d_efficiency", d.diagnostics.d_efficiency},
      {"singular", d.diagnostics.singular},
      {"warnings", d.warnings},
  };
}

int run_design(const DesignArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest("design", argv);
  const ExperimentSchema schema = schema_from(a.schema);
  if (!a.schema.empty()) manifest.add_input(a.schema);
  if (a.blocks == 0 || a.runs % a.blocks != 0) {
    throw Error("blocks_do_not_divide_runs",
                "blocks must divide runs (" + std::to_string(a.runs) + " runs, " + std::to_string(a.blocks) + " blocks)");
  }
  FractionOptions fo;
  fo.restarts = a.restarts;
  fo.threads = resolve_threads(a.threads);
  BlockedDesign d = select_fraction(schema, a.runs, a.seed, a.iters, fo);
  d = block_design(std::move(d), a.blocks, a.seed);

  {
    std::ofstream f(a.out);
    if (!f) throw Error("io_error", "cannot write '" + a.out + "'");
    write_design_csv(schema, d, f);
  }
  const std::string diag_path = a.diagnostics.empty() ? a.out + ".diagnostics.json" : a.diagnostics;
  const std::string manifest_path = RunManifest::path_for(a.out);
  json diag = diagnostics_json(d);
  diag["manifest"] = basename_of(manifest_path);
  write_json(diag_path, diag);

  manifest.add_seed("design", a.seed);
  manifest.add_config("runs", std::to_string(a.runs));
  manifest.add_config("blocks", std::to_string(a.blocks));
  manifest.add_config("iters", std::to_string(a.iters));
  manifest.add_config("restarts", std::to_string(a.restarts));
  manifest.add_output(a.out);
  manifest.add_output(diag_path);
  manifest.write(manifest_path);

  out << "design: " << d.runs.size() << " runs in " << d.blocks.size() << " blocks of " << d.runs.size() / d.blocks.size()
      << "\n"
      << "  max level deviation      " << d.diagnostics.max_level_deviation << "\n"
      << "  max block deviation      " << d.diagnostics.max_block_deviation << "\n"
      << "  max |column correlation| " << fmt("%.4f", d.diagnostics.max_abs_column_correlation) << "\n"
      << "  D-efficiency             " << fmt("%.6f", d.diagnostics.d_efficiency) << "\n";
  for (const auto& w : d.warnings) out << "  warning: " << w << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string schema;
  std::string design;
  std::string params;
  std::string fixture;
  long long n = 528;
  std::uint64_t seed = 1;
  std::string assignment = "balanced";
  unsigned threads = 0;
  std::string out;
  std::string respondents_out;
};

int run_simulate(const SimulateArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  RunManifest manifest("simulate", argv);
  if (a.n < 1) throw Error("invalid_sim_config", "--n must be at least 1");
  const ExperimentSchema schema = schema_from(a.schema);
  if (!a.schema.empty()) manifest.add_input(a.schema);

  std::ifstream din(a.design);
  if (!din) throw Error("io_error", "cannot open design '" + a.design + "'");
  manifest.add_input(a.design);
  SimConfig cfg;
  cfg.schema = schema;
  cfg.design = read_design_csv(schema, din);

  ResultSource src{a.params, a.fixture};
  const EstimationResult truth = src.load();
  if (!a.params.empty()) manifest.add_input(a.params);
  cfg.mixing = truth.mixing;
  const ParameterIndex index = cfg.mixing ? build_parameter_index(schema, *cfg.mixing) : build_parameter_index(schema);
  cfg.true_params = align_parameters(truth, index);
  cfg.n_respondents = static_cast<std::size_t>(a.n);
  cfg.seed = a.seed;
  cfg.assignment = a.assignment == "uniform" ? BlockAssignment::uniform : BlockAssignment::balanced;
  cfg.threads = resolve_threads(a.threads);

  const ChoiceDataset ds = simulate_dataset(cfg);
  {
    std::ofstream f(a.out);
    if (!f) throw Error("io_error", "cannot write '" + a.out + "'");
    write_choices_csv(ds, f);
  }
  manifest.add_output(a.out);
  if (!a.respondents_out.empty()) {
    std::ofstream f(a.respondents_out);
    if (!f) throw Error("io_error", "cannot write '" + a.respondents_out + "'");
    write_respondents_csv(ds, f);
    manifest.add_output(a.respondents_out);
  }
  manifest.add_seed("simulate", a.seed);
  manifest.add_config("n_respondents", std::to_string(a.n));
  manifest.add_config("assignment", a.assignment);
  manifest.add_config("params", src.label());
  manifest.write(RunManifest::path_for(a.out));

  out << "simulated " << ds.respondents.size() << " respondents, " << ds.n_tasks() << " tasks ("
      << a.assignment << " block assignment";
  if (cfg.mixing) out << ", random " << cfg.mixing->random_params.size() << " parameters";
  out << ")\n";
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string model;
  std::string schema;
  std::string data;
  std::string respondents;
  std::string screen = "incomplete";
  std::size_t block_size = 8;
  std::size_t draws = 500;
  std::string random = "asc_drone,asc_truck";
  std::size_t drop = 10;
  bool antithetic = false;
  bool scramble = false;
  std::uint64_t scramble_seed = 0;
  int max_iter = 1000;
  double gtol = 1e-6;
  unsigned threads = 0;
  std::string out;
  std::string table;
};

int run_estimate(const EstimateArgs& a, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunManifest manifest("estimate " + a.model, argv);
  const ExperimentSchema schema = schema_from(a.schema);
  if (!a.schema.empty()) manifest.add_input(a.schema);

  std::optional<MixingSpec> mixing;
  if (a.model == "mmnl") {
    MixingSpec m;
    m.random_params = split_list(a.random);
    m.halton.n_draws = a.draws;
    m.halton.drop = a.drop;
    m.halton.scramble = a.scramble;
    m.halton.scramble_seed = a.scramble_seed;
    m.antithetic = a.antithetic;
    mixing = m;
  }
  // Validates --random names before any data is read.
  const ParameterIndex index = mixing ? build_parameter_index(schema, *mixing) : build_parameter_index(schema);

  ChoiceDataset ds = load_choices(a.data, schema, a.respondents);
  manifest.add_input(a.data);
  if (!a.respondents.empty()) manifest.add_input(a.respondents);
  const ScreeningResult screened = screen_responses(ds, parse_screening_rules(a.screen, a.block_size));
  const auto& rep = screened.report;
  if (rep.n_kept < rep.n_input) {
    err << "screening removed " << rep.n_input - rep.n_kept << " of " << rep.n_input << " respondents (incomplete "
        << rep.incomplete << ", straight_line " << rep.straight_line << ", fast_completion " << rep.fast_completion
        << ")\n";
  }
  const CodedPanel panel = code_dataset(screened.dataset, build_parameter_index(schema));

  EstimateOptions opts;
  opts.threads = resolve_threads(a.threads);
  opts.optimizer.max_iterations = a.max_iter;
  opts.optimizer.gradient_tolerance = a.gtol;
  const EstimationResult r = mixing ? estimate_mmnl(panel, index, *mixing, opts) : estimate_mnl(panel, index, opts);

  const std::string manifest_path = RunManifest::path_for(a.out);
  json j = result_to_json(r);
  j["manifest"] = basename_of(manifest_path);
  j["screening"] = {{"rules", a.screen},
                    {"n_input", rep.n_input},
                    {"n_kept", rep.n_kept},
                    {"incomplete", rep.incomplete},
                    {"straight_line", rep.straight_line},
                    {"fast_completion", rep.fast_completion}};
  json derived = json::object();
  for (const auto& [name, v] : implied_base_coefficients(r, schema)) derived[name] = v;
  j["derived"] = derived;
  write_json(a.out, j);
  manifest.add_output(a.out);

  const std::string table = format_result_table(r);
  if (!a.table.empty()) {
    std::ofstream f(a.table);
    if (!f) throw Error("io_error", "cannot write '" + a.table + "'");
    f << table;
    manifest.add_output(a.table);
  }
  if (mixing) {
    manifest.add_config("draws", std::to_string(a.draws));
    manifest.add_config("random", a.random);
    manifest.add_config("drop", std::to_string(a.drop));
    manifest.add_config("antithetic", a.antithetic ? "true" : "false");
    if (a.scramble) manifest.add_seed("halton_scramble", a.scramble_seed);
  }
  manifest.add_config("screen", a.screen);
  manifest.write(manifest_path);

  out << table;
  if (!r.converged) {
    err << "estimation did not converge (" << r.status << " after " << r.iterations << " iterations); result written to "
        << a.out << "\n";
    return kNotConverged;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct WtpArgs {
  ResultSource source;
  std::string schema;
  std::string attribute;
  std::string mode;
  std::string slope_mode;
  std::string from_level;
  std::string to_level;
  std::string out;
};

json slope_json(const CostSlope& s) {
  return {{"slope", s.slope}, {"intercept", s.intercept}, {"r_squared", s.r_squared}, {"yen", s.yen},
          {"coefficients", s.coefficients}};
}

int run_wtp(const WtpArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const ExperimentSchema schema = schema_from(a.schema);
  const EstimationResult r = a.source.load();
  std::vector<WtpRequest> requests;
  if (!a.attribute.empty()) {
    WtpRequest q{a.attribute, a.mode, a.slope_mode, std::nullopt, std::nullopt};
    if (!a.from_level.empty()) q.from_level = a.from_level;
    if (!a.to_level.empty()) q.to_level = a.to_level;
    requests.push_back(q);
  } else {
    requests = default_wtp_requests(schema);
  }
  std::vector<WtpEntry> entries;
  for (const auto& q : requests) entries.push_back(wtp(r, schema, q));

  json slopes = json::object();
  for (const auto& alt : schema.alternatives) {
    if (schema.cost_attribute(alt.id)) slopes[alt.id] = slope_json(cost_slope(r, schema, alt.id));
  }

  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %-11s %-42s %9s %-11s %11s %9s\n", "attribute", "mode", "from -> to", "delta_u",
                "slope_mode", "slope", "wtp_yen");
  out << buf;
  json rows = json::array();
  for (const auto& e : entries) {
    const std::string pair = e.from_level + " -> " + e.to_level;
    std::snprintf(buf, sizeof buf, "%-20s %-11s %-42s %9.3f %-11s %11.7f %9.1f\n", e.attribute.c_str(),
                  e.mode.empty() ? "(shared)" : e.mode.c_str(), pair.c_str(), e.delta_utility, e.slope_mode.c_str(),
                  e.slope, e.wtp_yen);
    out << buf;
    rows.push_back({{"attribute", e.attribute},
                    {"mode", e.mode},
                    {"from_level", e.from_level},
                    {"to_level", e.to_level},
                    {"delta_utility", e.delta_utility},
                    {"slope_mode", e.slope_mode},
                    {"slope", e.slope},
                    {"wtp_yen", e.wtp_yen}});
  }
  if (!a.out.empty()) {
    RunManifest manifest("postest wtp", argv);
    if (!a.source.result_path.empty()) manifest.add_input(a.source.result_path);
    if (!a.schema.empty()) manifest.add_input(a.schema);
    const std::string manifest_path = RunManifest::path_for(a.out);
    write_json(a.out, {{"source", a.source.label()},
                       {"wtp", rows},
                       {"cost_slopes", slopes},
                       {"manifest", basename_of(manifest_path)}});
    manifest.add_output(a.out);
    manifest.write(manifest_path);
  }
  return kSuccess;
}

struct FitArgs {
  ResultSource source;
  std::string out;
};

int run_fit(const FitArgs& a, const std::vector<std::string>& argv, std::ostream& out) {
  const EstimationResult r = a.source.load();
  const FitStats fs = fit_stats(r.ll_final, r.ll_null, r.k_params);
  out << "model          " << r.model << "\n"
      << "LL(0)          " << fmt("%.3f", r.ll_null) << "\n"
      << "LL(beta)       " << fmt("%.3f", r.ll_final) << "\n"
      << "k              " << r.k_params << "\n"
      << "rho^2          " << fmt("%.4f", fs.rho2) << "\n"
      << "rho^2 adjusted " << fmt("%.4f", fs.rho2_adj) << "\n";
  if (!a.out.empty()) {
    RunManifest manifest("postest fit", argv);
    if (!a.source.result_path.empty()) manifest.add_input(a.source.result_path);
    const std::string manifest_path = RunManifest::path_for(a.out);
    write_json(a.out, {{"source", a.source.label()},
                       {"model", r.model},
                       {"ll_null", r.ll_null},
                       {"ll_final", r.ll_final},
                       {"k", r.k_params},
                       {"rho2", fs.rho2},
                       {"rho2_adj", fs.rho2_adj},
                       {"manifest", basename_of(manifest_path)}});
    manifest.add_output(a.out);
    manifest.write(manifest_path);
  }
  return kSuccess;
}

struct ElasticityArgs {
  ResultSource source;
  std::string schema;
  std::string mode;
  std::optional<double> slope;
  double price = 0.0;
  double prob = 0.0;
  std::string out;
  std::string grid;
  std::optional<double> grid_from;
  std::optional<double> grid_to;
  double grid_step = 10.0;
};

int run_elasticity(ElasticityArgs a, const std::vector<std::string>& argv, std::ostream& out) {
  const ExperimentSchema schema = schema_from(a.schema);
  std::string mode = a.mode.empty() ? default_shared_slope_mode(schema) : a.mode;
  std::string slope_source;
  double slope = 0.0;
  if (a.slope) {
    slope = *a.slope;
    slope_source = "given";
  } else {
    if (!a.source.given()) a.source.fixture = "table4";
    slope = cost_slope(a.source.load(), schema, mode).slope;
    slope_source = a.source.label();
  }
  const double e = own_cost_elasticity(slope, a.price, a.prob);
  out << "own-cost point elasticity (extension: slope * price * (1 - P))\n"
      << "  mode         " << mode << "\n"
      << "  slope        " << fmt("%.7f", slope) << " (" << slope_source << ")\n"
      << "  price        " << fmt("%.2f", a.price) << "\n"
      << "  probability  " << fmt("%.4f", a.prob) << "\n"
      << "  elasticity   " << fmt("%.3f", e) << "\n";

  RunManifest manifest("postest elasticity", argv);
  if (!a.source.result_path.empty()) manifest.add_input(a.source.result_path);
  if (!a.grid.empty()) {
    double lo = a.grid_from.value_or(NAN);
    double hi = a.grid_to.value_or(NAN);
    if (!a.grid_from || !a.grid_to) {
      const auto ca = schema.cost_attribute(mode);
      if (!ca) throw Error("missing_cost", "alternative '" + mode + "' has no cost levels; pass --grid-from/--grid-to");
      double mn = INFINITY;
      double mx = -INFINITY;
      for (const auto& lv : schema.attributes[*ca].levels) {
        if (!lv.value) continue;
        mn = std::min(mn, *lv.value);
        mx = std::max(mx, *lv.value);
      }
      if (!a.grid_from) lo = mn;
      if (!a.grid_to) hi = mx;
    }
    if (!(a.grid_step > 0.0) || !(hi >= lo)) throw Error("usage", "grid needs from <= to and a positive step");
    std::vector<double> prices;
    for (double p = lo; p <= hi + 1e-9; p += a.grid_step) prices.push_back(p);
    std::ofstream g(a.grid);
    if (!g) throw Error("io_error", "cannot write '" + a.grid + "'");
    g << "price,probability,elasticity\n";
    for (const auto& [p, prob] : price_probability_grid(slope, a.price, a.prob, prices)) {
      g << fmt("%.2f", p) << ',' << fmt("%.6f", prob) << ',' << fmt("%.6f", own_cost_elasticity(slope, p, prob)) << '\n';
    }
    g.close();
    manifest.add_output(a.grid);
  }
  if (!a.out.empty()) {
    write_json(a.out, {{"label", "extension"},
                       {"formula", "slope * price * (1 - probability)"},
                       {"mode", mode},
                       {"slope", slope},
                       {"slope_source", slope_source},
                       {"price", a.price},
                       {"probability", a.prob},
                       {"elasticity", e},
                       {"manifest", basename_of(RunManifest::path_for(a.out))}});
    manifest.add_output(a.out);
  }
  const std::string primary = !a.out.empty() ? a.out : a.grid;
  if (!primary.empty()) manifest.write(RunManifest::path_for(primary));
  return kSuccess;
}

struct LrArgs {
  std::string restricted;
  std::string full;
  std::optional<double> ll_restricted;
  std::optional<double> ll_full;
  std::optional<double> df;
};

int run_lr(const LrArgs& a, std::ostream& out) {
  double llr = 0.0;
  double llf = 0.0;
  double df = 0.0;
  if (!a.restricted.empty() && !a.full.empty()) {
    const EstimationResult r = load_result(a.restricted);
    const EstimationResult f = load_result(a.full);
    llr = r.ll_final;
    llf = f.ll_final;
    df = static_cast<double>(f.k_params) - static_cast<double>(r.k_params);
  } else if (a.ll_restricted && a.ll_full) {
    llr = *a.ll_restricted;
    llf = *a.ll_full;
  } else {
    throw Error("usage", "give --restricted and --full result files, or --ll-restricted and --ll-full");
  }
  if (a.df) df = *a.df;
  const LrTest t = lr_test(llr, llf, df);
  char p[64];
  std::snprintf(p, sizeof p, "%.3g", t.p_value);
  out << "likelihood-ratio test\n"
      << "  statistic  " << fmt("%.2f", t.statistic) << "\n"
      << "  df         " << t.df << "\n"
      << "  p-value    " << p << "\n";
  return kSuccess;
}

std::vector<std::string> collect_args(int argc, const char* const* argv) {
  std::vector<std::string> out;
  for (int i = 1; i < argc; ++i) out.emplace_back(argv[i]);
  return out;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete choice experiment toolkit: design, simulate, estimate, post-estimate", "dce"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DCE_VERSION);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = logical cores; DCE_THREADS overrides)");

  DesignArgs da;
  auto* design = app.add_subcommand("design", "Generate a blocked fractional-factorial design");
  design->add_option("--schema", da.schema, "Schema JSON (default: built-in drone delivery schema)");
  design->add_option("--runs", da.runs, "Number of choice scenarios");
  design->add_option("--blocks", da.blocks, "Number of blocks");
  design->add_option("--seed", da.seed, "Random seed");
  design->add_option("--iters", da.iters, "Swap evaluations per restart");
  design->add_option("--restarts", da.restarts, "Search restarts");
  design->add_option("--threads", da.threads, "Worker threads");
  design->add_option("-o,--out", da.out, "Design CSV")->required();
  design->add_option("--diagnostics", da.diagnostics, "Diagnostics JSON (default: <out>.diagnostics.json)");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Simulate choices from known parameters");
  simulate->add_option("--schema", sa.schema, "Schema JSON (default: built-in)");
  simulate->add_option("--design", sa.design, "Design CSV")->required();
  simulate->add_option("--params", sa.params, "Parameter/result JSON holding the true values");
  simulate->add_option("--fixture", sa.fixture, "Use shipped coefficients as truth (table4, table4_mnl)")
      ->check(CLI::IsMember({"table4", "table4_mmnl", "table4_mnl"}));
  simulate->add_option("--n", sa.n, "Respondents");
  simulate->add_option("--seed", sa.seed, "Random seed");
  simulate->add_option("--assignment", sa.assignment, "Block assignment")->check(CLI::IsMember({"balanced", "uniform"}));
  simulate->add_option("--threads", sa.threads, "Worker threads");
  simulate->add_option("-o,--out", sa.out, "Long-format choice CSV")->required();
  simulate->add_option("--respondents-out", sa.respondents_out, "Respondent-level CSV");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate an MNL or panel mixed logit model");
  estimate->add_option("model", ea.model, "mnl or mmnl")->required()->check(CLI::IsMember({"mnl", "mmnl"}));
  estimate->add_option("--schema", ea.schema, "Schema JSON (default: built-in)");
  estimate->add_option("--data", ea.data, "Long-format choice CSV")->required();
  estimate->add_option("--respondents", ea.respondents, "Respondent-level CSV with demographics");
  estimate->add_option("--screen", ea.screen, "Screening rules: incomplete,straight_line,fast_completion=<s> or none");
  estimate->add_option("--block-size", ea.block_size, "Tasks per complete respondent");
  estimate->add_option("--draws", ea.draws, "Halton draws per respondent (mmnl)");
  estimate->add_option("--random", ea.random, "Comma-separated random parameters (mmnl)");
  estimate->add_option("--drop", ea.drop, "Initial Halton points discarded (mmnl)");
  estimate->add_flag("--antithetic", ea.antithetic, "Pair each draw with its negation (mmnl)");
  estimate->add_flag("--scramble", ea.scramble, "Scramble Halton digits (mmnl)");
  estimate->add_option("--scramble-seed", ea.scramble_seed, "Seed of the digit permutation");
  estimate->add_option("--max-iter", ea.max_iter, "Optimizer iteration limit");
  estimate->add_option("--gtol", ea.gtol, "Relative gradient tolerance");
  estimate->add_option("--threads", ea.threads, "Worker threads");
  estimate->add_option("-o,--out", ea.out, "Result JSON")->required();
  estimate->add_option("--table", ea.table, "Plain-text coefficient table");

  auto* postest = app.add_subcommand("postest", "Post-estimation reports");
  postest->require_subcommand(1);

  WtpArgs wa;
  auto* wtp_cmd = postest->add_subcommand("wtp", "Willingness to pay in yen");
  wa.source.attach(wtp_cmd);
  wtp_cmd->add_option("--schema", wa.schema, "Schema JSON (default: built-in)");
  wtp_cmd->add_option("--attribute", wa.attribute, "Single attribute (default: all)");
  wtp_cmd->add_option("--mode", wa.mode, "Alternative the attribute belongs to");
  wtp_cmd->add_option("--slope-mode", wa.slope_mode, "Alternative whose cost slope is used");
  wtp_cmd->add_option("--from", wa.from_level, "Reference level (default: base level)");
  wtp_cmd->add_option("--to", wa.to_level, "Target level (default: first level)");
  wtp_cmd->add_option("-o,--out", wa.out, "WTP JSON");

  FitArgs fa;
  auto* fit_cmd = postest->add_subcommand("fit", "Rho-squared fit indices");
  fa.source.attach(fit_cmd);
  fit_cmd->add_option("-o,--out", fa.out, "Fit JSON");

  ElasticityArgs xa;
  auto* el_cmd = postest->add_subcommand("elasticity", "Own-cost point elasticity (extension)");
  xa.source.attach(el_cmd);
  el_cmd->add_option("--schema", xa.schema, "Schema JSON (default: built-in)");
  el_cmd->add_option("--slope-mode,--mode", xa.mode, "Alternative whose cost slope is used");
  el_cmd->add_option("--slope", xa.slope, "Cost slope in utility per yen (skips the result)");
  el_cmd->add_option("--price", xa.price, "Price in yen")->required();
  el_cmd->add_option("--prob", xa.prob, "Baseline choice probability")->required();
  el_cmd->add_option("-o,--out", xa.out, "Elasticity JSON");
  el_cmd->add_option("--emit-grid", xa.grid, "CSV of price/probability/elasticity points");
  el_cmd->add_option("--grid-from", xa.grid_from, "Lowest grid price (default: lowest cost level)");
  el_cmd->add_option("--grid-to", xa.grid_to, "Highest grid price (default: highest cost level)");
  el_cmd->add_option("--grid-step", xa.grid_step, "Grid spacing in yen");

  LrArgs la;
  auto* lr_cmd = postest->add_subcommand("lr", "Likelihood-ratio test between nested models");
  lr_cmd->add_option("--restricted", la.restricted, "Restricted model result JSON");
  lr_cmd->add_option("--full", la.full, "Full model result JSON");
  lr_cmd->add_option("--ll-restricted", la.ll_restricted, "Restricted log-likelihood");
  lr_cmd->add_option("--ll-full", la.ll_full, "Full log-likelihood");
  lr_cmd->add_option("--df", la.df, "Degrees of freedom (default: difference in k)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  // A global --threads applies wherever the subcommand left the default.
  for (unsigned* t : {&da.threads, &sa.threads, &ea.threads}) {
    if (*t == 0) *t = threads;
  }
  const std::vector<std::string> args = collect_args(argc, argv);
  try {
    if (*design) return run_design(da, args, out);
    if (*simulate) return run_simulate(sa, args, out);
    if (*estimate) return run_estimate(ea, args, out, err);
    if (*wtp_cmd) return run_wtp(wa, args, out);
    if (*fit_cmd) return run_fit(fa, args, out);
    if (*el_cmd) return run_elasticity(xa, args, out);
    if (*lr_cmd) return run_lr(la, out);
  } catch (const NumericalError& e) {
    err << "error [" << e.code() << "]: " << e.what() << "\n";
    return kNotConverged;
  } catch (const Error& e) {
    err << "error [" << e.code() << "]: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

} // namespace dce::cli

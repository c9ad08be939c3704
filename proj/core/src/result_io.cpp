#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dce/error.hpp"
#include "dce/result.hpp"

namespace dce {

using nlohmann::json;

FitStats fit_stats(double ll_final, double ll_null, std::size_t k) {
  if (!(ll_null < 0.0)) throw Error("invalid_fit", "null log-likelihood must be negative");
  if (ll_final > 0.0) throw Error("invalid_fit", "final log-likelihood must not be positive");
  return {1.0 - ll_final / ll_null, 1.0 - (ll_final - static_cast<double>(k)) / ll_null};
}

std::optional<std::size_t> EstimationResult::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

double EstimationResult::estimate(const std::string& name) const {
  auto i = find(name);
  if (!i) throw Error("unknown_parameter", "result has no parameter '" + name + "'");
  return params[static_cast<Eigen::Index>(*i)];
}

void attach_covariance(EstimationResult& r, const Eigen::MatrixXd& neg_hessian) {
  const Eigen::Index k = neg_hessian.rows();
  r.std_errors = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  r.covariance.resize(0, 0);
  r.std_errors_available = false;
  Eigen::LLT<Eigen::MatrixXd> llt(neg_hessian);
  if (llt.info() != Eigen::Success) return;
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(k, k));
  if (!cov.allFinite()) return;
  r.covariance = cov;
  r.std_errors = cov.diagonal().cwiseSqrt();
  r.std_errors_available = true;
}

void finalize_inference(EstimationResult& r) {
  const Eigen::Index k = r.params.size();
  if (r.std_errors.size() != k) r.std_errors = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  r.t_stats.resize(k);
  r.p_values.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double se = r.std_errors[i];
    if (std::isfinite(se) && se > 0.0) {
      r.t_stats[i] = r.params[i] / se;
      r.p_values[i] = two_sided_normal_p(r.t_stats[i]);
    } else {
      r.t_stats[i] = std::numeric_limits<double>::quiet_NaN();
      r.p_values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  r.k_params = static_cast<std::size_t>(k);
  const FitStats fs = fit_stats(r.ll_final, r.ll_null, r.k_params);
  r.rho2 = fs.rho2;
  r.rho2_adj = fs.rho2_adj;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

} // namespace

json result_to_json(const EstimationResult& r) {
  json params = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    params[r.names[i]] = {
        {"estimate", r.params[ii]},
        {"std_error", number_or_null(r.std_errors.size() > ii ? r.std_errors[ii] : NAN)},
        {"t_stat", number_or_null(r.t_stats.size() > ii ? r.t_stats[ii] : NAN)},
        {"p_value", number_or_null(r.p_values.size() > ii ? r.p_values[ii] : NAN)},
    };
  }
  json out = {
      {"model", r.model},
      {"parameter_order", r.names},
      {"parameters", std::move(params)},
      {"fit",
       {{"ll_null", r.ll_null},
        {"ll_final", r.ll_final},
        {"k", r.k_params},
        {"rho2", r.rho2},
        {"rho2_adj", r.rho2_adj},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"status", r.status},
        {"n_respondents", r.n_respondents},
        {"n_tasks", r.n_tasks}}},
  };
  if (r.covariance.size() > 0) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(r.covariance.cols()));
      for (Eigen::Index c = 0; c < r.covariance.cols(); ++c) row[static_cast<std::size_t>(c)] = r.covariance(i, c);
      rows.push_back(row);
    }
    out["covariance"] = std::move(rows);
  }
  if (r.mixing) {
    std::vector<double> sds;
    for (const auto& p : r.mixing->random_params) {
      auto i = r.find("sd_" + p);
      sds.push_back(i ? r.params[static_cast<Eigen::Index>(*i)] : NAN);
    }
    out["mixing"] = {
        {"random_params", r.mixing->random_params},
        {"sds", sds},
        {"distribution", "normal"},
        {"n_draws", r.mixing->halton.n_draws},
        {"primes", r.mixing->halton.primes},
        {"drop", r.mixing->halton.drop},
        {"scrambled", r.mixing->halton.scramble},
        {"antithetic", r.mixing->antithetic},
    };
  }
  if (!r.cost_levels.empty()) out["cost_levels"] = r.cost_levels;
  return out;
}

EstimationResult result_from_json(const json& j) {
  try {
    EstimationResult r;
    r.model = j.value("model", std::string("mnl"));
    const json& params = j.at("parameters");
    if (j.contains("parameter_order")) {
      r.names = j.at("parameter_order").get<std::vector<std::string>>();
    } else {
      for (const auto& [name, _] : params.items()) r.names.push_back(name);
    }
    const auto k = static_cast<Eigen::Index>(r.names.size());
    r.params.resize(k);
    r.std_errors.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const std::string& name = r.names[static_cast<std::size_t>(i)];
      if (!params.contains(name)) throw Error("result_parse", "parameter_order lists '" + name + "' without an entry");
      const json& p = params.at(name);
      r.params[i] = p.is_number() ? p.get<double>() : p.at("estimate").get<double>();
      r.std_errors[i] = p.is_object() ? number_from(p, "std_error") : NAN;
    }
    r.std_errors_available = r.std_errors.allFinite();
    if (j.contains("covariance")) {
      const auto rows = j.at("covariance").get<std::vector<std::vector<double>>>();
      r.covariance.resize(k, k);
      if (static_cast<Eigen::Index>(rows.size()) != k) throw Error("result_parse", "covariance has wrong dimension");
      for (Eigen::Index a = 0; a < k; ++a) {
        if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)].size()) != k) {
          throw Error("result_parse", "covariance has wrong dimension");
        }
        for (Eigen::Index b = 0; b < k; ++b) r.covariance(a, b) = rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      }
    }
    if (j.contains("fit")) {
      const json& fit = j.at("fit");
      r.ll_null = fit.value("ll_null", 0.0);
      r.ll_final = fit.value("ll_final", 0.0);
      r.k_params = fit.value("k", r.names.size());
      r.converged = fit.value("converged", true);
      r.iterations = fit.value("iterations", 0);
      r.status = fit.value("status", std::string{});
      r.n_respondents = fit.value("n_respondents", std::size_t{0});
      r.n_tasks = fit.value("n_tasks", std::size_t{0});
      if (r.ll_null < 0.0 && r.ll_final <= 0.0) {
        const FitStats fs = fit_stats(r.ll_final, r.ll_null, r.k_params);
        r.rho2 = fs.rho2;
        r.rho2_adj = fs.rho2_adj;
      }
    }
    r.t_stats.resize(k);
    r.p_values.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double se = r.std_errors[i];
      const bool ok = std::isfinite(se) && se > 0.0;
      r.t_stats[i] = ok ? r.params[i] / se : NAN;
      const json& p = params.at(r.names[static_cast<std::size_t>(i)]);
      const double printed = p.is_object() ? number_from(p, "p_value") : NAN;
      r.p_values[i] = std::isfinite(printed) ? printed : (ok ? two_sided_normal_p(r.t_stats[i]) : NAN);
    }
    if (j.contains("mixing")) {
      const json& m = j.at("mixing");
      MixingSpec spec;
      spec.random_params = m.at("random_params").get<std::vector<std::string>>();
      spec.halton.n_draws = m.value("n_draws", spec.halton.n_draws);
      spec.halton.primes = m.value("primes", spec.halton.primes);
      spec.halton.drop = m.value("drop", spec.halton.drop);
      spec.halton.scramble = m.value("scrambled", false);
      spec.antithetic = m.value("antithetic", false);
      r.mixing = spec;
    }
    if (j.contains("cost_levels")) {
      r.cost_levels = j.at("cost_levels").get<std::map<std::string, std::vector<double>>>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error("result_parse", std::string("malformed result JSON: ") + e.what());
  }
}

EstimationResult load_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open result file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("result_parse", "result file '" + path + "' is not valid JSON: " + e.what());
  }
  return result_from_json(j);
}

std::string format_result_table(const EstimationResult& r) {
  std::size_t w = 10;
  for (const auto& n : r.names) w = std::max(w, n.size());
  std::string out;
  char buf[256];
  auto cell = [&](double v, const char* fmt) {
    if (!std::isfinite(v)) return std::string("-");
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %9s\n", static_cast<int>(w), "parameter", "coef", "std.err", "p-value");
  out += buf;
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    std::snprintf(buf, sizeof buf, "%-*s %10s %10s %9s\n", static_cast<int>(w), r.names[i].c_str(),
                  cell(r.params[ii], "%.3f").c_str(), cell(r.std_errors.size() > ii ? r.std_errors[ii] : NAN, "%.3f").c_str(),
                  cell(r.p_values.size() > ii ? r.p_values[ii] : NAN, "%.3f").c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "\nLL(0)          %12.3f\nLL(beta)       %12.3f\nk              %12zu\nrho^2          %12.4f\n"
                "rho^2 adjusted %12.4f\nconverged      %12s\n",
                r.ll_null, r.ll_final, r.k_params, r.rho2, r.rho2_adj, r.converged ? "yes" : "no");
  out += buf;
  return out;
}

} // namespace dce

#include "dce/mnl.hpp"

#include <cmath>

#include "dce/error.hpp"

namespace dce {

Eigen::VectorXd mnl_probabilities(const Eigen::VectorXd& params, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd v = rows * params;
  if (!v.allFinite()) throw NumericalError("non_finite_utility", "utility is not finite");
  v.array() -= v.maxCoeff();
  Eigen::VectorXd p = v.array().exp();
  return p / p.sum();
}

namespace {

void check_width(const Eigen::VectorXd& params, const CodedPanel& panel) {
  if (static_cast<std::size_t>(params.size()) != panel.width) {
    throw Error("dimension_mismatch", "parameter vector has " + std::to_string(params.size()) +
                                          " entries, panel is coded for " + std::to_string(panel.width));
  }
}

// Log-likelihood of one respondent; adds its score into `grad` when non-null.
double respondent_loglik(const Eigen::VectorXd& params, const CodedRespondent& r, Eigen::VectorXd* grad) {
  double ll = 0.0;
  for (std::size_t t = 0; t < r.tasks.size(); ++t) {
    const CodedTask& task = r.tasks[t];
    Eigen::VectorXd v = task.rows * params;
    if (!v.allFinite()) {
      throw NumericalError("non_finite_utility", "utility is not finite for respondent " + r.id + " task " +
                                                     std::to_string(t + 1));
    }
    const double vmax = v.maxCoeff();
    const Eigen::VectorXd e = (v.array() - vmax).exp();
    const double s = e.sum();
    const auto c = static_cast<Eigen::Index>(task.chosen);
    ll += v[c] - vmax - std::log(s);
    if (grad) {
      *grad += task.rows.row(c).transpose();
      *grad -= task.rows.transpose() * (e / s);
    }
  }
  return ll;
}

} // namespace

double mnl_loglik_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, Eigen::VectorXd& grad,
                           unsigned threads) {
  check_width(params, panel);
  const std::size_t n = panel.respondents.size();
  std::vector<double> ll(n);
  std::vector<Eigen::VectorXd> g(n);
  parallel_for(n, threads, [&](std::size_t i) {
    g[i] = Eigen::VectorXd::Zero(params.size());
    ll[i] = respondent_loglik(params, panel.respondents[i], &g[i]);
  });
  grad = Eigen::VectorXd::Zero(params.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ll[i];
    grad += g[i];
  }
  return total;
}

double mnl_loglik(const Eigen::VectorXd& params, const CodedPanel& panel, unsigned threads) {
  check_width(params, panel);
  const std::size_t n = panel.respondents.size();
  std::vector<double> ll(n);
  parallel_for(n, threads, [&](std::size_t i) { ll[i] = respondent_loglik(params, panel.respondents[i], nullptr); });
  double total = 0.0;
  for (double v : ll) total += v;
  return total;
}

Eigen::VectorXd mnl_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, unsigned threads) {
  Eigen::VectorXd g;
  mnl_loglik_gradient(params, panel, g, threads);
  return g;
}

double null_loglik(const CodedPanel& panel) {
  double ll = 0.0;
  for (const auto& r : panel.respondents) {
    for (const auto& t : r.tasks) ll -= std::log(static_cast<double>(t.rows.rows()));
  }
  return ll;
}

void require_identified(const CodedPanel& panel, const std::vector<std::string>& names) {
  const auto k = static_cast<Eigen::Index>(panel.width);
  std::vector<bool> varies(panel.width, false);
  for (const auto& r : panel.respondents) {
    for (const auto& t : r.tasks) {
      for (Eigen::Index c = 0; c < k; ++c) {
        if (varies[static_cast<std::size_t>(c)]) continue;
        const auto col = t.rows.col(c);
        if (col.maxCoeff() != col.minCoeff()) varies[static_cast<std::size_t>(c)] = true;
      }
    }
  }
  for (std::size_t c = 0; c < panel.width; ++c) {
    if (!varies[c]) {
      const std::string name = c < names.size() ? names[c] : "column " + std::to_string(c);
      throw Error("degenerate_column", "parameter '" + name + "' has no variation across alternatives in any task");
    }
  }
}

EstimationResult estimate_mnl(const CodedPanel& panel, const ParameterIndex& index, const EstimateOptions& opts) {
  if (panel.respondents.empty()) throw Error("empty_dataset", "cannot estimate on an empty panel");
  if (index.fixed_size() != panel.width) {
    throw Error("index_mismatch", "panel width " + std::to_string(panel.width) + " does not match the index (" +
                                      std::to_string(index.fixed_size()) + " fixed columns)");
  }
  std::vector<std::string> names = index.names();
  names.resize(index.fixed_size());
  require_identified(panel, names);
  const unsigned threads = resolve_threads(opts.threads);

  const auto k = static_cast<Eigen::Index>(panel.width);
  Eigen::VectorXd x0 = opts.start ? *opts.start : Eigen::VectorXd::Zero(k);
  if (x0.size() != k) throw Error("dimension_mismatch", "start vector has the wrong length");

  const DifferentiableFunction negll = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double ll = mnl_loglik_gradient(x, panel, g, threads);
    g = -g;
    return -ll;
  };
  const OptimizerResult opt = bfgs_minimize(negll, x0, opts.optimizer);

  EstimationResult r;
  r.model = "mnl";
  r.names = names;
  r.params = opt.x;
  r.ll_null = null_loglik(panel);
  r.ll_final = -opt.f;
  r.converged = opt.converged();
  r.iterations = opt.iterations;
  r.status = to_string(opt.status);
  for (double f : opt.trace) r.trace.push_back(-f);
  r.n_respondents = panel.respondents.size();
  r.n_tasks = panel.n_tasks();

  const Eigen::MatrixXd h = finite_diff_hessian(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g;
        mnl_loglik_gradient(x, panel, g, threads);
        return Eigen::VectorXd(-g);
      },
      opt.x, opts.hessian_step);
  attach_covariance(r, h);
  finalize_inference(r);
  return r;
}

} // namespace dce

#include "dce/mmnl.hpp"

#include <algorithm>
#include <cmath>

#include "dce/error.hpp"

namespace dce {

MslDraws make_msl_draws(const MixingSpec& mixing, std::size_t n_individuals) {
  const std::size_t dims = mixing.random_params.size();
  if (dims == 0) return MslDraws(n_individuals, 1, 0);
  HaltonConfig cfg = mixing.halton;
  if (cfg.primes.size() < dims) {
    throw Error("invalid_halton_config", std::to_string(dims) + " random parameters need as many primes, got " +
                                             std::to_string(cfg.primes.size()));
  }
  cfg.primes.resize(dims);
  const std::size_t total = cfg.n_draws;
  if (mixing.antithetic) {
    if (total % 2 != 0) throw Error("invalid_halton_config", "antithetic draws need an even draw count");
    cfg.n_draws = total / 2;
  }
  validate(cfg);
  const HaltonMatrix u = halton_matrix(cfg, n_individuals);
  MslDraws z(n_individuals, total, dims);
  for (std::size_t i = 0; i < n_individuals; ++i) {
    for (std::size_t r = 0; r < cfg.n_draws; ++r) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double v = inv_normal_cdf(u(i, r, d));
        if (mixing.antithetic) {
          z(i, 2 * r, d) = v;
          z(i, 2 * r + 1, d) = -v;
        } else {
          z(i, r, d) = v;
        }
      }
    }
  }
  return z;
}

namespace {

struct Layout {
  std::size_t n_fixed;
  std::vector<std::size_t> random_cols;
};

Layout layout_of(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                 const MslDraws& draws) {
  if (index.fixed_size() != panel.width) {
    throw Error("index_mismatch", "panel width " + std::to_string(panel.width) + " does not match the index (" +
                                      std::to_string(index.fixed_size()) + " fixed columns)");
  }
  if (static_cast<std::size_t>(params.size()) != index.size()) {
    throw Error("dimension_mismatch", "parameter vector has " + std::to_string(params.size()) + " entries, index has " +
                                          std::to_string(index.size()));
  }
  if (draws.n_dims() != index.random_size()) {
    throw Error("dimension_mismatch", "draws have " + std::to_string(draws.n_dims()) + " dimensions for " +
                                          std::to_string(index.random_size()) + " random parameters");
  }
  if (draws.n_individuals() < panel.respondents.size()) {
    throw Error("dimension_mismatch", "draws cover fewer individuals than the panel holds");
  }
  return {index.fixed_size(), index.random_columns()};
}

// Simulated log-likelihood of respondent i; adds its score into `grad` when
// non-null.
double respondent_msl(const Eigen::VectorXd& params, const CodedRespondent& resp, std::size_t i, const Layout& lay,
                      const MslDraws& draws, Eigen::VectorXd* grad) {
  const std::size_t n_tasks = resp.tasks.size();
  const std::size_t n_draws = draws.n_draws();
  const std::size_t n_rand = lay.random_cols.size();
  const Eigen::VectorXd beta = params.head(static_cast<Eigen::Index>(lay.n_fixed));
  const Eigen::VectorXd sd = params.tail(static_cast<Eigen::Index>(n_rand));

  std::vector<Eigen::VectorXd> v(n_tasks);
  std::vector<Eigen::MatrixXd> rc(n_tasks); // alternatives x random dims
  std::size_t n_alts = 0;
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const auto& rows = resp.tasks[t].rows;
    v[t] = rows * beta;
    if (!v[t].allFinite()) {
      throw NumericalError("non_finite_utility", "utility is not finite for respondent " + resp.id + " task " +
                                                     std::to_string(t + 1));
    }
    rc[t].resize(rows.rows(), static_cast<Eigen::Index>(n_rand));
    for (std::size_t k = 0; k < n_rand; ++k) {
      rc[t].col(static_cast<Eigen::Index>(k)) = rows.col(static_cast<Eigen::Index>(lay.random_cols[k]));
    }
    n_alts = std::max<std::size_t>(n_alts, static_cast<std::size_t>(rows.rows()));
  }

  std::vector<double> logprod(n_draws, 0.0);
  // probs[(r * n_tasks + t) * n_alts + j], left at zero for floored tasks.
  std::vector<double> probs;
  if (grad) probs.assign(n_draws * n_tasks * n_alts, 0.0);
  std::vector<char> floored(grad ? n_draws * n_tasks : 0, 0);
  Eigen::VectorXd shift(static_cast<Eigen::Index>(n_rand));
  Eigen::VectorXd u;
  std::size_t n_floored = 0;

  for (std::size_t r = 0; r < n_draws; ++r) {
    for (std::size_t k = 0; k < n_rand; ++k) shift[static_cast<Eigen::Index>(k)] = sd[static_cast<Eigen::Index>(k)] * draws(i, r, k);
    double lp = 0.0;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      u = v[t];
      if (n_rand > 0) u.noalias() += rc[t] * shift;
      const double umax = u.maxCoeff();
      u.array() = (u.array() - umax).exp();
      const double s = u.sum();
      const auto c = static_cast<Eigen::Index>(resp.tasks[t].chosen);
      double lpt = std::log(u[c] / s);
      if (!(lpt >= kLogProbFloor)) {
        lpt = kLogProbFloor;
        ++n_floored;
        if (grad) floored[r * n_tasks + t] = 1;
      } else if (grad) {
        double* p = &probs[(r * n_tasks + t) * n_alts];
        for (Eigen::Index j = 0; j < u.size(); ++j) p[j] = u[j] / s;
      }
      lp += lpt;
    }
    logprod[r] = lp;
  }
  if (n_floored == n_draws * n_tasks && n_tasks > 0) {
    throw NumericalError("underflow", "simulated probability underflows in every draw for respondent " + resp.id);
  }

  const double lse = log_sum_exp(logprod);
  const double ll = lse - std::log(static_cast<double>(n_draws));
  if (!grad) return ll;

  // Weighted task-level probability sums and SD scores.
  std::vector<double> a(n_tasks * n_alts, 0.0);
  std::vector<double> b(n_tasks, 0.0);
  Eigen::VectorXd sd_score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_rand));
  Eigen::VectorXd inner(static_cast<Eigen::Index>(n_rand));
  for (std::size_t r = 0; r < n_draws; ++r) {
    const double w = std::exp(logprod[r] - lse);
    if (w == 0.0) continue;
    inner.setZero();
    for (std::size_t t = 0; t < n_tasks; ++t) {
      if (floored[r * n_tasks + t]) continue;
      const double* p = &probs[(r * n_tasks + t) * n_alts];
      const auto nj = static_cast<std::size_t>(rc[t].rows());
      b[t] += w;
      for (std::size_t j = 0; j < nj; ++j) a[t * n_alts + j] += w * p[j];
      if (n_rand > 0) {
        const auto c = static_cast<Eigen::Index>(resp.tasks[t].chosen);
        inner += rc[t].row(c).transpose();
        for (std::size_t j = 0; j < nj; ++j) inner -= p[j] * rc[t].row(static_cast<Eigen::Index>(j)).transpose();
      }
    }
    for (std::size_t k = 0; k < n_rand; ++k) {
      sd_score[static_cast<Eigen::Index>(k)] += w * draws(i, r, k) * inner[static_cast<Eigen::Index>(k)];
    }
  }
  auto fixed = grad->head(static_cast<Eigen::Index>(lay.n_fixed));
  for (std::size_t t = 0; t < n_tasks; ++t) {
    const auto& rows = resp.tasks[t].rows;
    const auto c = static_cast<Eigen::Index>(resp.tasks[t].chosen);
    fixed += b[t] * rows.row(c).transpose();
    const Eigen::Map<const Eigen::VectorXd> at(&a[t * n_alts], rows.rows());
    fixed -= rows.transpose() * at;
  }
  grad->tail(static_cast<Eigen::Index>(n_rand)) += sd_score;
  return ll;
}

} // namespace

double msl_loglik_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                           const MslDraws& draws, Eigen::VectorXd& grad, unsigned threads) {
  const Layout lay = layout_of(params, panel, index, draws);
  const std::size_t n = panel.respondents.size();
  std::vector<double> ll(n);
  std::vector<Eigen::VectorXd> g(n);
  parallel_for(n, threads, [&](std::size_t i) {
    g[i] = Eigen::VectorXd::Zero(params.size());
    ll[i] = respondent_msl(params, panel.respondents[i], i, lay, draws, &g[i]);
  });
  grad = Eigen::VectorXd::Zero(params.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ll[i];
    grad += g[i];
  }
  return total;
}

double msl_loglik(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                  const MslDraws& draws, unsigned threads) {
  const Layout lay = layout_of(params, panel, index, draws);
  const std::size_t n = panel.respondents.size();
  std::vector<double> ll(n);
  parallel_for(n, threads,
               [&](std::size_t i) { ll[i] = respondent_msl(params, panel.respondents[i], i, lay, draws, nullptr); });
  double total = 0.0;
  for (double v : ll) total += v;
  return total;
}

Eigen::VectorXd msl_gradient(const Eigen::VectorXd& params, const CodedPanel& panel, const ParameterIndex& index,
                             const MslDraws& draws, unsigned threads) {
  Eigen::VectorXd g;
  msl_loglik_gradient(params, panel, index, draws, g, threads);
  return g;
}

Eigen::VectorXd mmnl_predict(const Eigen::VectorXd& params, const Eigen::MatrixXd& rows, const ParameterIndex& index,
                             const MixingSpec& mixing, std::size_t n_draws) {
  if (static_cast<std::size_t>(params.size()) != index.size() ||
      static_cast<std::size_t>(rows.cols()) != index.fixed_size()) {
    throw Error("dimension_mismatch", "parameters or task rows do not match the index");
  }
  if (mixing.random_params.size() != index.random_size()) {
    throw Error("dimension_mismatch", "mixing spec and index disagree on the random parameters");
  }
  MixingSpec spec = mixing;
  spec.halton.n_draws = n_draws;
  const MslDraws draws = make_msl_draws(spec, 1);
  const auto cols = index.random_columns();
  const Eigen::VectorXd beta = params.head(static_cast<Eigen::Index>(index.fixed_size()));
  const Eigen::VectorXd sd = params.tail(static_cast<Eigen::Index>(cols.size()));
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(rows.rows());
  for (std::size_t r = 0; r < draws.n_draws(); ++r) {
    Eigen::VectorXd b = beta;
    for (std::size_t k = 0; k < cols.size(); ++k) b[static_cast<Eigen::Index>(cols[k])] += sd[static_cast<Eigen::Index>(k)] * draws(0, r, k);
    avg += mnl_probabilities(b, rows);
  }
  avg /= static_cast<double>(draws.n_draws());
  return avg;
}

EstimationResult estimate_mmnl(const CodedPanel& panel, const ParameterIndex& index, const MixingSpec& mixing,
                               const EstimateOptions& opts) {
  if (panel.respondents.empty()) throw Error("empty_dataset", "cannot estimate on an empty panel");
  if (mixing.random_params.size() != index.random_size()) {
    throw Error("dimension_mismatch", "mixing spec lists " + std::to_string(mixing.random_params.size()) +
                                          " random parameters, index has " + std::to_string(index.random_size()));
  }
  for (std::size_t k = 0; k < mixing.random_params.size(); ++k) {
    if (index[index.fixed_size() + k].name != sd_name(mixing.random_params[k])) {
      throw Error("index_mismatch", "index SD columns do not follow the mixing spec order");
    }
  }
  const unsigned threads = resolve_threads(opts.threads);
  const MslDraws draws = make_msl_draws(mixing, panel.respondents.size());
  const auto k = static_cast<Eigen::Index>(index.size());
  const auto n_fixed = static_cast<Eigen::Index>(index.fixed_size());

  Eigen::VectorXd x0(k);
  if (opts.start) {
    if (opts.start->size() != k) throw Error("dimension_mismatch", "start vector has the wrong length");
    x0 = *opts.start;
  } else {
    EstimateOptions mnl_opts = opts;
    mnl_opts.start.reset();
    const EstimationResult mnl = estimate_mnl(panel, index, mnl_opts);
    x0.head(n_fixed) = mnl.params;
    x0.tail(k - n_fixed).setConstant(0.5);
  }
  {
    std::vector<std::string> names = index.names();
    names.resize(index.fixed_size());
    require_identified(panel, names);
  }

  const DifferentiableFunction negll = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double ll = msl_loglik_gradient(x, panel, index, draws, g, threads);
    g = -g;
    return -ll;
  };
  const OptimizerResult opt = bfgs_minimize(negll, x0, opts.optimizer);

  EstimationResult r;
  r.model = "mmnl";
  r.names = index.names();
  r.params = opt.x;
  r.ll_null = null_loglik(panel);
  r.ll_final = -opt.f;
  r.converged = opt.converged();
  r.iterations = opt.iterations;
  r.status = to_string(opt.status);
  for (double f : opt.trace) r.trace.push_back(-f);
  r.n_respondents = panel.respondents.size();
  r.n_tasks = panel.n_tasks();
  r.mixing = mixing;

  const Eigen::MatrixXd h = finite_diff_hessian(
      [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd g;
        msl_loglik_gradient(x, panel, index, draws, g, threads);
        return Eigen::VectorXd(-g);
      },
      opt.x, opts.hessian_step);
  attach_covariance(r, h);

  // SDs are identified only up to sign; report |sd| and flip the matching
  // covariance rows and columns.
  for (Eigen::Index i = n_fixed; i < k; ++i) {
    if (r.params[i] >= 0.0) continue;
    r.params[i] = -r.params[i];
    if (r.covariance.size() > 0) {
      r.covariance.row(i) *= -1.0;
      r.covariance.col(i) *= -1.0;
    }
  }
  finalize_inference(r);
  return r;
}

} // namespace dce

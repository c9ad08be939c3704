#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "dce/error.hpp"
#include "dce/numerics.hpp"

namespace dce {

void validate(const OptimizerOptions& opts) {
  if (!(opts.gradient_tolerance > 0.0) || !(opts.step_tolerance > 0.0)) {
    throw Error("invalid_options", "optimizer tolerances must be positive");
  }
  if (!(0.0 < opts.sufficient_decrease && opts.sufficient_decrease < opts.curvature && opts.curvature < 1.0)) {
    throw Error("invalid_options", "line search constants must satisfy 0 < c1 < c2 < 1");
  }
  if (opts.max_iterations < 0) throw Error("invalid_options", "max_iterations must be non-negative");
}

std::string to_string(OptimizerStatus status) {
  switch (status) {
  case OptimizerStatus::converged: return "converged";
  case OptimizerStatus::max_iterations: return "max_iterations";
  case OptimizerStatus::step_tolerance: return "step_tolerance";
  case OptimizerStatus::line_search_failed: return "line_search_failed";
  case OptimizerStatus::non_finite: return "non_finite";
  }
  return "unknown";
}

namespace {

struct Probe {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0; // directional derivative along the search direction
  Eigen::VectorXd x;
  Eigen::VectorXd g;

  bool finite() const { return std::isfinite(f) && g.allFinite(); }
};

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Scale-free stationarity measure: max_k |g_k| max(|x_k|, 1) / max(|f|, 1).
// An absolute test cannot be met once the remaining decrease is below the
// resolution of a log-likelihood summed over thousands of observations.
double relative_gradient(const Eigen::VectorXd& g, const Eigen::VectorXd& x, double f) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) worst = std::max(worst, std::fabs(g[k]) * std::max(std::fabs(x[k]), 1.0));
  return worst / std::max(std::fabs(f), 1.0);
}

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), falling
// back to bisection when the cubic has no usable minimum.
double cubic_step(const Probe& a, const Probe& b) {
  const double d1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (disc < 0.0 || !std::isfinite(disc)) return 0.5 * (a.alpha + b.alpha);
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  const double denom = b.slope - a.slope + 2.0 * d2;
  if (denom == 0.0) return 0.5 * (a.alpha + b.alpha);
  const double t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
  return std::isfinite(t) ? t : 0.5 * (a.alpha + b.alpha);
}

class LineSearch {
public:
  LineSearch(const DifferentiableFunction& fg, const OptimizerOptions& opts, const Eigen::VectorXd& x0,
             double f0, const Eigen::VectorXd& g0, const Eigen::VectorXd& dir)
      : fg_(fg), opts_(opts), x0_(x0), dir_(dir) {
    origin_.alpha = 0.0;
    origin_.f = f0;
    origin_.slope = g0.dot(dir);
    origin_.x = x0;
    origin_.g = g0;
  }

  int evaluations() const { return evals_; }

  std::optional<Probe> run(double alpha) {
    Probe prev = origin_;
    for (int i = 0; evals_ < opts_.max_line_search_evals; ++i) {
      Probe cur = probe(alpha);
      if (!cur.finite()) {
        alpha = 0.5 * (prev.alpha + alpha);
        continue;
      }
      if (!sufficient(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (curvature(cur)) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = cur;
      alpha *= 2.0;
    }
    return std::nullopt;
  }

private:
  Probe probe(double alpha) {
    ++evals_;
    Probe p;
    p.alpha = alpha;
    p.x = x0_ + alpha * dir_;
    p.g.resize(x0_.size());
    p.f = fg_(p.x, p.g);
    p.slope = p.g.allFinite() ? p.g.dot(dir_) : std::numeric_limits<double>::quiet_NaN();
    return p;
  }

  bool sufficient(const Probe& p) const {
    return p.f <= origin_.f + opts_.sufficient_decrease * p.alpha * origin_.slope;
  }
  bool curvature(const Probe& p) const { return std::fabs(p.slope) <= -opts_.curvature * origin_.slope; }

  std::optional<Probe> zoom(Probe lo, Probe hi) {
    while (evals_ < opts_.max_line_search_evals) {
      const double width = hi.alpha - lo.alpha;
      if (std::fabs(width) <= 1e-16 * std::max(1.0, std::fabs(lo.alpha))) break;
      double alpha = hi.finite() ? cubic_step(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
      const double a = std::min(lo.alpha, hi.alpha);
      const double b = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (b - a);
      alpha = std::clamp(alpha, a + margin, b - margin);

      Probe cur = probe(alpha);
      if (!cur.finite() || !sufficient(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      if (curvature(cur)) return cur;
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    // Interval exhausted: accept the best point with sufficient decrease.
    if (lo.alpha > 0.0 && lo.f < origin_.f) return lo;
    return std::nullopt;
  }

  const DifferentiableFunction& fg_;
  const OptimizerOptions& opts_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& dir_;
  Probe origin_;
  int evals_ = 0;
};

} // namespace

OptimizerResult bfgs_minimize(const DifferentiableFunction& fg, const Eigen::VectorXd& x0,
                              const OptimizerOptions& opts) {
  validate(opts);
  const auto n = x0.size();
  OptimizerResult res;
  res.x = x0;
  res.gradient.resize(n);
  res.f = fg(res.x, res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.f) || !res.gradient.allFinite()) {
    throw NumericalError("non_finite", "objective or gradient is non-finite at the starting point");
  }
  if (relative_gradient(res.gradient, res.x, res.f) <= opts.gradient_tolerance) {
    res.status = OptimizerStatus::converged;
    return res;
  }

  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  bool reset_once = false;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    Eigen::VectorXd dir = -h_inv * res.gradient;
    if (!(dir.dot(res.gradient) < 0.0)) {
      h_inv.setIdentity();
      scaled = false;
      dir = -res.gradient;
    }
    const double alpha0 = scaled ? 1.0 : std::min(1.0, 1.0 / inf_norm(res.gradient));

    LineSearch ls(fg, opts, res.x, res.f, res.gradient, dir);
    std::optional<Probe> step = ls.run(alpha0);
    res.evaluations += ls.evaluations();
    if (!step) {
      if (reset_once) {
        res.status = OptimizerStatus::line_search_failed;
        return res;
      }
      // Retry once along steepest descent before giving up.
      reset_once = true;
      h_inv.setIdentity();
      scaled = false;
      continue;
    }
    reset_once = false;

    const Eigen::VectorXd s = step->x - res.x;
    const Eigen::VectorXd y = step->g - res.gradient;
    res.x = std::move(step->x);
    res.f = step->f;
    res.gradient = std::move(step->g);
    res.iterations = iter + 1;
    res.trace.push_back(res.f);

    if (relative_gradient(res.gradient, res.x, res.f) <= opts.gradient_tolerance) {
      res.status = OptimizerStatus::converged;
      return res;
    }
    if (inf_norm(s) < opts.step_tolerance) {
      res.status = OptimizerStatus::step_tolerance;
      return res;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h_inv = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h_inv * y;
      // H+ = (I - rho s y') H (I - rho y s') + rho s s'
      h_inv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  res.status = OptimizerStatus::max_iterations;
  return res;
}

OptimizerResult bfgs_minimize(const ScalarFunction& f, const GradientFunction& grad, const Eigen::VectorXd& x0,
                              const OptimizerOptions& opts) {
  DifferentiableFunction fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double v = f(x);
    g = grad(x);
    return v;
  };
  return bfgs_minimize(fg, x0, opts);
}

} // namespace dce

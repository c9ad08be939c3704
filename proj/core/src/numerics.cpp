#include "dce/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

#include "dce/error.hpp"

namespace dce {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

void validate(const HaltonConfig& cfg) {
  if (cfg.n_draws < 1) throw Error("invalid_halton_config", "n_draws must be at least 1");
  std::set<std::uint32_t> seen;
  for (auto p : cfg.primes) {
    if (!is_prime(p)) {
      throw Error("invalid_halton_config", "Halton base " + std::to_string(p) + " is not prime");
    }
    if (!seen.insert(p).second) {
      throw Error("invalid_halton_config", "Halton base " + std::to_string(p) + " repeated");
    }
  }
}

double halton(std::uint64_t index, std::uint32_t base) {
  if (index < 1) throw Error("domain_error", "Halton index must be >= 1");
  if (!is_prime(base)) throw Error("domain_error", "Halton base " + std::to_string(base) + " is not prime");
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double halton_scrambled(std::uint64_t index, std::uint32_t base, std::span<const std::uint32_t> perm) {
  if (index < 1) throw Error("domain_error", "Halton index must be >= 1");
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(perm[index % base]);
    index /= base;
    f /= base;
  }
  return result;
}

namespace {

std::vector<std::uint32_t> digit_permutation(std::uint32_t base, std::uint64_t seed, std::size_t dim) {
  std::vector<std::uint32_t> perm(base);
  std::iota(perm.begin(), perm.end(), 0U);
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + dim);
  std::shuffle(perm.begin() + 1, perm.end(), rng);
  return perm;
}

} // namespace

HaltonMatrix halton_matrix(const HaltonConfig& cfg, std::size_t n_individuals) {
  validate(cfg);
  const std::size_t dims = cfg.primes.size();
  HaltonMatrix m(n_individuals, cfg.n_draws, dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto base = cfg.primes[d];
    std::vector<std::uint32_t> perm;
    if (cfg.scramble) perm = digit_permutation(base, cfg.scramble_seed, d);
    for (std::size_t i = 0; i < n_individuals; ++i) {
      for (std::size_t r = 0; r < cfg.n_draws; ++r) {
        const std::uint64_t index = cfg.drop + i * cfg.n_draws + r + 1;
        m(i, r, d) = cfg.scramble ? halton_scrambled(index, base, perm) : halton(index, base);
      }
    }
  }
  return m;
}

double inv_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error("domain_error", "inv_normal_cdf requires 0 < u < 1, got " + std::to_string(u));
  }
  // Wichura (1988), algorithm AS241 PPND16.
  const double q = u - 0.5;
  double r;
  double val;
  if (std::fabs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
               45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852854561 + 28729.085735721942674) * r + 39307.89580009271061) * r +
               21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  r = q < 0.0 ? u : 1.0 - u;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
               1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
               0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
               0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
               7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double two_sided_normal_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

double chi_square_upper_tail(double statistic, double df) {
  if (!(df > 0.0)) throw Error("domain_error", "chi-square df must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

Eigen::VectorXd finite_diff_grad(const ScalarFunction& f, const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw Error("domain_error", "finite difference step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw Error("non_finite", "non-finite objective while differencing coordinate " + std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd finite_diff_hessian(const GradientFunction& grad, const Eigen::VectorXd& x, double rel_step) {
  const auto n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = rel_step * (std::fabs(x[i]) + 1.0);
    xp[i] = x[i] + step;
    const Eigen::VectorXd gp = grad(xp);
    xp[i] = x[i] - step;
    const Eigen::VectorXd gm = grad(xp);
    xp[i] = x[i];
    h.col(i) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&body, &failures, w, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

unsigned resolve_threads(unsigned requested) {
  if (const char* env = std::getenv("DCE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  if (requested == 0) return std::max(1U, std::thread::hardware_concurrency());
  return requested;
}

} // namespace dce

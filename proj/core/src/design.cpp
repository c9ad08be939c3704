#include "dce/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

#include "csv.hpp"
#include "dce/error.hpp"
#include "dce/numerics.hpp"

namespace dce {

std::vector<DesignFactor> design_factors(const ExperimentSchema& schema) {
  std::vector<DesignFactor> out;
  for (std::size_t alt = 0; alt < schema.alternatives.size(); ++alt) {
    for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
      if (!schema.applies(a, alt)) continue;
      const auto& attr = schema.attributes[a];
      out.push_back({a, alt, schema.alternatives[alt].id + "." + (attr.column.empty() ? attr.name : attr.column),
                     attr.levels.size()});
    }
  }
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& attr = schema.attributes[a];
    if (attr.scope == AttributeScope::context) {
      out.push_back({a, std::nullopt, attr.column.empty() ? attr.name : attr.column, attr.levels.size()});
    }
  }
  return out;
}

std::size_t BlockedDesign::block_of(std::size_t run) const {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (std::find(blocks[b].begin(), blocks[b].end(), run) != blocks[b].end()) return b;
  }
  throw Error("unassigned_run", "run " + std::to_string(run) + " is not in any block");
}

std::vector<std::vector<std::size_t>> full_factorial(const ExperimentSchema& schema, std::string_view alternative,
                                                     std::size_t cap) {
  const std::size_t alt = schema.alternative_index(alternative);
  std::vector<std::size_t> sizes;
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    if (schema.applies(a, alt)) sizes.push_back(schema.attributes[a].levels.size());
  }
  std::size_t total = 1;
  for (auto s : sizes) {
    if (s != 0 && total > cap / s) {
      throw Error("design_overflow", "full factorial for '" + std::string(alternative) + "' exceeds the cap of " +
                                         std::to_string(cap) + " combinations");
    }
    total *= s;
  }
  if (total > cap) {
    throw Error("design_overflow", "full factorial exceeds the cap of " + std::to_string(cap) + " combinations");
  }
  std::vector<std::vector<std::size_t>> out;
  out.reserve(total);
  std::vector<std::size_t> cur(sizes.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    out.push_back(cur);
    for (std::size_t d = sizes.size(); d-- > 0;) {
      if (++cur[d] < sizes[d]) break;
      cur[d] = 0;
    }
  }
  return out;
}

namespace {

struct CodedLayout {
  std::vector<std::size_t> offset; // first coded column per factor
  std::vector<std::vector<std::vector<double>>> codes; // [factor][level] -> row
  std::size_t width = 0;
};

CodedLayout coded_layout(const ExperimentSchema& schema, const std::vector<DesignFactor>& factors) {
  CodedLayout layout;
  for (const auto& f : factors) {
    const auto& attr = schema.attributes[f.attribute];
    layout.offset.push_back(layout.width);
    std::vector<std::vector<double>> rows;
    for (std::size_t l = 0; l < attr.levels.size(); ++l) rows.push_back(code_level(attr, l));
    layout.width += attr.width();
    layout.codes.push_back(std::move(rows));
  }
  return layout;
}

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
    s += std::log(d);
  }
  return 2.0 * s;
}

// Level-swap hill climbing on log det(X'X). Swapping two runs' levels within
// one factor keeps every level count fixed.
class SwapSearch {
public:
  SwapSearch(const CodedLayout& layout, std::vector<std::vector<std::size_t>> levels, std::size_t n_runs)
      : layout_(layout), levels_(std::move(levels)), x_(n_runs, layout.width) {
    for (std::size_t f = 0; f < levels_.size(); ++f) {
      for (std::size_t r = 0; r < n_runs; ++r) write(r, f);
    }
    m_ = x_.transpose() * x_;
    log_det_ = log_det_spd(m_);
  }

  double log_det() const { return log_det_; }
  const std::vector<std::vector<std::size_t>>& levels() const { return levels_; }

  // Returns true if the swap was accepted.
  bool try_swap(std::size_t f, std::size_t a, std::size_t b) {
    auto& col = levels_[f];
    if (col[a] == col[b]) return false;
    const Eigen::RowVectorXd old_a = x_.row(a);
    const Eigen::RowVectorXd old_b = x_.row(b);
    std::swap(col[a], col[b]);
    write(a, f);
    write(b, f);
    Eigen::MatrixXd m = m_;
    m.noalias() -= old_a.transpose() * old_a;
    m.noalias() -= old_b.transpose() * old_b;
    m.noalias() += x_.row(a).transpose() * x_.row(a);
    m.noalias() += x_.row(b).transpose() * x_.row(b);
    const double ld = log_det_spd(m);
    if (ld > log_det_ + 1e-10) {
      m_ = std::move(m);
      log_det_ = ld;
      return true;
    }
    std::swap(col[a], col[b]);
    x_.row(a) = old_a;
    x_.row(b) = old_b;
    return false;
  }

private:
  void write(std::size_t run, std::size_t f) {
    const auto& code = layout_.codes[f][levels_[f][run]];
    for (std::size_t c = 0; c < code.size(); ++c) x_(run, layout_.offset[f] + c) = code[c];
  }

  const CodedLayout& layout_;
  std::vector<std::vector<std::size_t>> levels_; // [factor][run]
  Eigen::MatrixXd x_;
  Eigen::MatrixXd m_;
  double log_det_ = 0.0;
};

struct Candidate {
  std::vector<std::vector<std::size_t>> levels;
  double log_det = -std::numeric_limits<double>::infinity();
};

// Finite field GF(q) for q prime or q in {4, 8, 16}.
class GaloisField {
public:
  static std::optional<GaloisField> make(std::size_t q) {
    static const std::map<std::size_t, unsigned> poly{{4, 0b111}, {8, 0b1011}, {16, 0b10011}};
    if (is_prime(q)) return GaloisField(q, 0);
    if (auto it = poly.find(q); it != poly.end()) return GaloisField(q, it->second);
    return std::nullopt;
  }

  std::size_t order() const { return q_; }
  std::size_t add(std::size_t a, std::size_t b) const { return poly_ ? (a ^ b) : (a + b) % q_; }
  std::size_t mul(std::size_t a, std::size_t b) const {
    if (!poly_) return (a * b) % q_;
    unsigned r = 0;
    unsigned x = static_cast<unsigned>(a);
    unsigned y = static_cast<unsigned>(b);
    while (y) {
      if (y & 1U) r ^= x;
      y >>= 1U;
      x <<= 1U;
      if (x & q_) x ^= poly_;
    }
    return r;
  }

private:
  GaloisField(std::size_t q, unsigned poly) : q_(q), poly_(poly) {}
  std::size_t q_;
  unsigned poly_;
};

// Strength-2 orthogonal array start (Rao-Hamming construction over GF(q)),
// available when n_runs = q^m and every level count divides q. Columns,
// symbol-to-level maps and run order are randomized from `rng`.
std::optional<std::vector<std::vector<std::size_t>>> orthogonal_start(const std::vector<DesignFactor>& factors,
                                                                      std::size_t n_runs, std::mt19937_64& rng) {
  std::size_t max_levels = 0;
  for (const auto& f : factors) max_levels = std::max(max_levels, f.n_levels);
  for (std::size_t q = max_levels; q <= 16 && q <= n_runs; ++q) {
    bool divides = true;
    for (const auto& f : factors) divides = divides && q % f.n_levels == 0;
    const auto field = GaloisField::make(q);
    if (!divides || !field) continue;
    std::size_t m = 0;
    std::size_t size = 1;
    while (size < n_runs) {
      size *= q;
      ++m;
    }
    if (size != n_runs || m < 2) continue;
    if ((n_runs - 1) / (q - 1) < factors.size()) continue;

    // Projective points: nonzero vectors whose first nonzero coordinate is 1.
    std::vector<std::vector<std::size_t>> columns;
    for (std::size_t code = 1; code < n_runs; ++code) {
      std::vector<std::size_t> v(m);
      std::size_t c = code;
      for (std::size_t i = m; i-- > 0;) {
        v[i] = c % q;
        c /= q;
      }
      const auto lead = std::find_if(v.begin(), v.end(), [](std::size_t e) { return e != 0; });
      if (*lead == 1) columns.push_back(std::move(v));
    }
    std::shuffle(columns.begin(), columns.end(), rng);

    std::vector<std::size_t> run_order(n_runs);
    std::iota(run_order.begin(), run_order.end(), 0);
    std::shuffle(run_order.begin(), run_order.end(), rng);

    std::vector<std::vector<std::size_t>> levels;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      std::vector<std::size_t> symbol_map(q);
      std::iota(symbol_map.begin(), symbol_map.end(), 0);
      std::shuffle(symbol_map.begin(), symbol_map.end(), rng);
      std::vector<std::size_t> col(n_runs);
      for (std::size_t r = 0; r < n_runs; ++r) {
        std::size_t u = run_order[r];
        std::size_t value = 0;
        for (std::size_t i = m; i-- > 0;) {
          value = field->add(value, field->mul(u % q, columns[f][i]));
          u /= q;
        }
        col[r] = symbol_map[value] % factors[f].n_levels;
      }
      levels.push_back(std::move(col));
    }
    return levels;
  }
  return std::nullopt;
}

Candidate search_restart(const CodedLayout& layout, const std::vector<DesignFactor>& factors, std::size_t n_runs,
                         std::uint64_t seed, std::size_t restart, std::size_t iters) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + restart * 0xD1B54A32D192ED03ULL + 1);
  std::vector<std::vector<std::size_t>> levels;
  // Even restarts start from an orthogonal array when one exists for this
  // run size; odd restarts (and all restarts otherwise) from a random
  // level-balanced design.
  std::optional<std::vector<std::vector<std::size_t>>> oa;
  if (restart % 2 == 0) oa = orthogonal_start(factors, n_runs, rng);
  if (oa) {
    levels = std::move(*oa);
  } else {
    for (const auto& f : factors) {
      std::vector<std::size_t> col(n_runs);
      for (std::size_t r = 0; r < n_runs; ++r) col[r] = r % f.n_levels;
      std::shuffle(col.begin(), col.end(), rng);
      levels.push_back(std::move(col));
    }
  }
  SwapSearch search(layout, std::move(levels), n_runs);

  std::vector<std::size_t> order(factors.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t evals = 0;
  bool improved = true;
  while (improved && evals < iters) {
    improved = false;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t f : order) {
      for (std::size_t a = 0; a < n_runs && evals < iters; ++a) {
        for (std::size_t b = a + 1; b < n_runs && evals < iters; ++b) {
          if (search.levels()[f][a] == search.levels()[f][b]) continue;
          ++evals;
          improved = search.try_swap(f, a, b) || improved;
        }
      }
    }
  }
  return {search.levels(), search.log_det()};
}

} // namespace

std::size_t minimum_runs(const ExperimentSchema& schema) {
  std::size_t k = 0;
  for (const auto& f : design_factors(schema)) k += schema.attributes[f.attribute].width();
  return k + 1;
}

BlockedDesign select_fraction(const ExperimentSchema& schema, std::size_t n_runs, std::uint64_t seed,
                              std::size_t iters, const FractionOptions& opts) {
  require_valid(schema);
  BlockedDesign design;
  design.factors = design_factors(schema);
  design.seed = seed;
  if (design.factors.empty()) throw Error("empty_design", "schema has no design attributes");
  const std::size_t min_runs = minimum_runs(schema);
  if (n_runs < min_runs) {
    throw Error("infeasible_runs", std::to_string(n_runs) + " runs cannot identify the coded design; minimum feasible size is " +
                                       std::to_string(min_runs));
  }
  for (const auto& f : design.factors) {
    if (n_runs % f.n_levels != 0) {
      design.warnings.push_back("runs not divisible by the " + std::to_string(f.n_levels) + " levels of " + f.column +
                                "; level balance is approximate");
    }
  }

  const CodedLayout layout = coded_layout(schema, design.factors);
  const std::size_t restarts = std::max<std::size_t>(1, opts.restarts);
  std::vector<Candidate> results(restarts);
  parallel_for(restarts, opts.threads, [&](std::size_t r) {
    results[r] = search_restart(layout, design.factors, n_runs, seed, r, iters);
  });
  // Best objective wins; the lowest restart index breaks ties.
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (results[r].log_det > results[best].log_det) best = r;
  }

  design.runs.resize(n_runs);
  for (std::size_t r = 0; r < n_runs; ++r) {
    design.runs[r].levels.resize(design.factors.size());
    for (std::size_t f = 0; f < design.factors.size(); ++f) design.runs[r].levels[f] = results[best].levels[f][r];
  }
  std::vector<std::size_t> all(n_runs);
  std::iota(all.begin(), all.end(), 0);
  design.blocks = {all};
  design.diagnostics = design_diagnostics(schema, design);
  return design;
}

namespace {

struct BlockFill {
  std::vector<std::size_t> block; // per run
  double imbalance = 0.0;         // sum of squared deviations from size/L
};

// Seeded greedy fill followed by pairwise run-swap improvement between blocks.
BlockFill assign_blocks(const BlockedDesign& design, std::size_t n_blocks, std::mt19937_64& rng) {
  const std::size_t n_runs = design.runs.size();
  const std::size_t size = n_runs / n_blocks;
  const std::size_t n_factors = design.factors.size();
  // counts[block][factor][level]
  std::vector<std::vector<std::vector<int>>> counts(n_blocks);
  for (auto& b : counts) {
    for (const auto& f : design.factors) b.emplace_back(f.n_levels, 0);
  }
  std::vector<std::size_t> assignment(n_runs, n_blocks);
  std::vector<std::size_t> fill(n_blocks, 0);

  std::vector<std::size_t> order(n_runs);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  for (std::size_t run : order) {
    const auto& lv = design.runs[run].levels;
    std::size_t best = n_blocks;
    double best_delta = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < n_blocks; ++b) {
      if (fill[b] == size) continue;
      double delta = 0.0;
      for (std::size_t f = 0; f < n_factors; ++f) {
        const double target = static_cast<double>(size) / design.factors[f].n_levels;
        delta += 2.0 * (counts[b][f][lv[f]] - target) + 1.0;
      }
      if (delta < best_delta) {
        best_delta = delta;
        best = b;
      }
    }
    assignment[run] = best;
    ++fill[best];
    for (std::size_t f = 0; f < n_factors; ++f) ++counts[best][f][lv[f]];
  }

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t a = 0; a < n_runs; ++a) {
      for (std::size_t b = a + 1; b < n_runs; ++b) {
        const std::size_t ba = assignment[a];
        const std::size_t bb = assignment[b];
        if (ba == bb) continue;
        const auto& la = design.runs[a].levels;
        const auto& lb = design.runs[b].levels;
        double delta = 0.0;
        for (std::size_t f = 0; f < n_factors; ++f) {
          if (la[f] == lb[f]) continue;
          delta += 2.0 * (counts[ba][f][lb[f]] - counts[ba][f][la[f]]) + 2.0;
          delta += 2.0 * (counts[bb][f][la[f]] - counts[bb][f][lb[f]]) + 2.0;
        }
        if (delta < -1e-12) {
          for (std::size_t f = 0; f < n_factors; ++f) {
            --counts[ba][f][la[f]];
            ++counts[ba][f][lb[f]];
            --counts[bb][f][lb[f]];
            ++counts[bb][f][la[f]];
          }
          std::swap(assignment[a], assignment[b]);
          improved = true;
        }
      }
    }
  }

  BlockFill out{std::move(assignment), 0.0};
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t f = 0; f < n_factors; ++f) {
      const double target = static_cast<double>(size) / design.factors[f].n_levels;
      for (int c : counts[b][f]) out.imbalance += (c - target) * (c - target);
    }
  }
  return out;
}

constexpr std::size_t kBlockRestarts = 64;

} // namespace

BlockedDesign block_design(BlockedDesign design, std::size_t n_blocks, std::uint64_t seed) {
  const std::size_t n_runs = design.runs.size();
  if (n_blocks == 0 || n_runs % n_blocks != 0) {
    throw Error("blocks_do_not_divide_runs", "blocks must divide runs (" + std::to_string(n_blocks) + " blocks, " +
                                                 std::to_string(n_runs) + " runs)");
  }
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 0x5851F42D4C957F2DULL);
  BlockFill best;
  for (std::size_t r = 0; r < kBlockRestarts; ++r) {
    BlockFill cand = assign_blocks(design, n_blocks, rng);
    if (r == 0 || cand.imbalance < best.imbalance - 1e-12) best = std::move(cand);
    if (best.imbalance == 0.0) break;
  }

  design.blocks.assign(n_blocks, {});
  for (std::size_t r = 0; r < n_runs; ++r) design.blocks[best.block[r]].push_back(r);
  design.seed = seed;
  return design;
}

Eigen::MatrixXd coded_design_matrix(const ExperimentSchema& schema, const BlockedDesign& design,
                                    std::vector<std::size_t>* column_factor) {
  const CodedLayout layout = coded_layout(schema, design.factors);
  Eigen::MatrixXd x(design.runs.size(), layout.width);
  for (std::size_t r = 0; r < design.runs.size(); ++r) {
    for (std::size_t f = 0; f < design.factors.size(); ++f) {
      const auto& code = layout.codes[f][design.runs[r].levels[f]];
      for (std::size_t c = 0; c < code.size(); ++c) x(r, layout.offset[f] + c) = code[c];
    }
  }
  if (column_factor) {
    column_factor->assign(layout.width, 0);
    for (std::size_t f = 0; f < design.factors.size(); ++f) {
      const std::size_t w = schema.attributes[design.factors[f].attribute].width();
      for (std::size_t c = 0; c < w; ++c) (*column_factor)[layout.offset[f] + c] = f;
    }
  }
  return x;
}

DesignDiagnostics design_diagnostics(const ExperimentSchema& schema, const BlockedDesign& design) {
  if (design.runs.empty()) throw Error("empty_design", "design has no runs");
  DesignDiagnostics d;
  const double n = static_cast<double>(design.runs.size());

  for (std::size_t f = 0; f < design.factors.size(); ++f) {
    std::vector<double> counts(design.factors[f].n_levels, 0.0);
    for (const auto& run : design.runs) counts[run.levels[f]] += 1.0;
    const double target = n / design.factors[f].n_levels;
    double dev = 0.0;
    for (double c : counts) dev = std::max(dev, std::fabs(c - target));
    d.level_balance.push_back({design.factors[f].column, dev});
    d.max_level_deviation = std::max(d.max_level_deviation, dev);

    for (const auto& block : design.blocks) {
      if (block.empty()) continue;
      std::vector<double> bc(design.factors[f].n_levels, 0.0);
      for (std::size_t r : block) bc[design.runs[r].levels[f]] += 1.0;
      const double bt = static_cast<double>(block.size()) / design.factors[f].n_levels;
      for (double c : bc) d.max_block_deviation = std::max(d.max_block_deviation, std::fabs(c - bt));
    }
  }

  std::vector<std::size_t> owner;
  const Eigen::MatrixXd x = coded_design_matrix(schema, design, &owner);
  const Eigen::Index k = x.cols();
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (norms[i] < 1e-12) d.singular = true;
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if (owner[i] == owner[j] || norms[i] < 1e-12 || norms[j] < 1e-12) continue;
      const double r = centered.col(i).dot(centered.col(j)) / (norms[i] * norms[j]);
      d.max_abs_column_correlation = std::max(d.max_abs_column_correlation, std::min(1.0, std::fabs(r)));
    }
  }

  const Eigen::MatrixXd info = x.transpose() * x / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (k == 0 || ev.minCoeff() <= 1e-10 * std::max(1.0, ev.maxCoeff())) {
    d.singular = true;
    d.d_efficiency = 0.0;
  } else {
    d.d_efficiency = std::exp(ev.array().log().sum() / static_cast<double>(k));
  }
  if (d.singular) d.d_efficiency = 0.0;
  return d;
}

void write_design_csv(const ExperimentSchema& schema, const BlockedDesign& design, std::ostream& out) {
  out << "run_id,block_id";
  for (const auto& f : design.factors) out << ',' << csv::escape(f.column);
  out << '\n';
  std::vector<std::size_t> block(design.runs.size(), 0);
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    for (std::size_t r : design.blocks[b]) block[r] = b;
  }
  for (std::size_t r = 0; r < design.runs.size(); ++r) {
    out << (r + 1) << ',' << (block[r] + 1);
    for (std::size_t f = 0; f < design.factors.size(); ++f) {
      out << ',' << csv::escape(schema.attributes[design.factors[f].attribute].levels[design.runs[r].levels[f]].label);
    }
    out << '\n';
  }
}

BlockedDesign read_design_csv(const ExperimentSchema& schema, std::istream& in) {
  require_valid(schema);
  BlockedDesign design;
  design.factors = design_factors(schema);
  std::string line;
  if (!csv::read_line(in, line)) throw Error("design_parse", "design CSV is empty (header row is mandatory)");
  const auto header = csv::split(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"run_id", "block_id"}) {
    if (!col.contains(required)) throw Error("design_parse", std::string("design CSV lacks column '") + required + "'");
  }
  std::vector<std::size_t> factor_col;
  for (const auto& f : design.factors) {
    auto it = col.find(f.column);
    if (it == col.end()) throw Error("design_parse", "design CSV lacks column '" + f.column + "'");
    factor_col.push_back(it->second);
  }

  std::map<long, std::size_t> block_ids; // file id -> dense index (ascending)
  std::vector<long> run_blocks;
  std::size_t row = 1;
  while (csv::read_line(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw Error("design_parse", "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                      " fields, expected " + std::to_string(header.size()));
    }
    Profile p;
    for (std::size_t f = 0; f < design.factors.size(); ++f) {
      const auto& attr = schema.attributes[design.factors[f].attribute];
      const auto level = attr.find_level(fields[factor_col[f]]);
      if (!level) {
        throw Error("unknown_level", "row " + std::to_string(row) + ": attribute '" + attr.name + "' has no level '" +
                                         fields[factor_col[f]] + "'");
      }
      p.levels.push_back(*level);
    }
    long block = 0;
    try {
      block = std::stol(fields[col["block_id"]]);
    } catch (const std::exception&) {
      throw Error("design_parse", "row " + std::to_string(row) + ": block_id is not an integer");
    }
    block_ids.emplace(block, 0);
    run_blocks.push_back(block);
    design.runs.push_back(std::move(p));
  }
  if (design.runs.empty()) throw Error("design_parse", "design CSV has no runs");
  std::size_t dense = 0;
  for (auto& [id, idx] : block_ids) idx = dense++;
  design.blocks.assign(block_ids.size(), {});
  for (std::size_t r = 0; r < run_blocks.size(); ++r) design.blocks[block_ids[run_blocks[r]]].push_back(r);
  design.diagnostics = design_diagnostics(schema, design);
  return design;
}

} // namespace dce

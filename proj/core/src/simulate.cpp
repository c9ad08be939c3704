#include "dce/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dce/error.hpp"
#include "dce/mmnl.hpp"
#include "dce/numerics.hpp"

namespace dce {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Purpose : std::uint64_t { kBlock = 1, kDemographics = 2, kDeviations = 3, kGumbel = 4 };

} // namespace

Substream::Substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose)
    : key_(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ (purpose * 0xd1b54a32d192ed03ULL))) {}

std::uint64_t Substream::next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double Substream::next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double Substream::next_normal() { return inv_normal_cdf(next_uniform()); }

double Substream::next_gumbel() { return -std::log(-std::log(next_uniform())); }

Eigen::VectorXd align_parameters(const EstimationResult& result, const ParameterIndex& index) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    auto pos = result.find(index[i].name);
    if (!pos) throw Error("param_mismatch", "parameter file lacks '" + index[i].name + "' required by the schema");
    out[static_cast<Eigen::Index>(i)] = result.params[static_cast<Eigen::Index>(*pos)];
  }
  return out;
}

namespace {

std::vector<std::vector<double>> resolve_weights(const SimConfig& cfg) {
  const auto& schema = cfg.schema;
  std::vector<std::vector<double>> out(schema.attributes.size());
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    const auto& attr = schema.attributes[a];
    if (attr.scope != AttributeScope::demographic) continue;
    std::vector<double> w;
    if (auto it = cfg.demographic_weights.find(attr.name); it != cfg.demographic_weights.end()) {
      w = it->second;
    } else if (std::all_of(attr.levels.begin(), attr.levels.end(), [](const Level& l) { return l.weight.has_value(); })) {
      for (const auto& l : attr.levels) w.push_back(*l.weight);
    } else {
      w.assign(attr.levels.size(), 1.0 / static_cast<double>(attr.levels.size()));
    }
    if (w.size() != attr.levels.size()) {
      throw Error("invalid_sim_config", "weights for " + attr.name + " must have one entry per level");
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::any_of(w.begin(), w.end(), [](double v) { return !(v >= 0.0); }) || std::abs(sum - 1.0) > 1e-6) {
      throw Error("invalid_sim_config", "weights for " + attr.name + " must be non-negative and sum to 1");
    }
    out[a] = std::move(w);
  }
  return out;
}

std::size_t sample_level(const std::vector<double>& w, double u) {
  double acc = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    acc += w[l];
    if (u < acc) return l;
  }
  // u can exceed the rounded cumulative sum; take the last level with weight.
  for (std::size_t l = w.size(); l-- > 0;) {
    if (w[l] > 0.0) return l;
  }
  return w.size() - 1;
}

// Balanced assignment deals a fresh random permutation of the blocks to each
// consecutive group of n_blocks respondents.
std::size_t assign_block(const SimConfig& cfg, std::size_t respondent) {
  const std::size_t n_blocks = cfg.design.blocks.size();
  if (cfg.assignment == BlockAssignment::uniform) {
    Substream s(cfg.seed, respondent, kBlock);
    return std::min<std::size_t>(static_cast<std::size_t>(s.next_uniform() * static_cast<double>(n_blocks)), n_blocks - 1);
  }
  const std::size_t cycle = respondent / n_blocks;
  Substream s(cfg.seed, cycle, kBlock);
  std::vector<std::size_t> perm(n_blocks);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n_blocks; i > 1; --i) {
    const auto j = static_cast<std::size_t>(s.next_uniform() * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  return perm[respondent % n_blocks];
}

} // namespace

ChoiceDataset simulate_dataset(const SimConfig& cfg) {
  const auto& schema = cfg.schema;
  require_valid(schema);
  if (cfg.n_respondents < 1) throw Error("invalid_sim_config", "at least one respondent is required");
  if (cfg.design.blocks.empty() || cfg.design.runs.empty()) throw Error("invalid_sim_config", "design has no runs");
  if (cfg.design.factors != design_factors(schema)) {
    throw Error("invalid_sim_config", "design factors do not match the schema");
  }
  const ParameterIndex index = cfg.mixing ? build_parameter_index(schema, *cfg.mixing) : build_parameter_index(schema);
  if (static_cast<std::size_t>(cfg.true_params.size()) != index.size()) {
    throw Error("dimension_mismatch", "true parameter vector has " + std::to_string(cfg.true_params.size()) +
                                          " entries, the schema implies " + std::to_string(index.size()));
  }
  if (!cfg.true_params.allFinite()) throw Error("dimension_mismatch", "true parameters must be finite");
  const auto weights = resolve_weights(cfg);
  const RowCoder coder(schema, index);
  const std::vector<std::size_t> random_cols = index.random_columns();
  const auto n_fixed = static_cast<Eigen::Index>(index.fixed_size());
  const std::size_t n_alts = schema.alternatives.size();
  const std::size_t n_attrs = schema.attributes.size();

  // Observations of every run, shared across respondents.
  std::vector<Observation> run_obs(cfg.design.runs.size());
  for (std::size_t run = 0; run < cfg.design.runs.size(); ++run) {
    Observation& o = run_obs[run];
    o.alt_levels.assign(n_alts, std::vector<std::size_t>(n_attrs, kNoLevel));
    o.context_levels.assign(n_attrs, kNoLevel);
    const auto& levels = cfg.design.runs[run].levels;
    for (std::size_t f = 0; f < cfg.design.factors.size(); ++f) {
      const auto& factor = cfg.design.factors[f];
      if (factor.alternative) {
        o.alt_levels[*factor.alternative][factor.attribute] = levels[f];
      } else {
        o.context_levels[factor.attribute] = levels[f];
      }
    }
  }

  ChoiceDataset ds;
  ds.schema = schema;
  ds.respondents.resize(cfg.n_respondents);
  const unsigned threads = resolve_threads(cfg.threads);
  parallel_for(cfg.n_respondents, threads, [&](std::size_t i) {
    RespondentRecord& rec = ds.respondents[i];
    rec.id = std::to_string(i + 1);
    const std::size_t block = assign_block(cfg, i);

    Substream demo(cfg.seed, i, kDemographics);
    rec.demographics.assign(n_attrs, kNoLevel);
    for (std::size_t a = 0; a < n_attrs; ++a) {
      if (schema.attributes[a].scope == AttributeScope::demographic) {
        rec.demographics[a] = sample_level(weights[a], demo.next_uniform());
      }
    }

    Eigen::VectorXd beta = cfg.true_params.head(n_fixed);
    Substream dev(cfg.seed, i, kDeviations);
    for (std::size_t k = 0; k < random_cols.size(); ++k) {
      const double sd = cfg.true_params[n_fixed + static_cast<Eigen::Index>(k)];
      beta[static_cast<Eigen::Index>(random_cols[k])] += sd * dev.next_normal();
    }

    Substream gumbel(cfg.seed, i, kGumbel);
    const auto& runs = cfg.design.blocks[block];
    int task_id = 0;
    for (std::size_t run : runs) {
      Observation obs = run_obs[run];
      obs.task_id = ++task_id;
      obs.block_id = static_cast<int>(block + 1);
      const Eigen::VectorXd v = coder.code_task(obs, rec.demographics) * beta;
      std::size_t best = 0;
      double best_u = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_alts; ++j) {
        const double u = v[static_cast<Eigen::Index>(j)] + gumbel.next_gumbel();
        if (u > best_u) {
          best_u = u;
          best = j;
        }
      }
      obs.chosen = best;
      rec.tasks.push_back(std::move(obs));
    }
  });
  return ds;
}

RecoveryReport recovery_experiment(const SimConfig& cfg, Estimator estimator, const EstimateOptions& opts) {
  RecoveryReport rep;
  rep.seed = cfg.seed;
  const ChoiceDataset ds = simulate_dataset(cfg);
  const ParameterIndex fixed_index = build_parameter_index(cfg.schema);
  const MixingSpec mixing = cfg.mixing.value_or(MixingSpec{});
  const ParameterIndex index = estimator == Estimator::mmnl ? build_parameter_index(cfg.schema, mixing) : fixed_index;
  const CodedPanel panel = code_dataset(ds, fixed_index);
  try {
    rep.result = estimator == Estimator::mmnl ? estimate_mmnl(panel, index, mixing, opts) : estimate_mnl(panel, index, opts);
  } catch (const NumericalError& e) {
    throw NumericalError(e.code(), std::string(e.what()) + " (simulation seed " + std::to_string(cfg.seed) + ")");
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (simulation seed " + std::to_string(cfg.seed) + ")");
  }

  // Truth for each estimated parameter; SDs absent from the truth are 0.
  const ParameterIndex truth_index = cfg.mixing ? build_parameter_index(cfg.schema, *cfg.mixing) : fixed_index;
  std::vector<double> tf;
  std::vector<double> ef;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& info = index[i];
    double truth = 0.0;
    if (auto pos = truth_index.find(info.name)) truth = cfg.true_params[static_cast<Eigen::Index>(*pos)];
    double est = rep.result.params[static_cast<Eigen::Index>(i)];
    if (info.kind == ParamKind::sd) truth = std::abs(truth);
    RecoveryRow row{info.name, truth, est, rep.result.std_errors[static_cast<Eigen::Index>(i)], 0.0};
    row.z = std::abs(est - truth) / row.std_error;
    if (row.z <= 2.0) ++rep.within_2se;
    if (row.z <= 3.0) ++rep.within_3se;
    if (info.kind != ParamKind::sd) {
      tf.push_back(truth);
      ef.push_back(est);
    }
    rep.rows.push_back(row);
  }
  const double n = static_cast<double>(tf.size());
  const double mt = std::accumulate(tf.begin(), tf.end(), 0.0) / n;
  const double me = std::accumulate(ef.begin(), ef.end(), 0.0) / n;
  double stt = 0.0;
  double see = 0.0;
  double ste = 0.0;
  for (std::size_t i = 0; i < tf.size(); ++i) {
    stt += (tf[i] - mt) * (tf[i] - mt);
    see += (ef[i] - me) * (ef[i] - me);
    ste += (tf[i] - mt) * (ef[i] - me);
  }
  rep.correlation_fixed = (stt > 0.0 && see > 0.0) ? ste / std::sqrt(stt * see) : 0.0;
  return rep;
}

} // namespace dce

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dce/dataset.hpp"
#include "dce/design.hpp"
#include "dce/mixing.hpp"
#include "dce/mnl.hpp"
#include "dce/result.hpp"
#include "dce/schema.hpp"

namespace dce {

/// Counter-based stream: the value at (seed, stream, purpose, counter) does
/// not depend on how many values other streams consumed.
class Substream {
public:
  Substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double next_uniform();
  double next_normal();
  /// Standard Gumbel via -ln(-ln u).
  double next_gumbel();

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class BlockAssignment { balanced, uniform };

struct SimConfig {
  ExperimentSchema schema;
  BlockedDesign design;
  /// Fixed part followed by one SD per mixing random parameter.
  Eigen::VectorXd true_params;
  std::optional<MixingSpec> mixing;
  std::size_t n_respondents = 528;
  std::uint64_t seed = 1;
  /// Per demographic attribute, one probability per level. Missing entries
  /// fall back to the schema's level weights, then to equal shares.
  std::map<std::string, std::vector<double>> demographic_weights;
  BlockAssignment assignment = BlockAssignment::balanced;
  unsigned threads = 1;
};

/// Throws Error("invalid_sim_config") for bad sizes or weights and
/// Error("dimension_mismatch") for a misaligned parameter vector.
ChoiceDataset simulate_dataset(const SimConfig& cfg);

/// Picks the entries of `index` out of a result by name. Throws
/// Error("param_mismatch") naming the first missing parameter.
Eigen::VectorXd align_parameters(const EstimationResult& result, const ParameterIndex& index);

enum class Estimator { mnl, mmnl };

struct RecoveryRow {
  std::string name;
  double truth = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0; // |estimate - truth| / std_error
};

struct RecoveryReport {
  std::uint64_t seed = 0;
  std::vector<RecoveryRow> rows;
  double correlation_fixed = 0.0; // Pearson, fixed parameters only
  std::size_t within_2se = 0;
  std::size_t within_3se = 0;
  EstimationResult result;
};

/// Simulates from cfg, re-estimates, and compares. SDs are compared in
/// absolute value. Estimation errors are rethrown with the seed attached.
RecoveryReport recovery_experiment(const SimConfig& cfg, Estimator estimator, const EstimateOptions& opts = {});

} // namespace dce

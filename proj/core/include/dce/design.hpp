#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dce/schema.hpp"

namespace dce {

/// One column of a joint design: a design attribute as shown for one
/// alternative, or a context attribute (no alternative).
struct DesignFactor {
  std::size_t attribute = 0;
  std::optional<std::size_t> alternative;
  std::string column; // "drone.cost", "product_type"
  std::size_t n_levels = 0;

  bool operator==(const DesignFactor&) const = default;
};

/// Factors of the joint design, alternatives in schema order, then context.
std::vector<DesignFactor> design_factors(const ExperimentSchema& schema);

/// Level index per factor of one choice scenario.
struct Profile {
  std::vector<std::size_t> levels;

  bool operator==(const Profile&) const = default;
};

struct FactorBalance {
  std::string column;
  double max_deviation = 0.0; // max |count - n/L| over levels
};

struct DesignDiagnostics {
  std::vector<FactorBalance> level_balance;
  double max_level_deviation = 0.0;
  /// Max |count - block_size/L| over blocks, factors and levels.
  double max_block_deviation = 0.0;
  /// Over pairs of coded columns belonging to different factors.
  double max_abs_column_correlation = 0.0;
  double d_efficiency = 0.0;
  bool singular = false;
};

struct BlockedDesign {
  std::vector<DesignFactor> factors;
  std::vector<Profile> runs;
  std::vector<std::vector<std::size_t>> blocks; // run indices per block
  std::uint64_t seed = 0;
  DesignDiagnostics diagnostics;
  std::vector<std::string> warnings;

  std::size_t n_blocks() const { return blocks.size(); }
  /// Block holding `run`; throws if the run is unassigned.
  std::size_t block_of(std::size_t run) const;
};

/// Cartesian product of an alternative's design-attribute levels, first
/// attribute varying slowest. Throws Error("design_overflow") above `cap`.
std::vector<std::vector<std::size_t>> full_factorial(const ExperimentSchema& schema, std::string_view alternative,
                                                     std::size_t cap = 1'000'000);

struct FractionOptions {
  std::size_t restarts = 4;
  unsigned threads = 1;
};

/// Level-balanced joint design of `n_runs` scenarios, improved by level-swap
/// hill climbing on D-efficiency. `iters` bounds the swap evaluations per
/// restart. The result is a single block holding every run.
BlockedDesign select_fraction(const ExperimentSchema& schema, std::size_t n_runs, std::uint64_t seed,
                              std::size_t iters, const FractionOptions& opts = {});

/// Minimum run count for which the coded design can have full column rank.
std::size_t minimum_runs(const ExperimentSchema& schema);

/// Partitions the runs into `n_blocks` equal blocks minimizing within-block
/// level-frequency imbalance. Throws Error("blocks_do_not_divide_runs").
BlockedDesign block_design(BlockedDesign design, std::size_t n_blocks, std::uint64_t seed);

/// Effects-coded n x k matrix of a design, with the factor owning each column.
Eigen::MatrixXd coded_design_matrix(const ExperimentSchema& schema, const BlockedDesign& design,
                                    std::vector<std::size_t>* column_factor = nullptr);

DesignDiagnostics design_diagnostics(const ExperimentSchema& schema, const BlockedDesign& design);

/// CSV: run_id, block_id, one column per factor; values are level labels.
void write_design_csv(const ExperimentSchema& schema, const BlockedDesign& design, std::ostream& out);
BlockedDesign read_design_csv(const ExperimentSchema& schema, std::istream& in);

} // namespace dce

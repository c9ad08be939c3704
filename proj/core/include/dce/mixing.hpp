#pragma once

#include <string>
#include <vector>

#include "dce/numerics.hpp"

namespace dce {

enum class MixingDistribution { normal };

/// Which fixed parameters get an individual-level normal deviation, and how
/// the simulation draws are produced.
struct MixingSpec {
  std::vector<std::string> random_params{"asc_drone", "asc_truck"};
  MixingDistribution distribution = MixingDistribution::normal;
  HaltonConfig halton{};
  /// Pair every draw with its negation (n_draws must be even).
  bool antithetic = false;
};

} // namespace dce

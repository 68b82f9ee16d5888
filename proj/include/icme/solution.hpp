#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/genotype.hpp"
#include "icme/types.hpp"

namespace icme {

/// Where an offspring came from: the bin it was bred in and the iteration
/// (generation stamp) of the step that produced it.
struct Lineage {
  std::optional<BinIndex> source_bin;
  int generation = -1;
  std::vector<std::uint64_t> parents;
};

/// Indices into Solution::descriptors.
enum Descriptor : std::size_t {
  kFunctionalRatio = 0,
  kFilledRatio = 1,
  kMajorMediumRatio = 2,
  kMajorSmallestRatio = 3,
};

struct Solution {
  std::uint64_t id = 0;
  evo::Genotype genotype;
  std::array<double, 4> descriptors{};
  /// Bounding-box extents sorted descending (major, medium, smallest).
  std::array<double, 3> axes{};
  BcPoint bc;
  /// Density-sum fitness when feasible, negative violation otherwise.
  double fitness = 0.0;
  double violation = 0.0;
  bool feasible = false;
  std::vector<std::string> reasons;
  Lineage lineage;

  nlohmann::json to_json() const;
  static Solution from_json(const nlohmann::json& j);
};

}  // namespace icme

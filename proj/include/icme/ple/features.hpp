#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "icme/container.hpp"

namespace icme::ple {

enum class FeatureKind {
  kNone,
  /// Bin BC centre, normalised to the container rectangle (2 values).
  kBc,
  /// Elite's four descriptors (ratios rescaled to [0, 1]), bin BC centre and
  /// genotype length over max_length (7 values).
  kSolution,
  /// Bin BC centre plus the elite's sorted axis extents / 10 (5 values).
  kAxesOnly,
  /// kSolution followed by the scaled axis extents (10 values).
  kSolutionAxes,
};

std::string_view to_string(FeatureKind k);
FeatureKind feature_kind_from_string(std::string_view s);
Eigen::Index feature_dim(FeatureKind k);

/// Features of one bin. Bins without a feasible elite use their best
/// infeasible member.
Eigen::VectorXd extract_features(const qd::Container& c, const qd::Bin& bin, FeatureKind kind,
                                 std::size_t max_length);

/// One row per bin, in the given order.
Eigen::MatrixXd extract_features(const qd::Container& c, const std::vector<BinIndex>& bins, FeatureKind kind,
                                 std::size_t max_length);

}  // namespace icme::ple

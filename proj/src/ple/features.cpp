#include "icme/ple/features.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace icme::ple {

namespace {

constexpr double kAxisScale = 0.1;

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

}  // namespace

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kNone: return "none";
    case FeatureKind::kBc: return "bc";
    case FeatureKind::kSolution: return "s";
    case FeatureKind::kAxesOnly: return "axes_only";
    case FeatureKind::kSolutionAxes: return "s_axes";
  }
  return "none";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  for (auto k : {FeatureKind::kNone, FeatureKind::kBc, FeatureKind::kSolution, FeatureKind::kAxesOnly,
                 FeatureKind::kSolutionAxes}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown feature set: " + std::string(s));
}

Eigen::Index feature_dim(FeatureKind k) {
  switch (k) {
    case FeatureKind::kNone: return 0;
    case FeatureKind::kBc: return 2;
    case FeatureKind::kSolution: return 7;
    case FeatureKind::kAxesOnly: return 5;
    case FeatureKind::kSolutionAxes: return 10;
  }
  return 0;
}

Eigen::VectorXd extract_features(const qd::Container& c, const qd::Bin& bin, FeatureKind kind,
                                 std::size_t max_length) {
  Eigen::VectorXd f(feature_dim(kind));
  if (kind == FeatureKind::kNone) return f;
  const Rect& world = c.config().bounds;
  const BcPoint centre = bin.bounds.centre();
  const double cx = (centre.x - world.lo.x) / world.width();
  const double cy = (centre.y - world.lo.y) / world.height();
  if (kind == FeatureKind::kBc) {
    f << cx, cy;
    return f;
  }
  const Solution* rep = bin.representative();
  std::array<double, 3> axes{0.0, 0.0, 0.0};
  if (rep) axes = rep->axes;
  if (kind == FeatureKind::kAxesOnly) {
    f << cx, cy, axes[0] * kAxisScale, axes[1] * kAxisScale, axes[2] * kAxisScale;
    return f;
  }
  std::array<double, 4> d{0.0, 0.0, 1.0, 1.0};
  double length = 0.0;
  if (rep) {
    d = rep->descriptors;
    length = static_cast<double>(rep->genotype.size()) / static_cast<double>(std::max<std::size_t>(1, max_length));
  }
  f.head(7) << finite_or(d[kFunctionalRatio], 0.0), finite_or(d[kFilledRatio], 0.0),
      (finite_or(d[kMajorMediumRatio], 1.0) - 1.0) / 4.0, (finite_or(d[kMajorSmallestRatio], 1.0) - 1.0) / 9.0, cx,
      cy, length;
  if (kind == FeatureKind::kSolutionAxes) {
    f.tail(3) << axes[0] * kAxisScale, axes[1] * kAxisScale, axes[2] * kAxisScale;
  }
  return f;
}

Eigen::MatrixXd extract_features(const qd::Container& c, const std::vector<BinIndex>& bins, FeatureKind kind,
                                 std::size_t max_length) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(bins.size()), feature_dim(kind));
  for (std::size_t r = 0; r < bins.size(); ++r) {
    X.row(static_cast<Eigen::Index>(r)) = extract_features(c, c.at(bins[r]), kind, max_length).transpose();
  }
  return X;
}

}  // namespace icme::ple

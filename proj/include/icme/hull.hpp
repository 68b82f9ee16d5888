#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/solution.hpp"
#include "icme/voxel.hpp"

namespace icme::voxel {

/// Convex hull of lattice points with exact integer predicates. Handles
/// degenerate (planar, collinear, single-point) inputs.
class ConvexHull {
 public:
  static ConvexHull of(std::span<const Coord> points);

  /// True when the point lies inside or on the hull.
  bool contains(const Coord& p) const;
  /// Affine dimension of the input (-1 when empty).
  int dimension() const { return dimension_; }
  std::size_t facet_count() const { return planes_.size(); }

 private:
  struct Plane {
    std::array<std::int64_t, 3> normal;
    std::int64_t offset;
  };
  struct Edge2 {
    std::int64_t ax, ay, dx, dy;
  };

  int dimension_ = -1;
  Coord origin_;
  // dimension 3: outward facet planes, inside iff normal . p <= offset.
  std::vector<Plane> planes_;
  // dimension 2: supporting plane plus a CCW polygon in the projection
  // that drops coordinate `dropped_`.
  Plane support_{};
  int dropped_ = 0;
  std::vector<Edge2> polygon_;
  // dimension 1: parametric segment along direction_.
  std::array<std::int64_t, 3> direction_{};
  std::int64_t t_min_ = 0;
  std::int64_t t_max_ = 0;
};

/// Fills every lattice cell inside the convex hull of the block centres
/// with hull-flagged base blocks; original blocks are kept as they are.
Phenotype fill_convex_hull(const Phenotype& p);

/// One pass of 6-neighbour binary erosion over hull-flagged blocks only.
Phenotype erode_hull(const Phenotype& p);

/// Up to `passes` rounds of slope-template replacement on exposed hull
/// base blocks. A face is open when its neighbour is absent or already a
/// shaped hull block. Templates, keyed on the open-face set:
///   two perpendicular         -> slope
///   two opposite              -> plate
///   three, mutually perpendicular -> corner
///   three with an opposite pair   -> ridge
///   four                      -> peak
///   five or six               -> spike
Phenotype smooth_hull(const Phenotype& p, int passes);

struct HullStages {
  Phenotype filled;
  Phenotype eroded;
  Phenotype smoothed;
};

HullStages build_hull_stages(const Phenotype& p, int smoothing_passes);
Phenotype build_hull(const Phenotype& p, int smoothing_passes);

/// Drops hull-flagged blocks (the "interior" view).
Phenotype strip_hull(const Phenotype& p);

inline constexpr int kBlueprintSchemaVersion = 1;

/// Blueprint document for a stored solution: the hull is built and
/// smoothed here, and the metadata records fitness before and after.
nlohmann::json export_blueprint(const Solution& s, const DomainConfig& domain, int smoothing_passes,
                                const std::string& colour = "#7f8c8d");

/// Reads the block list back out of a blueprint document.
Phenotype import_blueprint(const nlohmann::json& blueprint);

}  // namespace icme::voxel

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "icme/genotype.hpp"
#include "icme/solution.hpp"

namespace icme::voxel {

enum class BlockType : std::uint8_t {
  kBase,
  kCorridor,
  kCockpit,
  kReactor,
  kThruster,
  kCargo,
  // Hull smoothing shapes.
  kSlope,
  kCorner,
  kRidge,
  kPeak,
  kSpike,
  kPlate,
};

std::string_view to_string(BlockType t);
BlockType block_type_from_string(std::string_view s);
bool is_functional(BlockType t);
BlockType block_type_for_atom(char atom);

/// Axis-aligned directions: +X, -X, +Y, -Y, +Z, -Z.
enum class Facing : std::uint8_t { kPosX, kNegX, kPosY, kNegY, kPosZ, kNegZ };

std::string_view to_string(Facing f);
Facing facing_from_string(std::string_view s);

struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;
  auto operator<=>(const Coord&) const = default;
  Coord operator+(const Coord& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Coord operator-(const Coord& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

inline constexpr std::array<Coord, 6> kFaceOffsets{
    Coord{1, 0, 0}, Coord{-1, 0, 0}, Coord{0, 1, 0}, Coord{0, -1, 0}, Coord{0, 0, 1}, Coord{0, 0, -1}};

struct Block {
  BlockType type = BlockType::kBase;
  Facing facing = Facing::kPosX;
  /// Added by the hull builder rather than the genotype.
  bool hull = false;
  /// Bit f set when face f (Facing order) was exposed at smoothing time.
  std::uint8_t exposed = 0;

  bool operator==(const Block&) const = default;
};

/// Voxel ship. Coordinates are normalised so the bounding box starts at the
/// origin; `overlaps` counts placements that hit an occupied cell (the first
/// block placed there is kept).
struct Phenotype {
  std::map<Coord, Block> blocks;
  std::size_t overlaps = 0;

  bool empty() const { return blocks.empty(); }
  std::size_t size() const { return blocks.size(); }
  bool contains(const Coord& c) const { return blocks.contains(c); }
  Coord min_corner() const;
  Coord max_corner() const;
  /// Bounding-box extents in blocks (0 when empty).
  std::array<int, 3> extents() const;
  /// Extents sorted descending.
  std::array<int, 3> sorted_axes() const;

  nlohmann::json blocks_json() const;
};

/// 3D turtle interpretation. Placement atoms step one cell along the heading
/// then place; rotations turn in the turtle's local frame; brackets push and
/// pop the pose. Unknown symbols are ignored.
Phenotype build_phenotype(const evo::Genotype& g);

struct ConstraintWeights {
  double overlap = 1.0;
  double missing_component = 1.0;
  double missing_thruster_axis = 1.0;
};

/// Requires a cockpit, a reactor and a thruster, forbids overlapping
/// placements and, in safe mode, requires thrusters facing all six axes.
evo::ConstraintReport check_constraints(const Phenotype& p, bool safe_mode, const ConstraintWeights& weights = {});

struct PhenotypeDescriptors {
  double functional_ratio = 0.0;
  double filled_ratio = 0.0;
  double major_medium_ratio = 1.0;
  double major_smallest_ratio = 1.0;

  std::array<double, 4> as_array() const {
    return {functional_ratio, filled_ratio, major_medium_ratio, major_smallest_ratio};
  }
};

/// Throws std::domain_error for an empty phenotype.
PhenotypeDescriptors descriptors(const Phenotype& p);

struct Density {
  enum class Family { kGaussian, kUniform };
  Family family = Family::kGaussian;
  /// Gaussian: (mean, sigma). Uniform: (lo, hi).
  double a = 0.0;
  double b = 1.0;

  double operator()(double x) const;
  void validate() const;
  nlohmann::json to_json() const;
  static Density from_json(const nlohmann::json& j);
  static Density gaussian(double mean, double sigma) { return {Family::kGaussian, mean, sigma}; }
  static Density uniform(double lo, double hi) { return {Family::kUniform, lo, hi}; }
};

/// One density per descriptor, in Descriptor order.
///
/// The shipped Gaussians are hand-set placeholders, not fitted to any
/// dataset of real ships, so absolute fitness values are only meaningful
/// relative to each other.
struct DensityModelSet {
  std::array<Density, 4> terms{Density::gaussian(0.3, 0.15), Density::gaussian(0.45, 0.2),
                               Density::gaussian(1.75, 0.75), Density::gaussian(3.0, 1.5)};
  /// Per-term fitness weights (developer mode).
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};

  nlohmann::json to_json() const;
  static DensityModelSet from_json(const nlohmann::json& j);
};

double fitness(const PhenotypeDescriptors& d, const DensityModelSet& densities);
/// Throws std::domain_error for an empty phenotype.
double fitness(const Phenotype& p, const DensityModelSet& densities);

/// Which two descriptors act as the behaviour characterisation.
struct BcChoice {
  Descriptor x = kMajorMediumRatio;
  Descriptor y = kMajorSmallestRatio;
};

std::string_view descriptor_name(Descriptor d);
Descriptor descriptor_from_name(std::string_view name);
/// Natural range of a descriptor, used as container bounds.
std::pair<double, double> descriptor_range(Descriptor d);

struct DomainConfig {
  bool safe_mode = true;
  ConstraintWeights constraint_weights;
  DensityModelSet densities;
  BcChoice bc;

  nlohmann::json to_json() const;
  static DomainConfig from_json(const nlohmann::json& j);
};

/// Genotype -> evaluated Solution.
class ShipDomain {
 public:
  explicit ShipDomain(DomainConfig config = {}) : config_(std::move(config)) {}

  const DomainConfig& config() const { return config_; }
  DomainConfig& config() { return config_; }

  /// Evaluates everything except id and lineage. Empty phenotypes come back
  /// infeasible with NaN descriptors and BC.
  Solution evaluate(const evo::Genotype& g) const;

  BcPoint bc_of(const std::array<double, 4>& descriptors) const {
    return {descriptors[config_.bc.x], descriptors[config_.bc.y]};
  }

 private:
  DomainConfig config_;
};

}  // namespace icme::voxel

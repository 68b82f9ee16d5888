#include "icme/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace icme::voxel {

namespace {

constexpr std::array<std::string_view, 12> kBlockNames{"base",   "corridor", "cockpit", "reactor",
                                                       "thruster", "cargo",  "slope",   "corner",
                                                       "ridge",  "peak",     "spike",   "plate"};
constexpr std::array<std::string_view, 6> kFacingNames{"+X", "-X", "+Y", "-Y", "+Z", "-Z"};
constexpr std::array<std::string_view, 4> kDescriptorNames{"functional_ratio", "filled_ratio",
                                                           "major_medium_ratio", "major_smallest_ratio"};

using Mat3 = std::array<std::array<int, 3>, 3>;

constexpr Mat3 kIdentity{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

// Quarter turn about a principal axis; sign +1 for +90 degrees.
Mat3 quarter_turn(char axis, int sign) {
  switch (axis) {
    case 'x': return {{{1, 0, 0}, {0, 0, -sign}, {0, sign, 0}}};
    case 'y': return {{{0, 0, sign}, {0, 1, 0}, {-sign, 0, 0}}};
    default: return {{{0, -sign, 0}, {sign, 0, 0}, {0, 0, 1}}};
  }
}

Facing facing_of(const Coord& d) {
  if (d.x > 0) return Facing::kPosX;
  if (d.x < 0) return Facing::kNegX;
  if (d.y > 0) return Facing::kPosY;
  if (d.y < 0) return Facing::kNegY;
  if (d.z > 0) return Facing::kPosZ;
  return Facing::kNegZ;
}

struct TurtlePose {
  Coord position;
  Mat3 frame = kIdentity;
};

}  // namespace

std::string_view to_string(BlockType t) { return kBlockNames[static_cast<std::size_t>(t)]; }

BlockType block_type_from_string(std::string_view s) {
  for (std::size_t k = 0; k < kBlockNames.size(); ++k) {
    if (kBlockNames[k] == s) return static_cast<BlockType>(k);
  }
  throw std::invalid_argument("unknown block type: " + std::string(s));
}

bool is_functional(BlockType t) {
  return t == BlockType::kCockpit || t == BlockType::kReactor || t == BlockType::kThruster;
}

BlockType block_type_for_atom(char atom) {
  switch (atom) {
    case evo::atom::kBase: return BlockType::kBase;
    case evo::atom::kCorridor: return BlockType::kCorridor;
    case evo::atom::kCockpit: return BlockType::kCockpit;
    case evo::atom::kReactor: return BlockType::kReactor;
    case evo::atom::kThruster: return BlockType::kThruster;
    case evo::atom::kCargo: return BlockType::kCargo;
    default: throw std::invalid_argument(std::string("not a placement atom: ") + atom);
  }
}

std::string_view to_string(Facing f) { return kFacingNames[static_cast<std::size_t>(f)]; }

Facing facing_from_string(std::string_view s) {
  for (std::size_t k = 0; k < kFacingNames.size(); ++k) {
    if (kFacingNames[k] == s) return static_cast<Facing>(k);
  }
  throw std::invalid_argument("unknown facing: " + std::string(s));
}

Coord Phenotype::min_corner() const {
  if (blocks.empty()) return {};
  Coord lo = blocks.begin()->first;
  for (const auto& [c, b] : blocks) {
    lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
  }
  return lo;
}

Coord Phenotype::max_corner() const {
  if (blocks.empty()) return {};
  Coord hi = blocks.begin()->first;
  for (const auto& [c, b] : blocks) {
    hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
  }
  return hi;
}

std::array<int, 3> Phenotype::extents() const {
  if (blocks.empty()) return {0, 0, 0};
  const Coord lo = min_corner();
  const Coord hi = max_corner();
  return {hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1};
}

std::array<int, 3> Phenotype::sorted_axes() const {
  auto e = extents();
  std::sort(e.begin(), e.end(), std::greater<>());
  return e;
}

nlohmann::json Phenotype::blocks_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [c, b] : blocks) {
    nlohmann::json entry = {{"x", c.x},
                            {"y", c.y},
                            {"z", c.z},
                            {"type", to_string(b.type)},
                            {"orientation", to_string(b.facing)}};
    if (b.hull) entry["hull"] = true;
    out.push_back(std::move(entry));
  }
  return out;
}

Phenotype build_phenotype(const evo::Genotype& g) {
  std::map<Coord, Block> raw;
  std::size_t overlaps = 0;
  TurtlePose pose;
  std::vector<TurtlePose> stack;
  for (char c : g.atoms) {
    if (c == evo::atom::kPush) {
      stack.push_back(pose);
    } else if (c == evo::atom::kPop) {
      if (!stack.empty()) {
        pose = stack.back();
        stack.pop_back();
      }
    } else if (evo::is_rotation(c)) {
      const char axis = static_cast<char>(c | 0x20);
      const int sign = (c == axis) ? -1 : 1;
      pose.frame = multiply(pose.frame, quarter_turn(axis, sign));
    } else if (evo::is_placement(c)) {
      const Coord heading{pose.frame[0][0], pose.frame[1][0], pose.frame[2][0]};
      pose.position = pose.position + heading;
      Block block{block_type_for_atom(c), facing_of(heading)};
      if (!raw.emplace(pose.position, block).second) ++overlaps;
    }
  }
  Phenotype p;
  p.overlaps = overlaps;
  if (raw.empty()) return p;
  Coord lo = raw.begin()->first;
  for (const auto& [c, b] : raw) lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
  for (const auto& [c, b] : raw) p.blocks.emplace(c - lo, b);
  return p;
}

evo::ConstraintReport check_constraints(const Phenotype& p, bool safe_mode, const ConstraintWeights& weights) {
  evo::ConstraintReport report;
  bool cockpit = false;
  bool reactor = false;
  bool thruster = false;
  std::array<bool, 6> thrust_axes{};
  for (const auto& [c, b] : p.blocks) {
    cockpit |= b.type == BlockType::kCockpit;
    reactor |= b.type == BlockType::kReactor;
    if (b.type == BlockType::kThruster) {
      thruster = true;
      thrust_axes[static_cast<std::size_t>(b.facing)] = true;
    }
  }
  if (p.overlaps > 0) {
    report.violation += weights.overlap * static_cast<double>(p.overlaps);
    report.reasons.emplace_back("overlap");
  }
  const std::pair<bool, const char*> required[] = {
      {cockpit, "missing_cockpit"}, {reactor, "missing_reactor"}, {thruster, "missing_thruster"}};
  for (const auto& [present, reason] : required) {
    if (!present) {
      report.violation += weights.missing_component;
      report.reasons.emplace_back(reason);
    }
  }
  if (safe_mode) {
    const auto missing = std::count(thrust_axes.begin(), thrust_axes.end(), false);
    if (missing > 0) {
      report.violation += weights.missing_thruster_axis * static_cast<double>(missing);
      report.reasons.emplace_back("missing_thruster_axes");
    }
  }
  report.feasible = report.reasons.empty();
  if (report.feasible) report.violation = 0.0;
  return report;
}

PhenotypeDescriptors descriptors(const Phenotype& p) {
  if (p.empty()) throw std::domain_error("descriptors of an empty phenotype");
  const auto axes = p.sorted_axes();
  std::size_t functional = 0;
  for (const auto& [c, b] : p.blocks) functional += is_functional(b.type) ? 1 : 0;
  const double total = static_cast<double>(p.size());
  const double volume = static_cast<double>(axes[0]) * axes[1] * axes[2];
  return {static_cast<double>(functional) / total, total / volume, static_cast<double>(axes[0]) / axes[1],
          static_cast<double>(axes[0]) / axes[2]};
}

double Density::operator()(double x) const {
  if (family == Family::kUniform) return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
  const double z = (x - a) / b;
  return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
}

void Density::validate() const {
  if (family == Family::kUniform && !(b > a)) throw std::invalid_argument("uniform density needs hi > lo");
  if (family == Family::kGaussian && !(b > 0.0)) throw std::invalid_argument("gaussian density needs sigma > 0");
}

nlohmann::json Density::to_json() const {
  if (family == Family::kUniform) return {{"family", "uniform"}, {"lo", a}, {"hi", b}};
  return {{"family", "gaussian"}, {"mean", a}, {"sigma", b}};
}

Density Density::from_json(const nlohmann::json& j) {
  const auto family = j.at("family").get<std::string>();
  Density d;
  if (family == "uniform") {
    d = uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  } else if (family == "gaussian") {
    d = gaussian(j.at("mean").get<double>(), j.at("sigma").get<double>());
  } else {
    throw std::invalid_argument("unknown density family: " + family);
  }
  d.validate();
  return d;
}

nlohmann::json DensityModelSet::to_json() const {
  nlohmann::json t = nlohmann::json::object();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    auto entry = terms[k].to_json();
    entry["weight"] = weights[k];
    t[std::string(kDescriptorNames[k])] = entry;
  }
  return t;
}

DensityModelSet DensityModelSet::from_json(const nlohmann::json& j) {
  DensityModelSet d;
  for (std::size_t k = 0; k < d.terms.size(); ++k) {
    const std::string name(kDescriptorNames[k]);
    if (!j.contains(name)) continue;
    d.terms[k] = Density::from_json(j.at(name));
    d.weights[k] = j.at(name).value("weight", 1.0);
  }
  return d;
}

double fitness(const PhenotypeDescriptors& d, const DensityModelSet& densities) {
  const auto values = d.as_array();
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) total += densities.weights[k] * densities.terms[k](values[k]);
  return total;
}

double fitness(const Phenotype& p, const DensityModelSet& densities) { return fitness(descriptors(p), densities); }

std::string_view descriptor_name(Descriptor d) { return kDescriptorNames[d]; }

Descriptor descriptor_from_name(std::string_view name) {
  for (std::size_t k = 0; k < kDescriptorNames.size(); ++k) {
    if (kDescriptorNames[k] == name) return static_cast<Descriptor>(k);
  }
  throw std::invalid_argument("unknown descriptor: " + std::string(name));
}

std::pair<double, double> descriptor_range(Descriptor d) {
  switch (d) {
    case kFunctionalRatio:
    case kFilledRatio: return {0.0, 1.0};
    case kMajorMediumRatio: return {1.0, 5.0};
    default: return {1.0, 10.0};
  }
}

nlohmann::json DomainConfig::to_json() const {
  return {{"safe_mode", safe_mode},
          {"constraint_weights",
           {{"overlap", constraint_weights.overlap},
            {"missing_component", constraint_weights.missing_component},
            {"missing_thruster_axis", constraint_weights.missing_thruster_axis}}},
          {"densities", densities.to_json()},
          {"bcs", {descriptor_name(bc.x), descriptor_name(bc.y)}}};
}

DomainConfig DomainConfig::from_json(const nlohmann::json& j) {
  DomainConfig c;
  c.safe_mode = j.value("safe_mode", c.safe_mode);
  if (j.contains("constraint_weights")) {
    const auto& w = j.at("constraint_weights");
    c.constraint_weights.overlap = w.value("overlap", c.constraint_weights.overlap);
    c.constraint_weights.missing_component = w.value("missing_component", c.constraint_weights.missing_component);
    c.constraint_weights.missing_thruster_axis =
        w.value("missing_thruster_axis", c.constraint_weights.missing_thruster_axis);
  }
  if (j.contains("densities")) c.densities = DensityModelSet::from_json(j.at("densities"));
  if (j.contains("bcs")) {
    c.bc.x = descriptor_from_name(j.at("bcs").at(0).get<std::string>());
    c.bc.y = descriptor_from_name(j.at("bcs").at(1).get<std::string>());
    if (c.bc.x == c.bc.y) throw std::invalid_argument("the two BCs must differ");
  }
  return c;
}

Solution ShipDomain::evaluate(const evo::Genotype& g) const {
  Solution s;
  s.genotype = g;
  const Phenotype p = build_phenotype(g);
  const auto report = check_constraints(p, config_.safe_mode, config_.constraint_weights);
  s.feasible = report.feasible;
  s.violation = report.violation;
  s.reasons = report.reasons;
  if (p.empty()) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    s.descriptors = {nan, nan, nan, nan};
    s.axes = {0.0, 0.0, 0.0};
    s.bc = {nan, nan};
    s.fitness = -s.violation;
    return s;
  }
  const auto d = descriptors(p);
  s.descriptors = d.as_array();
  const auto axes = p.sorted_axes();
  s.axes = {static_cast<double>(axes[0]), static_cast<double>(axes[1]), static_cast<double>(axes[2])};
  s.bc = bc_of(s.descriptors);
  s.fitness = s.feasible ? fitness(d, config_.densities) : -s.violation;
  return s;
}

}  // namespace icme::voxel

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "icme/genotype.hpp"
#include "icme/voxel.hpp"

using namespace icme;
using namespace icme::voxel;

namespace {

// Independent turtle: the local frame is kept as three vectors and turned with
// Rodrigues' formula for quarter turns, v' = cos*v + sin*(k x v) + (1-cos)(k.v)k.
struct Vec {
  int x, y, z;
};
Vec cross(Vec a, Vec b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
Vec turn(Vec v, Vec axis, int sign) {
  const Vec c = cross(axis, v);
  const int d = axis.x * v.x + axis.y * v.y + axis.z * v.z;
  return {sign * c.x + d * axis.x, sign * c.y + d * axis.y, sign * c.z + d * axis.z};
}

std::set<std::array<int, 3>> oracle_turtle(const std::string& atoms) {
  struct Pose {
    Vec pos{0, 0, 0};
    Vec f[3]{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // local x, y, z in world coordinates
  } pose;
  std::vector<Pose> stack;
  std::set<std::array<int, 3>> cells;
  for (char c : atoms) {
    if (c == '[') {
      stack.push_back(pose);
    } else if (c == ']') {
      if (!stack.empty()) {
        pose = stack.back();
        stack.pop_back();
      }
    } else if (std::string_view("xXyYzZ").find(c) != std::string_view::npos) {
      const int axis = (c | 0x20) - 'x';
      const int sign = (c & 0x20) ? -1 : 1;
      const Vec k = pose.f[axis];
      for (auto& v : pose.f) v = turn(v, k, sign);
    } else if (std::string_view("BCKRTS").find(c) != std::string_view::npos) {
      pose.pos = {pose.pos.x + pose.f[0].x, pose.pos.y + pose.f[0].y, pose.pos.z + pose.f[0].z};
      cells.insert({pose.pos.x, pose.pos.y, pose.pos.z});
    }
  }
  if (cells.empty()) return cells;
  std::array<int, 3> lo = *cells.begin();
  for (const auto& c : cells)
    for (int k = 0; k < 3; ++k) lo[k] = std::min(lo[k], c[k]);
  std::set<std::array<int, 3>> out;
  for (const auto& c : cells) out.insert({c[0] - lo[0], c[1] - lo[1], c[2] - lo[2]});
  return out;
}

std::set<std::array<int, 3>> cells_of(const Phenotype& p) {
  std::set<std::array<int, 3>> out;
  for (const auto& [c, b] : p.blocks) out.insert({c.x, c.y, c.z});
  return out;
}

double gauss(double x, double m, double s) {
  return std::exp(-0.5 * ((x - m) / s) * ((x - m) / s)) / (s * std::sqrt(2 * std::numbers::pi));
}

}  // namespace

TEST(Turtle, StepsThenPlaces) {
  const auto p = build_phenotype(evo::Genotype("BB"));
  ASSERT_EQ(p.size(), 2u);
  EXPECT_TRUE(p.contains({0, 0, 0}));
  EXPECT_TRUE(p.contains({1, 0, 0}));
  EXPECT_EQ(p.blocks.at({1, 0, 0}).facing, Facing::kPosX);
}

TEST(Turtle, RotationsFollowTheRightHandRule) {
  // Lower case turns -90 degrees: about z, +X becomes -Y.
  auto p = build_phenotype(evo::Genotype("BzB"));
  EXPECT_EQ(p.blocks.at({0, 0, 0}).facing, Facing::kNegY);
  p = build_phenotype(evo::Genotype("BZB"));
  EXPECT_EQ(p.blocks.at({0, 1, 0}).facing, Facing::kPosY);
  p = build_phenotype(evo::Genotype("ByB"));
  EXPECT_EQ(p.blocks.at({0, 0, 1}).facing, Facing::kPosZ);
}

TEST(Turtle, BracketsRestoreThePose) {
  // Blocks at (1,0), (1,1), (2,0) before normalisation.
  const auto p = build_phenotype(evo::Genotype("B[ZB]B"));
  EXPECT_EQ(p.size(), 3u);
  EXPECT_TRUE(p.contains({1, 0, 0}));
  EXPECT_TRUE(p.contains({0, 1, 0}));
}

TEST(Turtle, OverlapsAreCountedAndFirstBlockKept) {
  const auto p = build_phenotype(evo::Genotype("KBzzCC"));
  EXPECT_EQ(p.overlaps, 1u);
  EXPECT_EQ(p.blocks.at({1, 0, 0}).type, BlockType::kCockpit);
  EXPECT_EQ(p.size(), 3u);
}

TEST(Turtle, IgnoresNonTerminalsAndEmptyGenotypes) {
  EXPECT_TRUE(build_phenotype(evo::Genotype("AWE[]")).empty());
  EXPECT_EQ(build_phenotype(evo::Genotype("AKAE")).size(), 1u);
}

TEST(Turtle, MatchesIndependentTurtleOnRandomStrings) {
  std::mt19937_64 rng(17);
  const std::string alphabet = "BCKRTSxXyYzZ";
  for (int k = 0; k < 500; ++k) {
    std::string s;
    int depth = 0;
    const auto len = 5 + rng() % 80;
    for (std::size_t n = 0; n < len; ++n) {
      const auto r = rng() % 16;
      if (r == 14) {
        s += '[';
        ++depth;
      } else if (r == 15 && depth > 0) {
        s += ']';
        --depth;
      } else {
        s += alphabet[rng() % alphabet.size()];
      }
    }
    s += std::string(depth, ']');
    ASSERT_EQ(cells_of(build_phenotype(evo::Genotype(s))), oracle_turtle(s)) << s;
  }
}

TEST(Constraints, ReportsEachMissingComponent) {
  auto r = check_constraints(build_phenotype(evo::Genotype("BBB")), false);
  EXPECT_FALSE(r.feasible);
  EXPECT_DOUBLE_EQ(r.violation, 3.0);
  EXPECT_EQ(r.reasons.size(), 3u);
  r = check_constraints(build_phenotype(evo::Genotype("KRT")), false);
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.violation, 0.0);
}

TEST(Constraints, SafeModeNeedsThrustersOnAllAxes) {
  const auto one_axis = build_phenotype(evo::Genotype("KRT"));
  auto r = check_constraints(one_axis, true);
  EXPECT_FALSE(r.feasible);
  EXPECT_DOUBLE_EQ(r.violation, 5.0);
  // Thrusters facing +X, -Y, +Y, +Z, -Z and -X.
  const auto six = build_phenotype(evo::Genotype("[zzT]KR[T][zT][ZT][yT][YT]"));
  EXPECT_TRUE(check_constraints(six, true).feasible) << six.blocks_json().dump();
}

TEST(Constraints, WeightsScaleViolations) {
  ConstraintWeights w;
  w.missing_component = 2.5;
  w.overlap = 4.0;
  const auto p = build_phenotype(evo::Genotype("KTzzBB"));
  const auto r = check_constraints(p, false, w);
  EXPECT_DOUBLE_EQ(r.violation, 4.0 * 1 + 2.5);
}

TEST(Descriptors, HandComputedShape) {
  // 4 x 2 x 1 box holding 5 blocks, 2 of them functional.
  const auto p = build_phenotype(evo::Genotype("KBBR[ZB]"));
  ASSERT_EQ(p.sorted_axes(), (std::array<int, 3>{4, 2, 1}));
  const auto d = descriptors(p);
  EXPECT_DOUBLE_EQ(d.functional_ratio, 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(d.filled_ratio, 5.0 / 8.0);
  EXPECT_DOUBLE_EQ(d.major_medium_ratio, 2.0);
  EXPECT_DOUBLE_EQ(d.major_smallest_ratio, 4.0);
  EXPECT_THROW(descriptors(Phenotype{}), std::domain_error);
}

TEST(Fitness, WeightedSumOfDensities) {
  PhenotypeDescriptors d{0.4, 0.625, 2.0, 4.0};
  DensityModelSet m;
  m.weights = {1.0, 0.5, 2.0, 0.0};
  const double expected = gauss(0.4, 0.3, 0.15) + 0.5 * gauss(0.625, 0.45, 0.2) + 2.0 * gauss(2.0, 1.75, 0.75);
  EXPECT_NEAR(fitness(d, m), expected, 1e-12);
  m.terms[0] = Density::uniform(0.0, 0.5);
  EXPECT_NEAR(fitness(d, m), 2.0 + 0.5 * gauss(0.625, 0.45, 0.2) + 2.0 * gauss(2.0, 1.75, 0.75), 1e-12);
}

TEST(Density, ValidationAndJson) {
  EXPECT_THROW(Density::from_json({{"family", "gaussian"}, {"mean", 0}, {"sigma", 0}}), std::invalid_argument);
  EXPECT_THROW(Density::from_json({{"family", "uniform"}, {"lo", 1}, {"hi", 1}}), std::invalid_argument);
  EXPECT_THROW(Density::from_json({{"family", "beta"}}), std::invalid_argument);
  const DensityModelSet m;
  EXPECT_EQ(DensityModelSet::from_json(m.to_json()).to_json(), m.to_json());
}

TEST(ShipDomain, EvaluateFillsSolution) {
  ShipDomain domain;
  const auto s = domain.evaluate(evo::Genotype("KBBR[ZB]"));
  EXPECT_FALSE(s.feasible);  // no thrusters
  EXPECT_EQ(s.fitness, -s.violation);
  EXPECT_DOUBLE_EQ(s.bc.x, 2.0);
  EXPECT_DOUBLE_EQ(s.bc.y, 4.0);
  EXPECT_EQ(s.axes, (std::array<double, 3>{4, 2, 1}));

  DomainConfig cfg;
  cfg.safe_mode = false;
  cfg.bc = {kFunctionalRatio, kFilledRatio};
  const auto t = ShipDomain(cfg).evaluate(evo::Genotype("KBBR[ZT]"));
  EXPECT_TRUE(t.feasible);
  EXPECT_DOUBLE_EQ(t.bc.x, 3.0 / 5.0);
  EXPECT_NEAR(t.fitness, fitness(build_phenotype(evo::Genotype("KBBR[ZT]")), cfg.densities), 1e-12);
}

TEST(ShipDomain, EmptyPhenotypeHasNanBc) {
  const auto s = ShipDomain().evaluate(evo::Genotype("AAA"));
  EXPECT_FALSE(s.feasible);
  EXPECT_TRUE(std::isnan(s.bc.x));
}

TEST(DomainConfig, JsonRoundTripAndErrors) {
  DomainConfig cfg;
  cfg.safe_mode = false;
  cfg.bc = {kFilledRatio, kMajorSmallestRatio};
  cfg.densities.weights[2] = 0.25;
  EXPECT_EQ(DomainConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
  EXPECT_THROW(DomainConfig::from_json({{"bcs", {"filled_ratio", "filled_ratio"}}}), std::invalid_argument);
  EXPECT_THROW(DomainConfig::from_json({{"bcs", {"nope", "filled_ratio"}}}), std::invalid_argument);
}

TEST(DescriptorRange, NaturalBounds) {
  EXPECT_EQ(descriptor_range(kFunctionalRatio), (std::pair<double, double>{0.0, 1.0}));
  EXPECT_EQ(descriptor_range(kMajorMediumRatio), (std::pair<double, double>{1.0, 5.0}));
  EXPECT_EQ(descriptor_range(kMajorSmallestRatio), (std::pair<double, double>{1.0, 10.0}));
  for (auto d : {kFunctionalRatio, kFilledRatio, kMajorMediumRatio, kMajorSmallestRatio})
    EXPECT_EQ(descriptor_from_name(descriptor_name(d)), d);
}

#include <gtest/gtest.h>

#include <random>

#include "hull_oracle.hpp"
#include "icme/genotype.hpp"
#include "icme/hull.hpp"
#include "icme/voxel.hpp"

using namespace icme;
using namespace icme::voxel;

namespace {

std::vector<Coord> random_points(std::mt19937_64& rng, int n, int span, int flatten) {
  std::vector<Coord> pts;
  std::uniform_int_distribution<int> u(0, span);
  for (int k = 0; k < n; ++k) {
    Coord c{u(rng), u(rng), u(rng)};
    if (flatten >= 1) c.z = 2;                    // planar
    if (flatten >= 2) c.y = c.x;                  // collinear
    if (flatten >= 3) c = {1, 1, 1};              // single point
    pts.push_back(c);
  }
  return pts;
}

Phenotype random_phenotype(std::mt19937_64& rng) {
  const auto rules = evo::RuleSet::defaults();
  auto g = evo::expand(rules, rng);
  for (int k = 0; k < 1 + static_cast<int>(rng() % 4); ++k) g = evo::mutate(g, rules, {}, rng);
  return build_phenotype(g);
}

}  // namespace

TEST(ConvexHull, MatchesLinearProgrammingOracle) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 120; ++trial) {
    const int flatten = trial % 4;
    const auto pts = random_points(rng, 3 + static_cast<int>(rng() % 12), 6, flatten);
    const auto hull = ConvexHull::of(pts);
    for (int x = -1; x <= 7; ++x)
      for (int y = -1; y <= 7; ++y)
        for (int z = -1; z <= 7; ++z) {
          const Coord p{x, y, z};
          ASSERT_EQ(hull.contains(p), tsupport::in_convex_hull_lp(pts, p))
              << "trial " << trial << " point " << x << "," << y << "," << z;
        }
  }
}

TEST(ConvexHull, ReportsDimension) {
  EXPECT_EQ(ConvexHull::of(std::vector<Coord>{}).dimension(), -1);
  EXPECT_EQ(ConvexHull::of(std::vector<Coord>{{1, 2, 3}, {1, 2, 3}}).dimension(), 0);
  EXPECT_EQ(ConvexHull::of(std::vector<Coord>{{0, 0, 0}, {2, 2, 2}, {1, 1, 1}}).dimension(), 1);
  EXPECT_EQ(ConvexHull::of(std::vector<Coord>{{0, 0, 0}, {2, 0, 0}, {0, 2, 0}}).dimension(), 2);
  const auto cube = ConvexHull::of(
      std::vector<Coord>{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}});
  EXPECT_EQ(cube.dimension(), 3);
  EXPECT_TRUE(cube.contains({1, 1, 1}));
  EXPECT_FALSE(cube.contains({2, 1, 1}));
}

TEST(FillConvexHull, AddsExactlyTheLatticeHull) {
  // An L shape: the diagonal cell (1,1,0) lies on the hull of its corners.
  const auto p = build_phenotype(evo::Genotype("BBB[ZBB]"));
  const auto filled = fill_convex_hull(p);
  EXPECT_EQ(filled.size(), p.size() + 1);
  ASSERT_TRUE(filled.contains({1, 1, 0}));
  EXPECT_TRUE(filled.blocks.at({1, 1, 0}).hull);
  EXPECT_EQ(filled.blocks.at({1, 1, 0}).type, BlockType::kBase);
}

TEST(ErodeHull, RemovesOnlyExposedHullBlocks) {
  Phenotype p;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) p.blocks[{x, y, z}] = Block{BlockType::kBase, Facing::kPosX, true};
  p.blocks[{0, 0, 0}].hull = false;
  const auto e = erode_hull(p);
  // Centre cell plus the kept original block.
  EXPECT_EQ(e.size(), 2u);
  EXPECT_TRUE(e.contains({1, 1, 1}));
  EXPECT_TRUE(e.contains({0, 0, 0}));
}

TEST(SmoothHull, TemplatesFollowOpenFaces) {
  // A row of three hull blocks on top of a 3-block original base.
  Phenotype p;
  for (int x = 0; x < 3; ++x) {
    p.blocks[{x, 0, 0}] = Block{BlockType::kBase, Facing::kPosX, false};
    p.blocks[{x, 0, 1}] = Block{BlockType::kBase, Facing::kPosX, true};
  }
  const auto s = smooth_hull(p, 1);
  // End blocks: open at +-Y, +Z and one X face -> four open faces.
  EXPECT_EQ(s.blocks.at({0, 0, 1}).type, BlockType::kPeak);
  // Middle: open at +-Y and +Z -> three faces with an opposite pair.
  EXPECT_EQ(s.blocks.at({1, 0, 1}).type, BlockType::kRidge);
  EXPECT_EQ(s.blocks.at({1, 0, 0}).type, BlockType::kBase);
  const std::uint8_t open = s.blocks.at({1, 0, 1}).exposed;
  EXPECT_EQ(open, (1u << 2) | (1u << 3) | (1u << 4));
  // Zero passes leave the input untouched.
  EXPECT_EQ(smooth_hull(p, 0).blocks, p.blocks);
}

TEST(SmoothHull, SingleFaceBlocksStayCubes) {
  Phenotype p;
  p.blocks[{0, 0, 0}] = Block{BlockType::kBase, Facing::kPosX, true};
  for (const auto& d : kFaceOffsets) {
    if (d.z == 1) continue;
    p.blocks[d] = Block{BlockType::kBase, Facing::kPosX, false};
  }
  EXPECT_EQ(smooth_hull(p, 3).blocks.at({0, 0, 0}).type, BlockType::kBase);
}

// Stage containment over random ships with the brute-force membership oracle.
TEST(HullPipeline, StageContainmentOnRandomShips) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 150; ++trial) {
    const Phenotype raw = random_phenotype(rng);
    if (raw.empty()) continue;
    const auto st = build_hull_stages(raw, 2);
    std::vector<Coord> pts;
    for (const auto& [c, b] : raw.blocks) pts.push_back(c);
    const Coord lo = raw.min_corner(), hi = raw.max_corner();
    for (int x = lo.x; x <= hi.x; ++x)
      for (int y = lo.y; y <= hi.y; ++y)
        for (int z = lo.z; z <= hi.z; ++z) {
          const Coord c{x, y, z};
          const bool expect = raw.contains(c) || tsupport::in_convex_hull_lp(pts, c);
          ASSERT_EQ(st.filled.contains(c), expect);
        }
    for (const auto& [c, b] : raw.blocks) {
      ASSERT_TRUE(st.smoothed.contains(c));
      ASSERT_EQ(st.smoothed.blocks.at(c), b);
    }
    for (const auto& [c, b] : st.eroded.blocks) ASSERT_TRUE(st.filled.contains(c));
    ASSERT_EQ(st.smoothed.size(), st.eroded.size());
    EXPECT_EQ(strip_hull(st.smoothed).blocks, raw.blocks);
  }
}

TEST(Blueprint, ExportImportKeepsRawBlocks) {
  std::mt19937_64 rng(2);
  ShipDomain domain;
  for (int k = 0; k < 40; ++k) {
    auto g = evo::expand(evo::RuleSet::defaults(), rng);
    Solution s = domain.evaluate(g);
    s.id = 42;
    const auto bp = export_blueprint(s, domain.config(), 2, "#ff0000");
    EXPECT_EQ(bp.at("schema_version"), kBlueprintSchemaVersion);
    const auto& meta = bp.at("metadata");
    EXPECT_EQ(meta.at("solution_id"), 42);
    EXPECT_EQ(meta.at("colour"), "#ff0000");
    EXPECT_NEAR(meta.at("fitness_delta").get<double>(),
                meta.at("fitness").get<double>() - meta.at("fitness_raw").get<double>(), 1e-12);
    const Phenotype back = import_blueprint(bp);
    const Phenotype raw = build_phenotype(g);
    for (const auto& [c, b] : raw.blocks) {
      ASSERT_TRUE(back.contains(c));
      EXPECT_EQ(back.blocks.at(c).type, b.type);
    }
    const Phenotype hull = build_hull(raw, 2);
    ASSERT_EQ(back.size(), hull.size());
    for (const auto& [c, b] : hull.blocks) {
      ASSERT_TRUE(back.contains(c));
      EXPECT_EQ(back.blocks.at(c).type, b.type);
      EXPECT_EQ(back.blocks.at(c).hull, b.hull);
    }
  }
  Solution empty;
  EXPECT_THROW(export_blueprint(empty, domain.config(), 2), std::domain_error);
  EXPECT_THROW(export_blueprint(empty, domain.config(), 0), std::invalid_argument);
}

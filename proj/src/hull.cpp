#include "icme/hull.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

namespace icme::voxel {

namespace {

using V3 = std::array<std::int64_t, 3>;

V3 vec(const Coord& c) { return {c.x, c.y, c.z}; }
V3 sub(const V3& a, const V3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
V3 cross(const V3& a, const V3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
std::int64_t dot(const V3& a, const V3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
bool is_zero(const V3& a) { return a[0] == 0 && a[1] == 0 && a[2] == 0; }

struct Face {
  int a, b, c;
  V3 normal;
  std::int64_t offset;
};

Face make_face(const std::vector<V3>& pts, int a, int b, int c) {
  const V3 n = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
  return {a, b, c, n, dot(n, pts[a])};
}

// Incremental hull over full-dimensional input. `seed` holds four
// affinely independent point indices.
std::vector<Face> hull3(const std::vector<V3>& pts, const std::array<int, 4>& seed) {
  // Interior reference scaled by 4 to stay on the integer lattice.
  V3 inner4{};
  for (int k : seed)
    for (int d = 0; d < 3; ++d) inner4[d] += pts[k][d];

  std::vector<Face> faces;
  auto add_oriented = [&](int a, int b, int c) {
    Face f = make_face(pts, a, b, c);
    if (dot(f.normal, inner4) > 4 * f.offset) f = make_face(pts, a, c, b);
    faces.push_back(f);
  };
  const auto [s0, s1, s2, s3] = seed;
  add_oriented(s0, s1, s2);
  add_oriented(s0, s1, s3);
  add_oriented(s0, s2, s3);
  add_oriented(s1, s2, s3);

  for (int p = 0; p < static_cast<int>(pts.size()); ++p) {
    if (p == s0 || p == s1 || p == s2 || p == s3) continue;
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (dot(faces[f].normal, pts[p]) > faces[f].offset) {
        visible[f] = 1;
        any = true;
      }
    }
    if (!any) continue;
    std::map<std::pair<int, int>, int> edges;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) continue;
      const int v[3] = {faces[f].a, faces[f].b, faces[f].c};
      for (int e = 0; e < 3; ++e) ++edges[{v[e], v[(e + 1) % 3]}];
    }
    std::vector<Face> next;
    next.reserve(faces.size() + 4);
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!visible[f]) next.push_back(faces[f]);
    }
    for (const auto& [edge, count] : edges) {
      if (edges.contains({edge.second, edge.first})) continue;
      next.push_back(make_face(pts, edge.first, edge.second, p));
    }
    faces = std::move(next);
  }
  return faces;
}

std::int64_t cross2(std::int64_t ax, std::int64_t ay, std::int64_t bx, std::int64_t by) {
  return ax * by - ay * bx;
}

}  // namespace

ConvexHull ConvexHull::of(std::span<const Coord> points) {
  ConvexHull h;
  if (points.empty()) return h;
  std::vector<V3> pts(points.size());
  std::transform(points.begin(), points.end(), pts.begin(), vec);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  const V3 p0 = pts[0];
  h.origin_ = {static_cast<int>(p0[0]), static_cast<int>(p0[1]), static_cast<int>(p0[2])};
  h.dimension_ = 0;
  std::optional<int> i1, i2, i3;
  for (int k = 1; k < static_cast<int>(pts.size()) && !i1; ++k) i1 = k;
  if (!i1) return h;
  const V3 d1 = sub(pts[*i1], p0);
  for (int k = 1; k < static_cast<int>(pts.size()) && !i2; ++k) {
    if (!is_zero(cross(d1, sub(pts[k], p0)))) i2 = k;
  }
  if (!i2) {
    h.dimension_ = 1;
    h.direction_ = d1;
    h.t_min_ = h.t_max_ = 0;
    for (const auto& q : pts) {
      const auto t = dot(sub(q, p0), d1);
      h.t_min_ = std::min(h.t_min_, t);
      h.t_max_ = std::max(h.t_max_, t);
    }
    return h;
  }
  const V3 n = cross(d1, sub(pts[*i2], p0));
  for (int k = 1; k < static_cast<int>(pts.size()) && !i3; ++k) {
    if (dot(n, sub(pts[k], p0)) != 0) i3 = k;
  }
  if (!i3) {
    h.dimension_ = 2;
    h.support_ = {n, dot(n, p0)};
    int drop = 0;
    for (int d = 1; d < 3; ++d) {
      if (std::llabs(n[d]) > std::llabs(n[drop])) drop = d;
    }
    h.dropped_ = drop;
    const int u = (drop + 1) % 3;
    const int v = (drop + 2) % 3;
    std::vector<std::pair<std::int64_t, std::int64_t>> flat;
    flat.reserve(pts.size());
    for (const auto& q : pts) flat.emplace_back(q[u], q[v]);
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    // Andrew's monotone chain, collinear points dropped.
    std::vector<std::pair<std::int64_t, std::int64_t>> chain(2 * flat.size());
    std::size_t k = 0;
    auto turn = [&](const auto& o, const auto& a, const auto& b) {
      return cross2(a.first - o.first, a.second - o.second, b.first - o.first, b.second - o.second);
    };
    for (const auto& q : flat) {
      while (k >= 2 && turn(chain[k - 2], chain[k - 1], q) <= 0) --k;
      chain[k++] = q;
    }
    for (std::size_t i = flat.size() - 1, lower = k + 1; i-- > 0;) {
      while (k >= lower && turn(chain[k - 2], chain[k - 1], flat[i]) <= 0) --k;
      chain[k++] = flat[i];
    }
    chain.resize(k - 1);
    for (std::size_t e = 0; e < chain.size(); ++e) {
      const auto& a = chain[e];
      const auto& b = chain[(e + 1) % chain.size()];
      h.polygon_.push_back({a.first, a.second, b.first - a.first, b.second - a.second});
    }
    return h;
  }
  h.dimension_ = 3;
  for (const auto& f : hull3(pts, {0, *i1, *i2, *i3})) h.planes_.push_back({f.normal, f.offset});
  return h;
}

bool ConvexHull::contains(const Coord& c) const {
  const V3 p = vec(c);
  switch (dimension_) {
    case -1: return false;
    case 0: return c == origin_;
    case 1: {
      const V3 rel = sub(p, vec(origin_));
      if (!is_zero(cross(rel, direction_))) return false;
      const auto t = dot(rel, direction_);
      return t >= t_min_ && t <= t_max_;
    }
    case 2: {
      if (dot(support_.normal, p) != support_.offset) return false;
      const std::int64_t pu = p[(dropped_ + 1) % 3];
      const std::int64_t pv = p[(dropped_ + 2) % 3];
      return std::all_of(polygon_.begin(), polygon_.end(), [&](const Edge2& e) {
        return cross2(e.dx, e.dy, pu - e.ax, pv - e.ay) >= 0;
      });
    }
    default:
      return std::all_of(planes_.begin(), planes_.end(),
                         [&](const Plane& f) { return dot(f.normal, p) <= f.offset; });
  }
}

Phenotype fill_convex_hull(const Phenotype& p) {
  Phenotype out = p;
  if (p.empty()) return out;
  std::vector<Coord> centres;
  centres.reserve(p.size());
  for (const auto& [c, b] : p.blocks) centres.push_back(c);
  const auto hull = ConvexHull::of(centres);
  const Coord lo = p.min_corner();
  const Coord hi = p.max_corner();
  for (int x = lo.x; x <= hi.x; ++x)
    for (int y = lo.y; y <= hi.y; ++y)
      for (int z = lo.z; z <= hi.z; ++z) {
        const Coord c{x, y, z};
        if (!out.contains(c) && hull.contains(c)) out.blocks.emplace(c, Block{BlockType::kBase, Facing::kPosX, true});
      }
  return out;
}

Phenotype erode_hull(const Phenotype& p) {
  Phenotype out = p;
  for (const auto& [c, b] : p.blocks) {
    if (!b.hull) continue;
    const bool interior = std::all_of(kFaceOffsets.begin(), kFaceOffsets.end(),
                                      [&](const Coord& d) { return p.contains(c + d); });
    if (!interior) out.blocks.erase(c);
  }
  return out;
}

namespace {

bool shaped_hull(const Block& b) { return b.hull && b.type != BlockType::kBase; }

std::optional<BlockType> match_template(std::uint8_t open) {
  const int count = std::popcount(open);
  int opposite_pairs = 0;
  for (int axis = 0; axis < 3; ++axis) {
    if (((open >> (2 * axis)) & 3) == 3) ++opposite_pairs;
  }
  switch (count) {
    case 2: return opposite_pairs ? BlockType::kPlate : BlockType::kSlope;
    case 3: return opposite_pairs ? BlockType::kRidge : BlockType::kCorner;
    case 4: return BlockType::kPeak;
    case 5:
    case 6: return BlockType::kSpike;
    default: return std::nullopt;
  }
}

}  // namespace

Phenotype smooth_hull(const Phenotype& p, int passes) {
  Phenotype out = p;
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<std::pair<Coord, Block>> changes;
    for (const auto& [c, b] : out.blocks) {
      if (!b.hull || b.type != BlockType::kBase) continue;
      std::uint8_t open = 0;
      for (std::size_t f = 0; f < kFaceOffsets.size(); ++f) {
        auto it = out.blocks.find(c + kFaceOffsets[f]);
        if (it == out.blocks.end() || shaped_hull(it->second)) open |= static_cast<std::uint8_t>(1u << f);
      }
      if (auto shape = match_template(open)) {
        Block shaped = b;
        shaped.type = *shape;
        shaped.exposed = open;
        changes.emplace_back(c, shaped);
      }
    }
    if (changes.empty()) break;
    for (auto& [c, b] : changes) out.blocks[c] = b;
  }
  return out;
}

HullStages build_hull_stages(const Phenotype& p, int smoothing_passes) {
  HullStages s;
  s.filled = fill_convex_hull(p);
  s.eroded = erode_hull(s.filled);
  s.smoothed = smooth_hull(s.eroded, smoothing_passes);
  return s;
}

Phenotype build_hull(const Phenotype& p, int smoothing_passes) {
  return build_hull_stages(p, smoothing_passes).smoothed;
}

Phenotype strip_hull(const Phenotype& p) {
  Phenotype out;
  out.overlaps = p.overlaps;
  for (const auto& [c, b] : p.blocks) {
    if (!b.hull) out.blocks.emplace(c, b);
  }
  return out;
}

nlohmann::json export_blueprint(const Solution& s, const DomainConfig& domain, int smoothing_passes,
                                const std::string& colour) {
  if (smoothing_passes <= 0) throw std::invalid_argument("smoothing passes must be positive");
  const Phenotype raw = build_phenotype(s.genotype);
  if (raw.empty()) throw std::domain_error("cannot export an empty phenotype");
  const Phenotype hull = build_hull(raw, smoothing_passes);
  const double raw_fitness = fitness(raw, domain.densities);
  const double hull_fitness = fitness(hull, domain.densities);
  const auto d = descriptors(hull);
  return {{"schema_version", kBlueprintSchemaVersion},
          {"blocks", hull.blocks_json()},
          {"metadata",
           {{"genotype", s.genotype.atoms},
            {"solution_id", s.id},
            {"descriptors",
             {{"functional_ratio", d.functional_ratio},
              {"filled_ratio", d.filled_ratio},
              {"major_medium_ratio", d.major_medium_ratio},
              {"major_smallest_ratio", d.major_smallest_ratio}}},
            {"fitness", hull_fitness},
            {"fitness_raw", raw_fitness},
            {"fitness_delta", hull_fitness - raw_fitness},
            {"feasible", s.feasible},
            {"colour", colour},
            {"smoothing_passes", smoothing_passes}}}};
}

Phenotype import_blueprint(const nlohmann::json& blueprint) {
  Phenotype p;
  for (const auto& b : blueprint.at("blocks")) {
    const Coord c{b.at("x").get<int>(), b.at("y").get<int>(), b.at("z").get<int>()};
    Block block{block_type_from_string(b.at("type").get<std::string>()),
                facing_from_string(b.at("orientation").get<std::string>()), b.value("hull", false)};
    if (!p.blocks.emplace(c, block).second) ++p.overlaps;
  }
  return p;
}

}  // namespace icme::voxel

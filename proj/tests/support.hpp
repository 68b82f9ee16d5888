#pragma once

// Helpers shared by the unit and acceptance tests.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "icme/container.hpp"
#include "icme/ple/history.hpp"
#include "icme/solution.hpp"

namespace icme::tsupport {

/// Feasible or infeasible solution with a given BC and random scores.
inline Solution make_solution(std::uint64_t id, BcPoint bc, std::mt19937_64& rng, bool allow_infeasible = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Solution s;
  s.id = id;
  s.bc = bc;
  s.feasible = !allow_infeasible || u(rng) < 0.7;
  if (s.feasible) {
    s.fitness = u(rng) * 4.0;
  } else {
    s.violation = 0.1 + u(rng) * 3.0;
    s.fitness = -s.violation;
  }
  s.descriptors = {u(rng), u(rng), bc.x, bc.y};
  s.axes = {3.0 + u(rng) * 10.0, 2.0 + u(rng) * 3.0, 1.0 + u(rng)};
  s.genotype = evo::Genotype(std::string(1 + static_cast<std::size_t>(u(rng) * 60), 'B'));
  return s;
}

inline BcPoint random_point(const Rect& r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(r.lo.x, r.hi.x), uy(r.lo.y, r.hi.y);
  return {ux(rng), uy(rng)};
}

/// Adds random solutions until at least `occupied` bins are occupied (or
/// `max_inserts` is reached).
inline void fill_container(qd::Container& c, std::size_t occupied, std::mt19937_64& rng,
                           std::size_t max_inserts = 1000000) {
  std::uint64_t id = 1;
  for (std::size_t n = 0; n < max_inserts && c.occupied_count() < occupied; ++n) {
    c.add(make_solution(id++, random_point(c.config().bounds, rng), rng));
  }
}

/// Randomly sized selection trace over a fixed bin universe: every record
/// snapshots a random subset that includes its selection.
struct ScriptedTrace {
  std::vector<BinIndex> selected;
  std::vector<std::vector<BinIndex>> occupied;
};

inline ScriptedTrace random_trace(const std::vector<BinIndex>& universe, std::size_t length, std::mt19937_64& rng) {
  ScriptedTrace t;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t step = 0; step < length; ++step) {
    std::vector<BinIndex> occ;
    for (const auto& b : universe) {
      if (u(rng) < 0.6) occ.push_back(b);
    }
    if (occ.empty()) occ.push_back(universe[rng() % universe.size()]);
    t.selected.push_back(occ[rng() % occ.size()]);
    t.occupied.push_back(std::move(occ));
  }
  return t;
}

inline std::vector<BinIndex> grid_universe(int rows, int cols) {
  std::vector<BinIndex> out;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out.push_back({i, j, 0});
  }
  return out;
}

}  // namespace icme::tsupport

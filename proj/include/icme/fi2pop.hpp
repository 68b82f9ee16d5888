#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "icme/genotype.hpp"
#include "icme/solution.hpp"

namespace icme::evo {

/// Maps a genotype to an evaluated solution (descriptors, BC, fitness,
/// feasibility). Ids and lineage are filled in by the caller.
using Evaluator = std::function<Solution(const Genotype&)>;

struct Fi2PopConfig {
  std::size_t offspring = 10;
  std::size_t tournament_size = 2;
  double crossover_rate = 0.5;
  MutationConfig mutation;
};

/// One constrained update from a single bin. When both populations have
/// parents the offspring are split evenly between them; otherwise all come
/// from the non-empty one. Feasible parents are ranked by fitness,
/// infeasible ones by ascending violation. Throws std::invalid_argument when
/// both populations are empty.
std::vector<Solution> fi2pop_step(std::span<const Solution> feasible, std::span<const Solution> infeasible,
                                  const BinIndex& source, int generation, const RuleSet& rules,
                                  const Fi2PopConfig& config, const Evaluator& evaluate, Rng& rng);

}  // namespace icme::evo

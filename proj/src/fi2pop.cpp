#include "icme/fi2pop.hpp"

#include <stdexcept>

namespace icme::evo {

namespace {

const Solution& tournament(std::span<const Solution> pool, bool feasible, std::size_t size, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const Solution* best = &pool[pick(rng)];
  for (std::size_t k = 1; k < size; ++k) {
    const Solution& challenger = pool[pick(rng)];
    const bool better = feasible ? challenger.fitness > best->fitness : challenger.violation < best->violation;
    if (better) best = &challenger;
  }
  return *best;
}

}  // namespace

std::vector<Solution> fi2pop_step(std::span<const Solution> feasible, std::span<const Solution> infeasible,
                                  const BinIndex& source, int generation, const RuleSet& rules,
                                  const Fi2PopConfig& config, const Evaluator& evaluate, Rng& rng) {
  if (feasible.empty() && infeasible.empty()) {
    throw std::invalid_argument("selected bin " + source.key() + " has no parents");
  }
  std::size_t from_feasible = config.offspring;
  if (feasible.empty()) {
    from_feasible = 0;
  } else if (!infeasible.empty()) {
    from_feasible = config.offspring / 2;
  }

  std::vector<Solution> offspring;
  offspring.reserve(config.offspring);
  const std::size_t tsize = std::max<std::size_t>(1, config.tournament_size);
  for (std::size_t k = 0; k < config.offspring; ++k) {
    const bool use_feasible = k < from_feasible;
    const auto pool = use_feasible ? feasible : infeasible;
    const Solution& first = tournament(pool, use_feasible, tsize, rng);
    Genotype child = first.genotype;
    std::vector<std::uint64_t> parents{first.id};
    if (config.crossover_rate > 0.0 && std::bernoulli_distribution(config.crossover_rate)(rng)) {
      const Solution& second = tournament(pool, use_feasible, tsize, rng);
      child = crossover(first.genotype, second.genotype, rules.max_length, rng).first;
      if (second.id != first.id) parents.push_back(second.id);
    }
    child = mutate(child, rules, config.mutation, rng);
    Solution s = evaluate(child);
    s.lineage.source_bin = source;
    s.lineage.generation = generation;
    s.lineage.parents = std::move(parents);
    offspring.push_back(std::move(s));
  }
  return offspring;
}

}  // namespace icme::evo

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace icme {

using Rng = std::mt19937_64;

namespace evo {

// Atom alphabet. Placement atoms put a block one cell ahead of the turtle;
// lower/upper case rotation atoms turn -90/+90 degrees about the named axis.
namespace atom {
inline constexpr char kBase = 'B';
inline constexpr char kCorridor = 'C';
inline constexpr char kCockpit = 'K';
inline constexpr char kReactor = 'R';
inline constexpr char kThruster = 'T';
inline constexpr char kCargo = 'S';
inline constexpr char kPush = '[';
inline constexpr char kPop = ']';
inline constexpr std::string_view kPlacement = "BCKRTS";
inline constexpr std::string_view kRotation = "xXyYzZ";
}  // namespace atom

bool is_placement(char c);
bool is_rotation(char c);
bool is_bracket(char c);
bool brackets_balanced(std::string_view atoms);

/// L-system derived atom string.
///
/// `spans` tags atoms produced by immutable productions with a non-zero
/// module id; genetic operators never touch a tagged run. An empty `spans`
/// vector means every atom is free.
struct Genotype {
  std::string atoms;
  std::vector<std::uint32_t> spans;

  Genotype() = default;
  explicit Genotype(std::string a) : atoms(std::move(a)) {}
  Genotype(std::string a, std::vector<std::uint32_t> s) : atoms(std::move(a)), spans(std::move(s)) {}

  std::size_t size() const { return atoms.size(); }
  bool empty() const { return atoms.empty(); }
  std::uint32_t span_of(std::size_t pos) const { return spans.empty() ? 0 : spans[pos]; }
  bool locked(std::size_t pos) const { return span_of(pos) != 0; }
  bool has_locked() const;
  std::uint32_t max_span() const;

  /// Whether a sequence may be inserted before position `pos` without
  /// splitting a locked run.
  bool can_insert_at(std::size_t pos) const;

  bool operator==(const Genotype& other) const;

  nlohmann::json to_json() const;
  static Genotype from_json(const nlohmann::json& j);
};

/// Closed bracket-balanced subsequences "[...]" as [begin, end) ranges,
/// restricted to those made entirely of free atoms.
std::vector<std::pair<std::size_t, std::size_t>> free_subtrees(const Genotype& g);

/// Longest prefix of length <= max_length whose brackets are balanced.
std::size_t balanced_prefix_length(std::string_view atoms, std::size_t max_length);

struct Production {
  std::string expansion;
  double weight = 1.0;
};

struct Rule {
  std::vector<Production> productions;
  bool is_mutable = true;
};

struct RuleSet {
  std::string axiom;
  std::map<char, Rule> rules;
  int iterations = 1;
  std::size_t max_length = 200;

  /// Throws std::invalid_argument on unbalanced expansions, empty or
  /// non-positive weight sets, or bracket symbols used as rule heads.
  void validate() const;

  /// Bundled ship grammar.
  static RuleSet defaults();
  static RuleSet from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

Genotype expand(const RuleSet& rules, Rng& rng);

struct MutationConfig {
  double rate = 1.0;
  double substitute_weight = 0.4;
  double reexpand_weight = 0.3;
  double delete_weight = 0.15;
  double duplicate_weight = 0.15;
};

Genotype mutate(const Genotype& g, const RuleSet& rules, const MutationConfig& config, Rng& rng);

/// Swaps one free subtree between the parents. Parents are returned
/// unchanged when either has no free subtree or no swap fits max_length.
std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, std::size_t max_length,
                                        Rng& rng);

/// Outcome of the domain's feasibility checks.
struct ConstraintReport {
  bool feasible = true;
  double violation = 0.0;
  std::vector<std::string> reasons;
};

}  // namespace evo
}  // namespace icme

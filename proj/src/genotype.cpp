#include "icme/genotype.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace icme::evo {

bool is_placement(char c) { return atom::kPlacement.find(c) != std::string_view::npos; }
bool is_rotation(char c) { return atom::kRotation.find(c) != std::string_view::npos; }
bool is_bracket(char c) { return c == atom::kPush || c == atom::kPop; }

bool brackets_balanced(std::string_view atoms) {
  long depth = 0;
  for (char c : atoms) {
    if (c == atom::kPush) ++depth;
    if (c == atom::kPop && --depth < 0) return false;
  }
  return depth == 0;
}

std::size_t balanced_prefix_length(std::string_view atoms, std::size_t max_length) {
  std::size_t best = 0;
  long depth = 0;
  const std::size_t n = std::min(atoms.size(), max_length);
  for (std::size_t i = 0; i < n; ++i) {
    if (atoms[i] == atom::kPush) ++depth;
    if (atoms[i] == atom::kPop) --depth;
    if (depth < 0) break;
    if (depth == 0) best = i + 1;
  }
  return best;
}

bool Genotype::has_locked() const {
  return std::any_of(spans.begin(), spans.end(), [](std::uint32_t s) { return s != 0; });
}

std::uint32_t Genotype::max_span() const {
  return spans.empty() ? 0 : *std::max_element(spans.begin(), spans.end());
}

bool Genotype::can_insert_at(std::size_t pos) const {
  if (pos == 0 || pos >= atoms.size()) return true;
  const auto left = span_of(pos - 1);
  return left == 0 || left != span_of(pos);
}

bool Genotype::operator==(const Genotype& other) const {
  if (atoms != other.atoms) return false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (span_of(i) != other.span_of(i)) return false;
  }
  return true;
}

nlohmann::json Genotype::to_json() const {
  nlohmann::json j = {{"atoms", atoms}};
  if (has_locked()) j["spans"] = spans;
  return j;
}

Genotype Genotype::from_json(const nlohmann::json& j) {
  Genotype g;
  if (j.is_string()) {
    g.atoms = j.get<std::string>();
  } else {
    g.atoms = j.at("atoms").get<std::string>();
    if (j.contains("spans")) g.spans = j.at("spans").get<std::vector<std::uint32_t>>();
  }
  if (!g.spans.empty() && g.spans.size() != g.atoms.size()) {
    throw std::invalid_argument("genotype spans length mismatch");
  }
  if (!brackets_balanced(g.atoms)) throw std::invalid_argument("genotype brackets unbalanced");
  return g;
}

std::vector<std::pair<std::size_t, std::size_t>> free_subtrees(const Genotype& g) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    if (g.atoms[i] == atom::kPush) {
      open.push_back(i);
    } else if (g.atoms[i] == atom::kPop && !open.empty()) {
      const std::size_t begin = open.back();
      open.pop_back();
      bool free = true;
      for (std::size_t k = begin; k <= i && free; ++k) free = !g.locked(k);
      if (free) out.emplace_back(begin, i + 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RuleSet::validate() const {
  if (!brackets_balanced(axiom)) throw std::invalid_argument("axiom brackets unbalanced");
  if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
  if (max_length == 0) throw std::invalid_argument("max_length must be positive");
  for (const auto& [symbol, rule] : rules) {
    if (is_bracket(symbol)) throw std::invalid_argument("brackets cannot be rewritten");
    if (rule.productions.empty()) {
      throw std::invalid_argument(std::string("rule without productions: ") + symbol);
    }
    double total = 0.0;
    for (const auto& p : rule.productions) {
      if (p.weight < 0.0) throw std::invalid_argument("negative production weight");
      if (!brackets_balanced(p.expansion)) {
        throw std::invalid_argument("unbalanced expansion: " + p.expansion);
      }
      total += p.weight;
    }
    if (!(total > 0.0)) throw std::invalid_argument(std::string("zero total weight for ") + symbol);
  }
}

RuleSet RuleSet::defaults() {
  RuleSet r;
  // K cockpit, A hull body, R reactor, E thruster clusters on each axis.
  r.axiom = "K[zzE]AR[zE][ZE][yE][YE]E";
  r.iterations = 4;
  r.max_length = 200;
  r.rules['A'] = Rule{{{"C", 1.0},
                       {"CA", 3.0},
                       {"CC[zW]A", 1.0},
                       {"CC[ZW]A", 1.0},
                       {"C[yW]A", 1.0},
                       {"C[YW]A", 1.0},
                       {"SA", 1.0},
                       {"BA", 1.0}},
                      true};
  r.rules['W'] = Rule{{{"B", 1.0}, {"BW", 2.0}, {"S", 1.0}, {"B[zW]", 0.5}, {"BBW", 1.0}}, true};
  r.rules['E'] = Rule{{{"T", 2.0}, {"BT", 1.0}, {"CT", 1.0}}, true};
  return r;
}

RuleSet RuleSet::from_json(const nlohmann::json& j) {
  RuleSet r;
  r.axiom = j.at("axiom").get<std::string>();
  r.iterations = j.value("iterations", 1);
  r.max_length = j.value("max_length", std::size_t{200});
  for (const auto& entry : j.at("rules")) {
    const auto symbol = entry.at("symbol").get<std::string>();
    if (symbol.size() != 1) throw std::invalid_argument("rule symbol must be a single character");
    Rule rule;
    rule.is_mutable = entry.value("mutable", true);
    for (const auto& e : entry.at("expansions")) {
      rule.productions.push_back({e.at("expansion").get<std::string>(), e.value("weight", 1.0)});
    }
    r.rules[symbol[0]] = std::move(rule);
  }
  r.validate();
  return r;
}

nlohmann::json RuleSet::to_json() const {
  nlohmann::json rules_json = nlohmann::json::array();
  for (const auto& [symbol, rule] : rules) {
    nlohmann::json expansions = nlohmann::json::array();
    for (const auto& p : rule.productions) {
      expansions.push_back({{"expansion", p.expansion}, {"weight", p.weight}});
    }
    rules_json.push_back(
        {{"symbol", std::string(1, symbol)}, {"mutable", rule.is_mutable}, {"expansions", expansions}});
  }
  return {{"axiom", axiom}, {"iterations", iterations}, {"max_length", max_length}, {"rules", rules_json}};
}

namespace {

const Production& choose(const Rule& rule, Rng& rng) {
  if (rule.productions.size() == 1) return rule.productions.front();
  std::vector<double> weights;
  weights.reserve(rule.productions.size());
  for (const auto& p : rule.productions) weights.push_back(p.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return rule.productions[pick(rng)];
}

// One parallel rewrite. Locked atoms are frozen; immutable rules tag their
// output with a fresh span id starting after `next_span`.
Genotype rewrite_once(const Genotype& g, const RuleSet& rules, std::uint32_t& next_span, Rng& rng) {
  Genotype out;
  out.atoms.reserve(g.atoms.size() * 2);
  out.spans.reserve(g.atoms.size() * 2);
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    const char c = g.atoms[i];
    const auto it = rules.rules.find(c);
    if (g.locked(i) || it == rules.rules.end()) {
      out.atoms.push_back(c);
      out.spans.push_back(g.span_of(i));
      continue;
    }
    const auto& production = choose(it->second, rng);
    const std::uint32_t tag = it->second.is_mutable ? 0 : ++next_span;
    out.atoms += production.expansion;
    out.spans.insert(out.spans.end(), production.expansion.size(), tag);
  }
  if (!out.has_locked()) out.spans.clear();
  return out;
}

void truncate(Genotype& g, std::size_t max_length) {
  if (g.atoms.size() <= max_length) return;
  const std::size_t keep = balanced_prefix_length(g.atoms, max_length);
  g.atoms.resize(keep);
  if (!g.spans.empty()) g.spans.resize(keep);
}

Genotype expand_from(Genotype g, const RuleSet& rules, int iterations, std::uint32_t first_span,
                     Rng& rng) {
  std::uint32_t next_span = first_span;
  for (int it = 0; it < iterations; ++it) {
    g = rewrite_once(g, rules, next_span, rng);
    if (g.atoms.size() > rules.max_length) {
      truncate(g, rules.max_length);
      break;
    }
  }
  return g;
}

void ensure_spans(Genotype& g) {
  if (g.spans.empty()) g.spans.assign(g.atoms.size(), 0);
}

void compact_spans(Genotype& g) {
  if (!g.has_locked()) g.spans.clear();
}

void replace_range(Genotype& g, std::size_t begin, std::size_t end, const Genotype& with) {
  ensure_spans(g);
  Genotype patch = with;
  ensure_spans(patch);
  g.atoms.replace(begin, end - begin, patch.atoms);
  g.spans.erase(g.spans.begin() + static_cast<std::ptrdiff_t>(begin),
                g.spans.begin() + static_cast<std::ptrdiff_t>(end));
  g.spans.insert(g.spans.begin() + static_cast<std::ptrdiff_t>(begin), patch.spans.begin(),
                 patch.spans.end());
  compact_spans(g);
}

std::vector<std::size_t> free_atom_positions(const Genotype& g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    if (!g.locked(i) && !is_bracket(g.atoms[i])) out.push_back(i);
  }
  return out;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

bool substitute(Genotype& g, Rng& rng) {
  const auto positions = free_atom_positions(g);
  if (positions.empty()) return false;
  const std::size_t pos = positions[uniform_index(positions.size(), rng)];
  const char old = g.atoms[pos];
  const std::string_view pool = is_rotation(old) ? atom::kRotation : atom::kPlacement;
  char replacement = old;
  while (replacement == old) replacement = pool[uniform_index(pool.size(), rng)];
  g.atoms[pos] = replacement;
  return true;
}

bool reexpand(Genotype& g, const RuleSet& rules, Rng& rng) {
  std::vector<char> symbols;
  for (const auto& [symbol, rule] : rules.rules) {
    if (rule.is_mutable) symbols.push_back(symbol);
  }
  const auto positions = free_atom_positions(g);
  if (symbols.empty() || positions.empty()) return false;
  const std::size_t pos = positions[uniform_index(positions.size(), rng)];
  const char symbol = symbols[uniform_index(symbols.size(), rng)];
  const Genotype sub = expand_from(Genotype(std::string(1, symbol)), rules,
                                   std::max(1, rules.iterations - 1), g.max_span(), rng);
  if (g.size() - 1 + sub.size() > rules.max_length) return false;
  replace_range(g, pos, pos + 1, sub);
  return true;
}

bool delete_subtree(Genotype& g, Rng& rng) {
  const auto subtrees = free_subtrees(g);
  if (subtrees.empty()) return false;
  const auto [begin, end] = subtrees[uniform_index(subtrees.size(), rng)];
  replace_range(g, begin, end, Genotype{});
  return true;
}

bool duplicate_subtree(Genotype& g, std::size_t max_length, Rng& rng) {
  const auto subtrees = free_subtrees(g);
  if (subtrees.empty()) return false;
  const auto [begin, end] = subtrees[uniform_index(subtrees.size(), rng)];
  if (g.size() + (end - begin) > max_length) return false;
  std::vector<std::size_t> slots;
  for (std::size_t pos = 0; pos <= g.size(); ++pos) {
    if (g.can_insert_at(pos)) slots.push_back(pos);
  }
  const Genotype copy(g.atoms.substr(begin, end - begin));
  const std::size_t at = slots[uniform_index(slots.size(), rng)];
  replace_range(g, at, at, copy);
  return true;
}

}  // namespace

Genotype expand(const RuleSet& rules, Rng& rng) {
  Genotype g(rules.axiom);
  truncate(g, rules.max_length);
  return expand_from(std::move(g), rules, rules.iterations, 0, rng);
}

Genotype mutate(const Genotype& g, const RuleSet& rules, const MutationConfig& config, Rng& rng) {
  if (config.rate <= 0.0) return g;
  if (config.rate < 1.0 && !std::bernoulli_distribution(config.rate)(rng)) return g;
  const double weights[] = {config.substitute_weight, config.reexpand_weight, config.delete_weight,
                            config.duplicate_weight};
  if (std::accumulate(std::begin(weights), std::end(weights), 0.0) <= 0.0) return g;
  std::discrete_distribution<int> pick(std::begin(weights), std::end(weights));
  for (int attempt = 0; attempt < 8; ++attempt) {
    Genotype child = g;
    bool applied = false;
    switch (pick(rng)) {
      case 0: applied = substitute(child, rng); break;
      case 1: applied = reexpand(child, rules, rng); break;
      case 2: applied = delete_subtree(child, rng); break;
      default: applied = duplicate_subtree(child, rules.max_length, rng); break;
    }
    if (applied) return child;
  }
  return g;
}

std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, std::size_t max_length,
                                        Rng& rng) {
  const auto sa = free_subtrees(a);
  const auto sb = free_subtrees(b);
  if (sa.empty() || sb.empty()) return {a, b};
  for (int attempt = 0; attempt < 8; ++attempt) {
    const auto [a0, a1] = sa[uniform_index(sa.size(), rng)];
    const auto [b0, b1] = sb[uniform_index(sb.size(), rng)];
    const std::size_t len_a = a.size() - (a1 - a0) + (b1 - b0);
    const std::size_t len_b = b.size() - (b1 - b0) + (a1 - a0);
    if (len_a > max_length || len_b > max_length) continue;
    Genotype child_a = a;
    Genotype child_b = b;
    replace_range(child_a, a0, a1, Genotype(b.atoms.substr(b0, b1 - b0)));
    replace_range(child_b, b0, b1, Genotype(a.atoms.substr(a0, a1 - a0)));
    return {std::move(child_a), std::move(child_b)};
  }
  return {a, b};
}

}  // namespace icme::evo

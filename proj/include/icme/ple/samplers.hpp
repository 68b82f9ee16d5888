#pragma once

#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/genotype.hpp"
#include "icme/ple/history.hpp"
#include "icme/types.hpp"

namespace icme::ple {

enum class SamplerKind { kNone, kUniform, kGreedy, kEpsGreedy, kBoltzmann, kThompson };

std::string_view to_string(SamplerKind k);
SamplerKind sampler_kind_from_string(std::string_view s);

/// First bin with the largest logit (ties resolve to the earliest bin in
/// container order). Throws std::invalid_argument on empty logits.
BinIndex sample_greedy(const PreferenceLogits& logits);

BinIndex sample_uniform(const std::vector<BinIndex>& occupied, Rng& rng);

/// Greedy with probability 1 - epsilon, uniform otherwise; then
/// epsilon <- epsilon * (1 - decay).
BinIndex sample_eps_greedy(const PreferenceLogits& logits, double& epsilon, double decay, Rng& rng);

/// Softmax probabilities exp(L / tau) / sum exp(L / tau).
std::vector<double> boltzmann_probabilities(const PreferenceLogits& logits, double tau);

/// Draws from the softmax, then tau <- tau * (1 - decay).
BinIndex sample_boltzmann(const PreferenceLogits& logits, double& tau, double decay, Rng& rng);

/// Per-bin Beta(alpha, beta) parameters. Bins never updated sit at the prior.
class BetaPosterior {
 public:
  explicit BetaPosterior(double alpha0 = 1.0, double beta0 = 1.0);

  std::pair<double, double> at(const BinIndex& b) const;
  double alpha0() const { return alpha0_; }
  double beta0() const { return beta0_; }
  const std::unordered_map<BinIndex, std::pair<double, double>, BinIndexHash>& params() const { return params_; }

  /// The selected bin gains (1, 1); every other occupied bin gains (0, 1).
  /// Throws std::invalid_argument when `selected` is not in `occupied`.
  void update(const BinIndex& selected, const std::vector<BinIndex>& occupied);
  void set(const BinIndex& b, double alpha, double beta) { params_[b] = {alpha, beta}; }
  void clear() { params_.clear(); }

  nlohmann::json to_json() const;

 private:
  double alpha0_;
  double beta0_;
  std::unordered_map<BinIndex, std::pair<double, double>, BinIndexHash> params_;
};

BetaPosterior thompson_update(BetaPosterior posterior, const BinIndex& selected,
                              const std::vector<BinIndex>& occupied);

/// Beta(a, b) draw from two gamma variates.
double sample_beta(double a, double b, Rng& rng);

/// One Beta draw per occupied bin; the largest draw wins.
BinIndex sample_thompson(const BetaPosterior& posterior, const std::vector<BinIndex>& occupied, Rng& rng);

}  // namespace icme::ple

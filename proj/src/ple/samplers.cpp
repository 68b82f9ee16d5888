#include "icme/ple/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace icme::ple {

std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::kNone: return "none";
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kGreedy: return "greedy";
    case SamplerKind::kEpsGreedy: return "eps_greedy";
    case SamplerKind::kBoltzmann: return "boltzmann";
    case SamplerKind::kThompson: return "thompson";
  }
  return "none";
}

SamplerKind sampler_kind_from_string(std::string_view s) {
  for (auto k : {SamplerKind::kNone, SamplerKind::kUniform, SamplerKind::kGreedy, SamplerKind::kEpsGreedy,
                 SamplerKind::kBoltzmann, SamplerKind::kThompson}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown sampler kind: " + std::string(s));
}

namespace {

void require_bins(std::size_t n) {
  if (n == 0) throw std::invalid_argument("no occupied bins to sample from");
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

BinIndex sample_greedy(const PreferenceLogits& logits) {
  require_bins(logits.size());
  return logits.bins[argmax_first(logits.values)];
}

BinIndex sample_uniform(const std::vector<BinIndex>& occupied, Rng& rng) {
  require_bins(occupied.size());
  return occupied[std::uniform_int_distribution<std::size_t>(0, occupied.size() - 1)(rng)];
}

BinIndex sample_eps_greedy(const PreferenceLogits& logits, double& epsilon, double decay, Rng& rng) {
  require_bins(logits.size());
  // The uniform draw is consumed even when epsilon is 0 so the random stream
  // does not depend on epsilon.
  const bool explore = unit(rng) < epsilon;
  const BinIndex pick = explore ? sample_uniform(logits.bins, rng) : sample_greedy(logits);
  epsilon *= 1.0 - decay;
  return pick;
}

std::vector<double> boltzmann_probabilities(const PreferenceLogits& logits, double tau) {
  require_bins(logits.size());
  if (!(tau > 0.0)) throw std::invalid_argument("temperature must be positive");
  const double top = *std::max_element(logits.values.begin(), logits.values.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((logits.values[i] - top) / tau);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

BinIndex sample_boltzmann(const PreferenceLogits& logits, double& tau, double decay, Rng& rng) {
  const std::vector<double> p = boltzmann_probabilities(logits, tau);
  const double u = unit(rng);
  double acc = 0.0;
  std::size_t pick = p.size() - 1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  tau *= 1.0 - decay;
  return logits.bins[pick];
}

BetaPosterior::BetaPosterior(double alpha0, double beta0) : alpha0_(alpha0), beta0_(beta0) {
  if (!(alpha0 > 0.0) || !(beta0 > 0.0)) throw std::invalid_argument("Beta prior parameters must be positive");
}

std::pair<double, double> BetaPosterior::at(const BinIndex& b) const {
  const auto it = params_.find(b);
  return it == params_.end() ? std::pair{alpha0_, beta0_} : it->second;
}

void BetaPosterior::update(const BinIndex& selected, const std::vector<BinIndex>& occupied) {
  if (std::find(occupied.begin(), occupied.end(), selected) == occupied.end()) {
    throw std::invalid_argument("selected bin " + selected.key() + " is not occupied");
  }
  for (const BinIndex& b : occupied) {
    auto [it, inserted] = params_.try_emplace(b, alpha0_, beta0_);
    if (b == selected) it->second.first += 1.0;
    it->second.second += 1.0;
  }
}

nlohmann::json BetaPosterior::to_json() const {
  nlohmann::json bins = nlohmann::json::object();
  for (const auto& [b, ab] : params_) bins[b.key()] = {ab.first, ab.second};
  return {{"alpha0", alpha0_}, {"beta0", beta0_}, {"bins", bins}};
}

BetaPosterior thompson_update(BetaPosterior posterior, const BinIndex& selected,
                              const std::vector<BinIndex>& occupied) {
  posterior.update(selected, occupied);
  return posterior;
}

double sample_beta(double a, double b, Rng& rng) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  if (x + y == 0.0) return 0.5;
  return x / (x + y);
}

BinIndex sample_thompson(const BetaPosterior& posterior, const std::vector<BinIndex>& occupied, Rng& rng) {
  require_bins(occupied.size());
  std::vector<double> draws(occupied.size());
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    const auto [a, b] = posterior.at(occupied[i]);
    draws[i] = sample_beta(a, b, rng);
  }
  return occupied[argmax_first(draws)];
}

}  // namespace icme::ple

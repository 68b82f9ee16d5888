#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/container.hpp"
#include "icme/ple/features.hpp"
#include "icme/ple/history.hpp"
#include "icme/ple/models.hpp"
#include "icme/ple/samplers.hpp"

namespace icme::ple {

/// (window, features, model, sampler) plus hyperparameters.
struct EmitterConfig {
  std::string name = "best_ple";
  /// History length k; nullopt means unbounded.
  std::optional<std::size_t> window;
  FeatureKind features = FeatureKind::kAxesOnly;
  ModelKind model = ModelKind::kNeural;
  SamplerKind sampler = SamplerKind::kBoltzmann;

  double delta = 1.0;
  double lambda_tab = 0.5;
  double epsilon0 = 0.9;
  double epsilon_decay = 0.1;
  double tau0 = 0.5;
  double tau_decay = 0.05;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  /// Rescale regression scores so the largest is 1 before sampling.
  /// Time-averaged targets are at most 1/k, which leaves Boltzmann
  /// sampling on raw predictions close to uniform.
  bool normalise = true;
  ModelParams params;

  /// Human-only operation: the emitter is never invoked.
  bool is_null() const { return sampler == SamplerKind::kNone; }

  /// Throws std::invalid_argument for inconsistent combinations.
  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from the preset named by "name" (or the default when absent)
  /// and overrides any other field present. Unknown names without an
  /// explicit model and sampler are rejected.
  static EmitterConfig from_json(const nlohmann::json& j);

  /// "null", "random", "greedy" or "best_ple".
  static EmitterConfig preset(const std::string& name);
  static const std::vector<std::string>& preset_names();
};

/// Preference-learning emitter: selection history, optional Beta posterior,
/// a lazily refitted model and the sampler state.
class Emitter {
 public:
  Emitter(EmitterConfig config, std::size_t max_length);

  const EmitterConfig& config() const { return config_; }
  bool is_null() const { return config_.is_null(); }

  /// Records a human selection made from the current container.
  void update(const qd::Container& c, const BinIndex& selected, std::vector<Credit> credits, int iteration);

  /// Model scores over the container's occupied bins (refits first when the
  /// history changed).
  PreferenceLogits logits(const qd::Container& c, Rng& rng);
  /// Picks the next bin to evolve. Throws std::logic_error for the null
  /// emitter and std::invalid_argument when nothing is occupied.
  BinIndex emit(const qd::Container& c, Rng& rng);

  /// Clears history, posterior, model and the decayed epsilon / tau.
  void reset();

  const SelectionHistory& history() const { return history_; }
  const BetaPosterior& posterior() const { return posterior_; }
  double epsilon() const { return epsilon_; }
  double tau() const { return tau_; }
  const Regressor* model() const { return model_.get(); }
  std::size_t fits() const { return fits_; }

  /// History, posterior and sampler state. The fitted model is not
  /// serialised; it is refitted on the next emit.
  nlohmann::json state_json() const;
  void load_state(const nlohmann::json& j);

 private:
  Eigen::MatrixXd features_for(const qd::Container& c, const std::vector<BinIndex>& occupied) const;

  EmitterConfig config_;
  std::size_t max_length_;
  SelectionHistory history_;
  BetaPosterior posterior_;
  std::unique_ptr<Regressor> model_;
  bool dirty_ = true;
  bool fitted_ = false;
  std::size_t fits_ = 0;
  double epsilon_;
  double tau_;
};

}  // namespace icme::ple

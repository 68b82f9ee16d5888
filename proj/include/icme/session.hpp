#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/container.hpp"
#include "icme/fi2pop.hpp"
#include "icme/genotype.hpp"
#include "icme/ple/emitter.hpp"
#include "icme/voxel.hpp"

namespace icme::session {

enum class Mode { kUser, kDeveloper, kStudy };

std::string_view to_string(Mode m);
Mode mode_from_string(std::string_view s);

/// An action the current mode or study phase does not allow.
class ActionRejected : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct SessionConfig {
  qd::ContainerConfig container;
  evo::RuleSet rules = evo::RuleSet::defaults();
  voxel::DomainConfig domain;
  ple::EmitterConfig emitter;
  evo::Fi2PopConfig fi2pop;
  /// Emitter steps per human step.
  int n_steps = 3;
  std::size_t initial_population = 20;
  Mode mode = Mode::kUser;
  std::uint64_t seed = 0;
  std::vector<std::string> study_order{"null", "random", "greedy", "best_ple"};
  int study_iterations = 6;
  int smoothing_passes = 2;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults.
  static SessionConfig from_json(const nlohmann::json& j);
};

/// One row of the metrics log, written once per human step.
struct MetricsRecord {
  int iteration = 0;
  std::string action;
  std::string selected_bin;
  std::string emitter_kind;
  int n_steps = 0;
  int fi2pop_updates = 0;
  std::size_t solutions_generated = 0;
  std::size_t solutions_inserted = 0;
  /// Mean genotype length of the solutions generated in the step.
  double mean_complexity = 0.0;
  std::size_t occupied_bin_count = 0;
  double coverage = 0.0;
  /// Mean wall time of one emitter step (emit + update); 0 without emitter steps.
  double emitter_step_seconds = 0.0;
  double step_seconds = 0.0;
  /// Solutions inspected since the previous step.
  std::size_t inspections = 0;

  nlohmann::json to_json() const;
  static MetricsRecord from_json(const nlohmann::json& j);
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

struct StepReport {
  int iteration = 0;
  std::string action;
  BinIndex selected;
  std::vector<BinIndex> emitted;
  /// Bins that were unoccupied (or absent) before the step and are occupied
  /// after it.
  std::vector<BinIndex> new_bins;
  MetricsRecord metrics;

  nlohmann::json to_json() const;
};

struct StudyPhase {
  std::string emitter;
  int n_steps = 0;
  std::vector<MetricsRecord> iterations;
  std::optional<BinIndex> favourite;
  std::optional<std::uint64_t> favourite_solution;
  double favourite_fitness = 0.0;

  nlohmann::json to_json() const;
};

struct StudyReport {
  std::vector<StudyPhase> phases;
  bool complete = false;

  nlohmann::json to_json() const;
};

/// Copy of everything the read-only views need, taken between mutations.
struct Snapshot {
  qd::Container container;
  SessionConfig config;
  int iteration = 0;
  std::string emitter_name;
  std::vector<MetricsRecord> metrics;
  std::vector<int> resets;
  StudyReport study;
  bool awaiting_favourite = false;
  std::size_t study_phase = 0;
  std::uint64_t fi2pop_updates = 0;
  std::uint64_t insert_attempts = 0;
};

/// Interactive constrained MAP-Elites with a preference-learning emitter.
///
/// Every public mutator validates its input before touching state, so a
/// thrown error leaves the session as it was.
class Session {
 public:
  explicit Session(SessionConfig config);

  const SessionConfig& config() const { return config_; }
  Mode mode() const { return config_.mode; }
  const qd::Container& container() const { return container_; }
  const ple::Emitter& emitter() const { return emitter_; }
  const voxel::ShipDomain& domain() const { return domain_; }
  int iteration() const { return iteration_; }
  const std::vector<MetricsRecord>& metrics() const { return metrics_; }
  /// Iterations at which the population was reinitialised.
  const std::vector<int>& resets() const { return resets_; }
  std::uint64_t fi2pop_updates() const { return total_updates_; }
  std::uint64_t insert_attempts() const { return total_attempts_; }

  /// Evolve from a human-selected bin (one human step of the algorithm).
  StepReport user_step(const BinIndex& bin);
  /// Evolve from a uniformly drawn occupied bin; not recorded as a
  /// preference signal.
  StepReport random_step();
  /// Fresh seeded population; emitter state cleared, metrics kept.
  void reinitialise();

  /// Counts a preview of a bin's elite as an inspection.
  void note_inspection() { ++inspections_; }

  /// Developer-mode changes: emitter, n_steps, safe_mode, fitness_weights,
  /// bc, rules, module mutability, offspring. Anything that alters the
  /// domain re-evaluates and re-bins every stored solution.
  void apply_config_patch(const nlohmann::json& patch);

  // Study mode.
  void start_study(std::vector<std::string> order, int iterations_per_emitter);
  const StudyReport& study() const { return study_; }
  bool awaiting_favourite() const;
  std::size_t study_phase() const { return phase_; }
  /// Records the favourite of the current phase and moves to the next one.
  void choose_favourite(const BinIndex& bin);

  Snapshot snapshot() const;

  /// Full state: config, container, emitter state, counters and RNG.
  nlohmann::json save() const;
  static Session load(const nlohmann::json& j);

 private:
  struct UpdateOutcome {
    std::size_t generated = 0;
    std::size_t inserted = 0;
    std::size_t total_length = 0;
  };

  void require_occupied(const BinIndex& bin) const;
  UpdateOutcome evolve_from(const BinIndex& bin);
  StepReport run_step(const BinIndex& first, std::string action, bool human);
  void seed_population();
  void rebuild_domain(const voxel::DomainConfig& domain, const qd::ContainerConfig& container);
  void begin_phase();
  void check_action(bool random_or_reset) const;
  qd::ContainerConfig container_config_for(const voxel::DomainConfig& domain) const;
  Solution stamp(Solution s);

  SessionConfig config_;
  voxel::ShipDomain domain_;
  qd::Container container_;
  ple::Emitter emitter_;
  Rng rng_;
  int iteration_ = 0;
  std::uint64_t next_id_ = 1;
  std::uint64_t total_updates_ = 0;
  std::uint64_t total_attempts_ = 0;
  std::size_t inspections_ = 0;
  ple::GeneratedCounts generated_now_;
  ple::GeneratedCounts generated_prev_;
  std::vector<MetricsRecord> metrics_;
  std::vector<int> resets_;

  StudyReport study_;
  std::vector<std::string> study_order_;
  int study_iterations_ = 0;
  std::size_t phase_ = 0;
  bool study_active_ = false;
};

using BinChooser = std::function<BinIndex(const Session&)>;

/// Runs a whole study: for each emitter in `order`, `iterations_per_emitter`
/// human steps chosen by `select`, then a favourite chosen by `favourite`.
/// Requires a study-mode session.
StudyReport study_session(Session& s, const std::vector<std::string>& order, int iterations_per_emitter,
                          const BinChooser& select, const BinChooser& favourite);

/// Grid view for the UI: every leaf bin with occupancy and overlays.
nlohmann::json grid_json(const Snapshot& s);

/// Elite (or best infeasible member) of a bin with its phenotype. With
/// `interior` the hull is left out; otherwise the smoothed hull is shown.
/// Throws std::out_of_range for unoccupied bins.
nlohmann::json solution_json(const Snapshot& s, const BinIndex& bin, bool interior);

/// Blueprint of a bin's elite. Throws std::out_of_range for unoccupied bins.
nlohmann::json export_json(const Snapshot& s, const BinIndex& bin);

/// Metrics rows, reset markers and session totals.
nlohmann::json metrics_json(const Snapshot& s);
std::string metrics_csv(const Snapshot& s);

}  // namespace icme::session

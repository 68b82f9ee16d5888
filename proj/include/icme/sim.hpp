#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/container.hpp"
#include "icme/session.hpp"

namespace icme::sim {

/// Simulated user who always wants ships near one BC point, optionally
/// switching to another target from `switch_iteration` on.
struct PreferenceProfile {
  BcPoint target{2.0, 3.0};
  double tolerance = 0.75;
  struct Drift {
    BcPoint target;
    int switch_iteration = 0;
  };
  std::optional<Drift> drift;

  BcPoint target_at(int iteration) const;
  void validate(const Rect& bounds) const;
  nlohmann::json to_json() const;
  static PreferenceProfile from_json(const nlohmann::json& j);
};

/// Geometric bounds of a bin index under a container configuration.
Rect bin_rect(const qd::ContainerConfig& config, const BinIndex& b);
BcPoint bin_centre(const qd::ContainerConfig& config, const BinIndex& b);

/// Occupied bin whose centre is nearest the current target; ties go to the
/// earliest bin in container order. Throws std::invalid_argument when
/// nothing is occupied.
BinIndex simulate_user(const PreferenceProfile& profile, const qd::Container& container, int iteration);

/// A bin picked by the emitter, with the iteration it was picked in.
struct Emission {
  BinIndex bin;
  BcPoint centre;
  int iteration = 0;
};

struct Selection {
  BinIndex bin;
  int iteration = 0;
};

/// Fraction of emissions whose centre lies within tolerance of the target
/// active at their iteration. NaN without emissions.
double alignment(const std::vector<Emission>& emitted, const PreferenceProfile& profile);

/// Fraction of emissions that neither equal nor lie inside (nor contain) a
/// bin the user selected at or before their iteration. NaN without
/// emissions.
double serendipity(const std::vector<Emission>& emitted, const std::vector<Selection>& selections);

/// One benchmark arm: an emitter and its step count.
struct ArmConfig {
  std::string name;
  ple::EmitterConfig emitter;
  int n_steps = 3;

  nlohmann::json to_json() const;
  static ArmConfig from_json(const nlohmann::json& j);
};

struct BenchmarkSettings {
  std::vector<ArmConfig> arms;
  int runs = 20;
  int iterations = 10;
  std::uint64_t seed = 0;
  PreferenceProfile profile;
  /// Base session configuration (its emitter and seed are overridden).
  session::SessionConfig session;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;

  static BenchmarkSettings from_json(const nlohmann::json& j);
};

struct RunResult {
  std::string arm;
  int run = 0;
  std::uint64_t seed = 0;
  double alignment = 0.0;
  double serendipity = 0.0;
  /// Over the emissions of the last iteration only.
  double final_alignment = 0.0;
  double final_serendipity = 0.0;
  /// Mean over emissions of the share of occupied bins within tolerance: the
  /// alignment a uniform pick would have had.
  double chance_alignment = 0.0;
  double coverage = 0.0;
  double mean_emitter_step_seconds = 0.0;
  std::size_t solutions_generated = 0;
  std::size_t emissions = 0;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Mean and sample standard deviation over the finite values.
Summary summarise(const std::vector<double>& values);

struct ArmReport {
  std::string name;
  std::vector<RunResult> runs;

  std::vector<double> column(double RunResult::*field) const;
  nlohmann::json summary_json() const;
};

struct BenchmarkReport {
  std::vector<ArmReport> arms;

  const ArmReport& arm(const std::string& name) const;
  std::string runs_csv() const;
  std::string summary_csv() const;
  nlohmann::json summary_json() const;
};

/// Seed of run `run` derived from the master seed.
std::uint64_t run_seed(std::uint64_t master, std::size_t arm, int run);

RunResult simulate_run(const ArmConfig& arm, const BenchmarkSettings& settings, int run, std::uint64_t seed);

/// Every arm, `runs` independent seeded sessions each. Results do not
/// depend on the thread count.
BenchmarkReport run_benchmark(const BenchmarkSettings& settings);

/// One-sided Welch t-test of H1: mean(a) > mean(b). Returns the p-value.
double welch_greater(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace icme::sim

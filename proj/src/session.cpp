#include "icme/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "icme/hull.hpp"

namespace icme::session {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool finite_bc(const Solution& s) { return std::isfinite(s.bc.x) && std::isfinite(s.bc.y); }

nlohmann::json fi2pop_json(const evo::Fi2PopConfig& c) {
  return {{"offspring", c.offspring},
          {"tournament_size", c.tournament_size},
          {"crossover_rate", c.crossover_rate},
          {"mutation",
           {{"rate", c.mutation.rate},
            {"substitute", c.mutation.substitute_weight},
            {"reexpand", c.mutation.reexpand_weight},
            {"delete", c.mutation.delete_weight},
            {"duplicate", c.mutation.duplicate_weight}}}};
}

evo::Fi2PopConfig fi2pop_from_json(const nlohmann::json& j) {
  evo::Fi2PopConfig c;
  c.offspring = j.value("offspring", c.offspring);
  c.tournament_size = j.value("tournament_size", c.tournament_size);
  c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
  if (j.contains("mutation")) {
    const auto& m = j.at("mutation");
    c.mutation.rate = m.value("rate", c.mutation.rate);
    c.mutation.substitute_weight = m.value("substitute", c.mutation.substitute_weight);
    c.mutation.reexpand_weight = m.value("reexpand", c.mutation.reexpand_weight);
    c.mutation.delete_weight = m.value("delete", c.mutation.delete_weight);
    c.mutation.duplicate_weight = m.value("duplicate", c.mutation.duplicate_weight);
  }
  return c;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_state(const std::string& s) {
  Rng rng;
  std::istringstream is(s);
  is >> rng;
  if (!is) throw std::invalid_argument("bad RNG state");
  return rng;
}

nlohmann::json counts_json(const ple::GeneratedCounts& g) {
  std::map<std::string, std::size_t> sorted;
  for (const auto& [b, n] : g) sorted[b.key()] = n;
  return sorted;
}

ple::GeneratedCounts counts_from_json(const nlohmann::json& j) {
  ple::GeneratedCounts g;
  for (const auto& [k, v] : j.items()) g[BinIndex::parse(k)] = v.get<std::size_t>();
  return g;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::kUser: return "user";
    case Mode::kDeveloper: return "developer";
    case Mode::kStudy: return "study";
  }
  return "user";
}

Mode mode_from_string(std::string_view s) {
  for (auto m : {Mode::kUser, Mode::kDeveloper, Mode::kStudy}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown mode: " + std::string(s));
}

void SessionConfig::validate() const {
  container.validate();
  rules.validate();
  emitter.validate();
  if (n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  if (initial_population == 0) throw std::invalid_argument("initial_population must be positive");
  if (fi2pop.offspring == 0) throw std::invalid_argument("offspring must be positive");
  if (study_iterations <= 0) throw std::invalid_argument("study_iterations must be positive");
  if (smoothing_passes < 0) throw std::invalid_argument("smoothing_passes must be non-negative");
  for (const auto& name : study_order) ple::EmitterConfig::preset(name);
  for (const auto& d : domain.densities.terms) d.validate();
}

nlohmann::json SessionConfig::to_json() const {
  return {{"container", container.to_json()},
          {"rules", rules.to_json()},
          {"domain", domain.to_json()},
          {"emitter", emitter.to_json()},
          {"fi2pop", fi2pop_json(fi2pop)},
          {"n_steps", n_steps},
          {"initial_population", initial_population},
          {"mode", std::string(to_string(mode))},
          {"seed", seed},
          {"study_order", study_order},
          {"study_iterations", study_iterations},
          {"smoothing_passes", smoothing_passes}};
}

SessionConfig SessionConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("session config must be an object");
  SessionConfig c;
  if (j.contains("container")) c.container = qd::ContainerConfig::from_json(j.at("container"));
  if (j.contains("rules")) c.rules = evo::RuleSet::from_json(j.at("rules"));
  if (j.contains("domain")) c.domain = voxel::DomainConfig::from_json(j.at("domain"));
  if (j.contains("emitter")) {
    const auto& e = j.at("emitter");
    c.emitter = e.is_string() ? ple::EmitterConfig::preset(e.get<std::string>()) : ple::EmitterConfig::from_json(e);
  }
  if (j.contains("fi2pop")) c.fi2pop = fi2pop_from_json(j.at("fi2pop"));
  c.n_steps = j.value("n_steps", c.n_steps);
  c.initial_population = j.value("initial_population", c.initial_population);
  if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  c.seed = j.value("seed", c.seed);
  if (j.contains("study_order")) c.study_order = j.at("study_order").get<std::vector<std::string>>();
  c.study_iterations = j.value("study_iterations", c.study_iterations);
  c.smoothing_passes = j.value("smoothing_passes", c.smoothing_passes);
  c.validate();
  return c;
}

nlohmann::json MetricsRecord::to_json() const {
  return {{"iteration", iteration},
          {"action", action},
          {"selected_bin", selected_bin},
          {"emitter_kind", emitter_kind},
          {"n_steps", n_steps},
          {"fi2pop_updates", fi2pop_updates},
          {"solutions_generated", solutions_generated},
          {"solutions_inserted", solutions_inserted},
          {"mean_complexity", mean_complexity},
          {"occupied_bin_count", occupied_bin_count},
          {"coverage", coverage},
          {"emitter_step_seconds", emitter_step_seconds},
          {"step_seconds", step_seconds},
          {"inspections", inspections}};
}

MetricsRecord MetricsRecord::from_json(const nlohmann::json& j) {
  MetricsRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.action = j.at("action").get<std::string>();
  r.selected_bin = j.at("selected_bin").get<std::string>();
  r.emitter_kind = j.at("emitter_kind").get<std::string>();
  r.n_steps = j.at("n_steps").get<int>();
  r.fi2pop_updates = j.at("fi2pop_updates").get<int>();
  r.solutions_generated = j.at("solutions_generated").get<std::size_t>();
  r.solutions_inserted = j.at("solutions_inserted").get<std::size_t>();
  r.mean_complexity = j.at("mean_complexity").get<double>();
  r.occupied_bin_count = j.at("occupied_bin_count").get<std::size_t>();
  r.coverage = j.at("coverage").get<double>();
  r.emitter_step_seconds = j.at("emitter_step_seconds").get<double>();
  r.step_seconds = j.at("step_seconds").get<double>();
  r.inspections = j.at("inspections").get<std::size_t>();
  return r;
}

std::string metrics_csv_header() {
  return "iteration,action,selected_bin,emitter_kind,n_steps,fi2pop_updates,solutions_generated,"
         "solutions_inserted,mean_complexity,occupied_bin_count,coverage,emitter_step_seconds,step_seconds,"
         "inspections";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::ostringstream os;
  os << r.iteration << ',' << r.action << ',' << r.selected_bin << ',' << r.emitter_kind << ',' << r.n_steps << ','
     << r.fi2pop_updates << ',' << r.solutions_generated << ',' << r.solutions_inserted << ','
     << format_double(r.mean_complexity) << ',' << r.occupied_bin_count << ',' << format_double(r.coverage) << ','
     << format_double(r.emitter_step_seconds) << ',' << format_double(r.step_seconds) << ',' << r.inspections;
  return os.str();
}

nlohmann::json StepReport::to_json() const {
  nlohmann::json emitted_keys = nlohmann::json::array();
  for (const auto& b : emitted) emitted_keys.push_back(b.key());
  nlohmann::json new_keys = nlohmann::json::array();
  for (const auto& b : new_bins) new_keys.push_back(b.key());
  return {{"iteration", iteration}, {"action", action},      {"selected", selected.key()},
          {"emitted", emitted_keys}, {"new_bins", new_keys}, {"metrics", metrics.to_json()}};
}

nlohmann::json StudyPhase::to_json() const {
  nlohmann::json its = nlohmann::json::array();
  for (const auto& m : iterations) its.push_back(m.to_json());
  return {{"emitter", emitter},
          {"n_steps", n_steps},
          {"iterations", its},
          {"favourite", favourite ? nlohmann::json(favourite->key()) : nlohmann::json()},
          {"favourite_solution", favourite_solution ? nlohmann::json(*favourite_solution) : nlohmann::json()},
          {"favourite_fitness", favourite_fitness}};
}

nlohmann::json StudyReport::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : phases) ps.push_back(p.to_json());
  return {{"phases", ps}, {"complete", complete}};
}

Session::Session(SessionConfig config)
    : config_(std::move(config)),
      domain_(config_.domain),
      container_(config_.container),
      emitter_(config_.emitter, config_.rules.max_length),
      rng_(config_.seed) {
  config_.validate();
  if (config_.mode == Mode::kStudy) {
    start_study(config_.study_order, config_.study_iterations);
  } else {
    seed_population();
  }
}

Solution Session::stamp(Solution s) {
  s.id = next_id_++;
  return s;
}

void Session::seed_population() {
  container_ = qd::Container(config_.container);
  container_.set_iteration(iteration_);
  const std::size_t target = config_.initial_population;
  std::size_t placed = 0;
  for (std::size_t attempt = 0; placed < target && attempt < target * 10; ++attempt) {
    Solution s = domain_.evaluate(evo::expand(config_.rules, rng_));
    if (!finite_bc(s)) continue;
    s.lineage.generation = -1;
    container_.add(stamp(std::move(s)));
    ++placed;
  }
  if (container_.occupied_count() == 0) throw std::runtime_error("rules produced no placeable genotype");
}

void Session::require_occupied(const BinIndex& bin) const {
  const qd::Bin* b = container_.find(bin);
  if (!b || !b->occupied()) throw std::invalid_argument("bin " + bin.key() + " is not occupied");
}

void Session::check_action(bool random_or_reset) const {
  if (config_.mode != Mode::kStudy) return;
  if (random_or_reset) throw ActionRejected("study mode only allows evolving from a selected bin");
  if (!study_active_ || study_.complete) throw ActionRejected("the study is complete");
  if (awaiting_favourite()) throw ActionRejected("choose a favourite before continuing");
}

Session::UpdateOutcome Session::evolve_from(const BinIndex& bin) {
  const qd::Bin& b = container_.at(bin);
  const std::vector<Solution> feasible = b.feasible;
  const std::vector<Solution> infeasible = b.infeasible;
  const evo::Evaluator evaluate = [this](const evo::Genotype& g) { return domain_.evaluate(g); };
  std::vector<Solution> offspring =
      evo::fi2pop_step(feasible, infeasible, bin, iteration_, config_.rules, config_.fi2pop, evaluate, rng_);
  ++total_updates_;
  UpdateOutcome out;
  for (Solution& s : offspring) {
    ++out.generated;
    out.total_length += s.genotype.size();
    if (!finite_bc(s)) continue;
    container_.add(stamp(std::move(s)));
    ++out.inserted;
  }
  generated_now_[bin] += out.generated;
  total_attempts_ += out.generated;
  return out;
}

StepReport Session::run_step(const BinIndex& first, std::string action, bool human) {
  const auto t0 = Clock::now();
  const std::vector<BinIndex> before = container_.occupied_bins();
  const std::set<BinIndex> before_set(before.begin(), before.end());

  if (human && !emitter_.is_null()) {
    const auto credits = ple::assign_credit(container_.at(first), iteration_ - 1, generated_prev_);
    emitter_.update(container_, first, credits, iteration_);
  }

  StepReport report;
  report.iteration = iteration_;
  report.action = action;
  report.selected = first;
  UpdateOutcome total = evolve_from(first);
  int updates = 1;

  double emitter_seconds = 0.0;
  const int emitter_steps = emitter_.is_null() ? 0 : config_.n_steps;
  for (int k = 0; k < emitter_steps; ++k) {
    const auto e0 = Clock::now();
    const BinIndex target = emitter_.emit(container_, rng_);
    const UpdateOutcome o = evolve_from(target);
    emitter_seconds += seconds_since(e0);
    report.emitted.push_back(target);
    total.generated += o.generated;
    total.inserted += o.inserted;
    total.total_length += o.total_length;
    ++updates;
  }

  for (const BinIndex& b : container_.occupied_bins()) {
    if (!before_set.contains(b)) report.new_bins.push_back(b);
  }

  MetricsRecord& m = report.metrics;
  m.iteration = iteration_;
  m.action = std::move(action);
  m.selected_bin = first.key();
  m.emitter_kind = emitter_.config().name;
  m.n_steps = emitter_steps;
  m.fi2pop_updates = updates;
  m.solutions_generated = total.generated;
  m.solutions_inserted = total.inserted;
  m.mean_complexity =
      total.generated == 0 ? 0.0 : static_cast<double>(total.total_length) / static_cast<double>(total.generated);
  m.occupied_bin_count = container_.occupied_count();
  m.coverage = container_.coverage();
  m.emitter_step_seconds = emitter_steps == 0 ? 0.0 : emitter_seconds / emitter_steps;
  m.inspections = inspections_;
  m.step_seconds = seconds_since(t0);
  inspections_ = 0;
  metrics_.push_back(m);

  generated_prev_ = std::move(generated_now_);
  generated_now_.clear();
  ++iteration_;
  container_.set_iteration(iteration_);
  return report;
}

StepReport Session::user_step(const BinIndex& bin) {
  check_action(false);
  require_occupied(bin);
  StepReport r = run_step(bin, "selected", true);
  if (study_active_ && phase_ < study_.phases.size()) study_.phases[phase_].iterations.push_back(r.metrics);
  return r;
}

StepReport Session::random_step() {
  check_action(true);
  const std::vector<BinIndex> occupied = container_.occupied_bins();
  if (occupied.empty()) throw std::invalid_argument("no occupied bins");
  const BinIndex bin = ple::sample_uniform(occupied, rng_);
  return run_step(bin, "random", false);
}

void Session::reinitialise() {
  check_action(true);
  seed_population();
  emitter_.reset();
  generated_now_.clear();
  generated_prev_.clear();
  resets_.push_back(iteration_);
}

qd::ContainerConfig Session::container_config_for(const voxel::DomainConfig& domain) const {
  qd::ContainerConfig c = config_.container;
  const auto [x0, x1] = voxel::descriptor_range(domain.bc.x);
  const auto [y0, y1] = voxel::descriptor_range(domain.bc.y);
  c.bounds = {{x0, y0}, {x1, y1}};
  return c;
}

void Session::rebuild_domain(const voxel::DomainConfig& domain, const qd::ContainerConfig& cc) {
  voxel::ShipDomain fresh_domain(domain);
  qd::Container fresh(cc);
  fresh.set_iteration(iteration_);
  for (const auto& [index, bin] : container_.bins()) {
    for (const auto* pop : {&bin.feasible, &bin.infeasible}) {
      for (const Solution& old : *pop) {
        Solution s = fresh_domain.evaluate(old.genotype);
        if (!finite_bc(s)) continue;
        s.id = old.id;
        s.lineage = old.lineage;
        fresh.add(std::move(s));
      }
    }
  }
  domain_ = std::move(fresh_domain);
  container_ = std::move(fresh);
}

void Session::apply_config_patch(const nlohmann::json& patch) {
  if (config_.mode != Mode::kDeveloper) throw ActionRejected("configuration changes need developer mode");
  if (!patch.is_object()) throw std::invalid_argument("patch must be an object");
  static const std::set<std::string> allowed{"emitter", "n_steps",   "safe_mode", "fitness_weights", "bc",
                                             "rules",   "modules",   "offspring", "smoothing_passes"};
  for (const auto& [key, value] : patch.items()) {
    if (!allowed.contains(key)) throw std::invalid_argument("unknown config key: " + key);
  }

  SessionConfig next = config_;
  bool domain_changed = false;
  bool bc_changed = false;
  if (patch.contains("emitter")) {
    const auto& e = patch.at("emitter");
    next.emitter = e.is_string() ? ple::EmitterConfig::preset(e.get<std::string>()) : ple::EmitterConfig::from_json(e);
  }
  if (patch.contains("n_steps")) next.n_steps = patch.at("n_steps").get<int>();
  if (patch.contains("offspring")) next.fi2pop.offspring = patch.at("offspring").get<std::size_t>();
  if (patch.contains("smoothing_passes")) next.smoothing_passes = patch.at("smoothing_passes").get<int>();
  if (patch.contains("safe_mode")) {
    next.domain.safe_mode = patch.at("safe_mode").get<bool>();
    domain_changed = true;
  }
  if (patch.contains("fitness_weights")) {
    const auto w = patch.at("fitness_weights").get<std::vector<double>>();
    if (w.size() != 4) throw std::invalid_argument("fitness_weights needs four values");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!(w[k] >= 0.0)) throw std::invalid_argument("fitness weights must be non-negative");
      next.domain.densities.weights[k] = w[k];
    }
    domain_changed = true;
  }
  if (patch.contains("bc")) {
    const auto names = patch.at("bc").get<std::vector<std::string>>();
    if (names.size() != 2) throw std::invalid_argument("bc needs two descriptor names");
    next.domain.bc.x = voxel::descriptor_from_name(names[0]);
    next.domain.bc.y = voxel::descriptor_from_name(names[1]);
    if (next.domain.bc.x == next.domain.bc.y) throw std::invalid_argument("bc descriptors must differ");
    domain_changed = bc_changed = true;
  }
  if (patch.contains("rules")) next.rules = evo::RuleSet::from_json(patch.at("rules"));
  if (patch.contains("modules")) {
    for (const auto& [symbol, flag] : patch.at("modules").items()) {
      if (symbol.size() != 1 || !next.rules.rules.contains(symbol[0])) {
        throw std::invalid_argument("unknown module: " + symbol);
      }
      next.rules.rules.at(symbol[0]).is_mutable = flag.get<bool>();
    }
  }
  next.validate();
  if (bc_changed) next.container = container_config_for(next.domain);
  next.container.validate();

  // Commit.
  const bool emitter_changed = patch.contains("emitter");
  if (domain_changed) rebuild_domain(next.domain, next.container);
  config_ = std::move(next);
  if (emitter_changed) emitter_ = ple::Emitter(config_.emitter, config_.rules.max_length);
}

void Session::start_study(std::vector<std::string> order, int iterations_per_emitter) {
  if (config_.mode != Mode::kStudy) throw ActionRejected("studies need study mode");
  if (order.empty()) throw std::invalid_argument("study order is empty");
  if (iterations_per_emitter <= 0) throw std::invalid_argument("iterations per emitter must be positive");
  for (const auto& name : order) ple::EmitterConfig::preset(name);
  study_order_ = std::move(order);
  study_iterations_ = iterations_per_emitter;
  study_ = {};
  phase_ = 0;
  study_active_ = true;
  begin_phase();
}

void Session::begin_phase() {
  config_.emitter = ple::EmitterConfig::preset(study_order_[phase_]);
  emitter_ = ple::Emitter(config_.emitter, config_.rules.max_length);
  seed_population();
  generated_now_.clear();
  generated_prev_.clear();
  if (!metrics_.empty() || iteration_ > 0) resets_.push_back(iteration_);
  StudyPhase p;
  p.emitter = study_order_[phase_];
  p.n_steps = config_.n_steps;
  study_.phases.push_back(std::move(p));
}

bool Session::awaiting_favourite() const {
  return study_active_ && !study_.complete && phase_ < study_.phases.size() &&
         static_cast<int>(study_.phases[phase_].iterations.size()) >= study_iterations_;
}

void Session::choose_favourite(const BinIndex& bin) {
  if (!awaiting_favourite()) throw ActionRejected("no favourite is due");
  require_occupied(bin);
  const Solution* s = container_.at(bin).representative();
  StudyPhase& p = study_.phases[phase_];
  p.favourite = bin;
  p.favourite_solution = s->id;
  p.favourite_fitness = s->fitness;
  ++phase_;
  if (phase_ >= study_order_.size()) {
    study_.complete = true;
    return;
  }
  begin_phase();
}

nlohmann::json Session::save() const {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : metrics_) metrics.push_back(m.to_json());
  return {{"schema_version", 1},
          {"config", config_.to_json()},
          {"container", container_.to_json()},
          {"emitter", emitter_.state_json()},
          {"iteration", iteration_},
          {"next_id", next_id_},
          {"fi2pop_updates", total_updates_},
          {"insert_attempts", total_attempts_},
          {"inspections", inspections_},
          {"generated_now", counts_json(generated_now_)},
          {"generated_prev", counts_json(generated_prev_)},
          {"rng", rng_state(rng_)},
          {"metrics", metrics},
          {"resets", resets_},
          {"study",
           {{"report", study_.to_json()},
            {"order", study_order_},
            {"iterations", study_iterations_},
            {"phase", phase_},
            {"active", study_active_}}}};
}

Session Session::load(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != 1) throw std::invalid_argument("unsupported session schema version");
  SessionConfig cfg = SessionConfig::from_json(j.at("config"));
  // Construct without seeding a study so the stored state is used as is.
  const Mode mode = cfg.mode;
  cfg.mode = Mode::kUser;
  cfg.initial_population = 1;
  Session s(cfg);
  s.config_ = SessionConfig::from_json(j.at("config"));
  s.config_.mode = mode;
  s.domain_ = voxel::ShipDomain(s.config_.domain);
  s.container_ = qd::Container::from_json(j.at("container"));
  s.emitter_ = ple::Emitter(s.config_.emitter, s.config_.rules.max_length);
  s.emitter_.load_state(j.at("emitter"));
  s.iteration_ = j.at("iteration").get<int>();
  s.next_id_ = j.at("next_id").get<std::uint64_t>();
  s.total_updates_ = j.at("fi2pop_updates").get<std::uint64_t>();
  s.total_attempts_ = j.at("insert_attempts").get<std::uint64_t>();
  s.inspections_ = j.at("inspections").get<std::size_t>();
  s.generated_now_ = counts_from_json(j.at("generated_now"));
  s.generated_prev_ = counts_from_json(j.at("generated_prev"));
  s.rng_ = rng_from_state(j.at("rng").get<std::string>());
  s.metrics_.clear();
  for (const auto& m : j.at("metrics")) s.metrics_.push_back(MetricsRecord::from_json(m));
  s.resets_ = j.at("resets").get<std::vector<int>>();
  const auto& st = j.at("study");
  s.study_order_ = st.at("order").get<std::vector<std::string>>();
  s.study_iterations_ = st.at("iterations").get<int>();
  s.phase_ = st.at("phase").get<std::size_t>();
  s.study_active_ = st.at("active").get<bool>();
  s.study_ = {};
  const auto& rep = st.at("report");
  s.study_.complete = rep.at("complete").get<bool>();
  for (const auto& p : rep.at("phases")) {
    StudyPhase phase;
    phase.emitter = p.at("emitter").get<std::string>();
    phase.n_steps = p.at("n_steps").get<int>();
    for (const auto& m : p.at("iterations")) phase.iterations.push_back(MetricsRecord::from_json(m));
    if (!p.at("favourite").is_null()) phase.favourite = BinIndex::parse(p.at("favourite").get<std::string>());
    if (!p.at("favourite_solution").is_null()) phase.favourite_solution = p.at("favourite_solution").get<std::uint64_t>();
    phase.favourite_fitness = p.at("favourite_fitness").get<double>();
    s.study_.phases.push_back(std::move(phase));
  }
  return s;
}

StudyReport study_session(Session& s, const std::vector<std::string>& order, int iterations_per_emitter,
                          const BinChooser& select, const BinChooser& favourite) {
  s.start_study(order, iterations_per_emitter);
  while (!s.study().complete) {
    while (!s.awaiting_favourite()) s.user_step(select(s));
    s.choose_favourite(favourite(s));
  }
  return s.study();
}

Snapshot Session::snapshot() const {
  Snapshot s{container_, config_, iteration_, emitter_.config().name, metrics_, resets_, study_,
             awaiting_favourite(), phase_, total_updates_, total_attempts_};
  s.config.emitter = emitter_.config();
  return s;
}

nlohmann::json grid_json(const Snapshot& s) {
  const qd::Container& c = s.container;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& [index, bin] : c.bins()) {
    nlohmann::json entry{{"bin", index.key()},
                         {"i", index.i},
                         {"j", index.j},
                         {"depth", index.depth},
                         {"bounds", {bin.bounds.lo.x, bin.bounds.lo.y, bin.bounds.hi.x, bin.bounds.hi.y}},
                         {"occupied", bin.occupied()},
                         {"feasible", bin.feasible.size()},
                         {"infeasible", bin.infeasible.size()},
                         {"age", s.iteration - bin.creation_iteration}};
    if (const Solution* e = bin.elite()) {
      double mean = 0.0;
      for (const auto& m : bin.feasible) mean += m.fitness;
      entry["elite_fitness"] = e->fitness;
      entry["elite_id"] = e->id;
      entry["mean_fitness"] = mean / static_cast<double>(bin.feasible.size());
    } else {
      entry["elite_fitness"] = nullptr;
      entry["elite_id"] = nullptr;
      entry["mean_fitness"] = nullptr;
    }
    if (!bin.infeasible.empty()) {
      entry["least_violation"] = bin.infeasible.front().violation;
    } else {
      entry["least_violation"] = nullptr;
    }
    bins.push_back(std::move(entry));
  }
  const auto& cfg = c.config();
  nlohmann::json study;
  if (s.config.mode == Mode::kStudy) {
    study = {{"phase", s.study_phase},
             {"phases", s.study.phases.size()},
             {"iterations_in_phase", s.study.phases.empty() ? 0 : s.study.phases.back().iterations.size()},
             {"iterations_per_phase", s.config.study_iterations},
             {"awaiting_favourite", s.awaiting_favourite},
             {"complete", s.study.complete}};
  }
  return {{"schema_version", 1},
          {"iteration", s.iteration},
          {"mode", std::string(to_string(s.config.mode))},
          {"emitter", s.emitter_name},
          {"n_steps", s.config.n_steps},
          {"study", study},
          {"bounds", {cfg.bounds.lo.x, cfg.bounds.lo.y, cfg.bounds.hi.x, cfg.bounds.hi.y}},
          {"bc", {voxel::descriptor_name(s.config.domain.bc.x), voxel::descriptor_name(s.config.domain.bc.y)}},
          {"base_resolution", {cfg.base_rows, cfg.base_cols}},
          {"occupied_count", c.occupied_count()},
          {"coverage", c.coverage()},
          {"bins", bins}};
}

namespace {

const Solution& representative_of(const Snapshot& s, const BinIndex& bin) {
  const qd::Bin* b = s.container.find(bin);
  if (!b || !b->occupied()) throw std::out_of_range("bin " + bin.key() + " is not occupied");
  return *b->representative();
}

}  // namespace

nlohmann::json solution_json(const Snapshot& s, const BinIndex& bin, bool interior) {
  const Solution& sol = representative_of(s, bin);
  const voxel::Phenotype raw = voxel::build_phenotype(sol.genotype);
  const voxel::Phenotype shown = interior ? raw : voxel::build_hull(raw, s.config.smoothing_passes);
  std::map<std::string, std::size_t> counts;
  for (const auto& [c, block] : raw.blocks) ++counts[std::string(voxel::to_string(block.type))];
  nlohmann::json descriptors;
  for (std::size_t k = 0; k < 4; ++k) {
    const double v = sol.descriptors[k];
    descriptors[std::string(voxel::descriptor_name(static_cast<Descriptor>(k)))] =
        std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
  }
  return {{"schema_version", 1},
          {"bin", bin.key()},
          {"interior", interior},
          {"solution", sol.to_json()},
          {"blocks", shown.blocks_json()},
          {"properties",
           {{"descriptors", descriptors},
            {"fitness", sol.fitness},
            {"feasible", sol.feasible},
            {"violation", sol.violation},
            {"reasons", sol.reasons},
            {"genotype_length", sol.genotype.size()},
            {"block_count", raw.size()},
            {"block_counts", counts},
            {"axes", sol.axes}}}};
}

nlohmann::json export_json(const Snapshot& s, const BinIndex& bin) {
  const Solution& sol = representative_of(s, bin);
  return voxel::export_blueprint(sol, s.config.domain, s.config.smoothing_passes);
}

nlohmann::json metrics_json(const Snapshot& s) {
  nlohmann::json rows = nlohmann::json::array();
  std::size_t generated = 0;
  for (const auto& m : s.metrics) {
    rows.push_back(m.to_json());
    generated += m.solutions_generated;
  }
  return {{"schema_version", 1},
          {"rows", rows},
          {"resets", s.resets},
          {"totals",
           {{"steps", s.metrics.size()},
            {"solutions_generated", generated},
            {"insert_attempts", s.insert_attempts},
            {"fi2pop_updates", s.fi2pop_updates}}}};
}

std::string metrics_csv(const Snapshot& s) {
  std::string out = metrics_csv_header() + "\n";
  for (const auto& m : s.metrics) out += metrics_csv_row(m) + "\n";
  return out;
}

}  // namespace icme::session

#include "icme/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace icme::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double distance(const BcPoint& a, const BcPoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string fmt(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

nlohmann::json point_json(const BcPoint& p) { return {p.x, p.y}; }
BcPoint point_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

BcPoint PreferenceProfile::target_at(int iteration) const {
  if (drift && iteration >= drift->switch_iteration) return drift->target;
  return target;
}

void PreferenceProfile::validate(const Rect& bounds) const {
  auto inside = [&](const BcPoint& p) {
    return p.x >= bounds.lo.x && p.x <= bounds.hi.x && p.y >= bounds.lo.y && p.y <= bounds.hi.y;
  };
  if (!inside(target)) throw std::invalid_argument("profile target lies outside the BC rectangle");
  if (drift && !inside(drift->target)) throw std::invalid_argument("drift target lies outside the BC rectangle");
  if (!(tolerance > 0.0)) throw std::invalid_argument("profile tolerance must be positive");
}

nlohmann::json PreferenceProfile::to_json() const {
  nlohmann::json j{{"target", point_json(target)}, {"tolerance", tolerance}};
  if (drift) j["drift"] = {{"target", point_json(drift->target)}, {"switch_iteration", drift->switch_iteration}};
  return j;
}

PreferenceProfile PreferenceProfile::from_json(const nlohmann::json& j) {
  PreferenceProfile p;
  if (j.contains("target")) p.target = point_from_json(j.at("target"));
  p.tolerance = j.value("tolerance", p.tolerance);
  if (j.contains("drift") && !j.at("drift").is_null()) {
    const auto& d = j.at("drift");
    p.drift = Drift{point_from_json(d.at("target")), d.at("switch_iteration").get<int>()};
  }
  return p;
}

Rect bin_rect(const qd::ContainerConfig& config, const BinIndex& b) {
  const double scale = static_cast<double>(1 << b.depth);
  const double w = config.bounds.width() / (config.base_rows * scale);
  const double h = config.bounds.height() / (config.base_cols * scale);
  const BcPoint lo{config.bounds.lo.x + b.i * w, config.bounds.lo.y + b.j * h};
  return {lo, {lo.x + w, lo.y + h}};
}

BcPoint bin_centre(const qd::ContainerConfig& config, const BinIndex& b) { return bin_rect(config, b).centre(); }

BinIndex simulate_user(const PreferenceProfile& profile, const qd::Container& container, int iteration) {
  const std::vector<BinIndex> occupied = container.occupied_bins();
  if (occupied.empty()) throw std::invalid_argument("no occupied bins to choose from");
  const BcPoint target = profile.target_at(iteration);
  BinIndex best = occupied.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (const BinIndex& b : occupied) {
    const double d = distance(container.at(b).bounds.centre(), target);
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  return best;
}

double alignment(const std::vector<Emission>& emitted, const PreferenceProfile& profile) {
  if (emitted.empty()) return kNaN;
  std::size_t hits = 0;
  for (const auto& e : emitted) {
    if (distance(e.centre, profile.target_at(e.iteration)) <= profile.tolerance) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(emitted.size());
}

double serendipity(const std::vector<Emission>& emitted, const std::vector<Selection>& selections) {
  if (emitted.empty()) return kNaN;
  std::size_t fresh = 0;
  for (const auto& e : emitted) {
    const bool seen = std::any_of(selections.begin(), selections.end(), [&](const Selection& s) {
      return s.iteration <= e.iteration && (s.bin.covers(e.bin) || e.bin.covers(s.bin));
    });
    if (!seen) ++fresh;
  }
  return static_cast<double>(fresh) / static_cast<double>(emitted.size());
}

nlohmann::json ArmConfig::to_json() const { return {{"name", name}, {"emitter", emitter.to_json()}, {"n_steps", n_steps}}; }

ArmConfig ArmConfig::from_json(const nlohmann::json& j) {
  ArmConfig a;
  const auto& e = j.at("emitter");
  a.emitter = e.is_string() ? ple::EmitterConfig::preset(e.get<std::string>()) : ple::EmitterConfig::from_json(e);
  a.name = j.value("name", a.emitter.name);
  a.n_steps = j.value("n_steps", a.n_steps);
  if (a.n_steps < 0) throw std::invalid_argument("n_steps must be non-negative");
  return a;
}

BenchmarkSettings BenchmarkSettings::from_json(const nlohmann::json& j) {
  BenchmarkSettings s;
  if (j.contains("session")) s.session = session::SessionConfig::from_json(j.at("session"));
  if (j.contains("profile")) s.profile = PreferenceProfile::from_json(j.at("profile"));
  s.runs = j.value("runs", s.runs);
  s.iterations = j.value("iterations", s.iterations);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  for (const auto& a : j.at("configs")) {
    if (a.value("enabled", true)) s.arms.push_back(ArmConfig::from_json(a));
  }
  if (s.runs <= 0 || s.iterations <= 0) throw std::invalid_argument("runs and iterations must be positive");
  s.profile.validate(s.session.container.bounds);
  return s;
}

Summary summarise(const std::vector<double>& values) {
  Summary s;
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sum += v;
    ++s.n;
  }
  if (s.n == 0) return {kNaN, kNaN, 0};
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
  }
  s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

std::vector<double> ArmReport::column(double RunResult::*field) const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.*field);
  return out;
}

namespace {

struct Metric {
  const char* name;
  double RunResult::*field;
};

constexpr Metric kMetrics[] = {
    {"alignment", &RunResult::alignment},
    {"serendipity", &RunResult::serendipity},
    {"final_alignment", &RunResult::final_alignment},
    {"final_serendipity", &RunResult::final_serendipity},
    {"chance_alignment", &RunResult::chance_alignment},
    {"coverage", &RunResult::coverage},
    {"mean_emitter_step_seconds", &RunResult::mean_emitter_step_seconds},
};

}  // namespace

nlohmann::json ArmReport::summary_json() const {
  nlohmann::json j{{"name", name}, {"runs", runs.size()}};
  for (const auto& m : kMetrics) {
    const Summary s = summarise(column(m.field));
    j[m.name] = {{"mean", std::isfinite(s.mean) ? nlohmann::json(s.mean) : nlohmann::json()},
                 {"std", std::isfinite(s.stddev) ? nlohmann::json(s.stddev) : nlohmann::json()},
                 {"n", s.n}};
  }
  std::vector<double> generated;
  for (const auto& r : runs) generated.push_back(static_cast<double>(r.solutions_generated));
  const Summary g = summarise(generated);
  j["solutions_generated"] = {{"mean", g.mean}, {"std", g.stddev}, {"n", g.n}};
  return j;
}

const ArmReport& BenchmarkReport::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.name == name) return a;
  }
  throw std::out_of_range("no benchmark arm named " + name);
}

std::string BenchmarkReport::runs_csv() const {
  std::ostringstream os;
  os << "config,run,seed,alignment,serendipity,final_alignment,final_serendipity,chance_alignment,coverage,"
        "mean_emitter_step_seconds,solutions_generated,emissions\n";
  for (const auto& a : arms) {
    for (const auto& r : a.runs) {
      os << r.arm << ',' << r.run << ',' << r.seed << ',' << fmt(r.alignment) << ',' << fmt(r.serendipity) << ','
         << fmt(r.final_alignment) << ',' << fmt(r.final_serendipity) << ',' << fmt(r.chance_alignment) << ','
         << fmt(r.coverage) << ',' << fmt(r.mean_emitter_step_seconds) << ',' << r.solutions_generated << ','
         << r.emissions << '\n';
    }
  }
  return os.str();
}

std::string BenchmarkReport::summary_csv() const {
  std::ostringstream os;
  os << "config,metric,mean,std,n\n";
  for (const auto& a : arms) {
    for (const auto& m : kMetrics) {
      const Summary s = summarise(a.column(m.field));
      os << a.name << ',' << m.name << ',' << fmt(s.mean) << ',' << fmt(s.stddev) << ',' << s.n << '\n';
    }
  }
  return os.str();
}

nlohmann::json BenchmarkReport::summary_json() const {
  nlohmann::json arms_json = nlohmann::json::array();
  for (const auto& a : arms) arms_json.push_back(a.summary_json());
  return {{"note", "alignment and serendipity are simulated-user proxies"}, {"configs", arms_json}};
}

std::uint64_t run_seed(std::uint64_t master, std::size_t arm, int run) {
  return splitmix(splitmix(master ^ (0x51ED2701ULL * (arm + 1))) + static_cast<std::uint64_t>(run));
}

RunResult simulate_run(const ArmConfig& arm, const BenchmarkSettings& settings, int run, std::uint64_t seed) {
  session::SessionConfig cfg = settings.session;
  cfg.emitter = arm.emitter;
  cfg.n_steps = arm.n_steps;
  cfg.mode = session::Mode::kUser;
  cfg.seed = seed;
  session::Session s(cfg);

  std::vector<Emission> emitted;
  std::vector<Selection> selections;
  double chance = 0.0;
  double emitter_seconds = 0.0;
  std::size_t emitter_steps = 0;
  std::size_t generated = 0;
  for (int t = 0; t < settings.iterations; ++t) {
    const BinIndex pick = simulate_user(settings.profile, s.container(), t);
    selections.push_back({pick, t});
    const session::StepReport report = s.user_step(pick);
    for (const BinIndex& b : report.emitted) emitted.push_back({b, bin_centre(s.container().config(), b), t});
    // Chance level uses the archive as it stands at the end of the step.
    if (!report.emitted.empty()) {
      const BcPoint target = settings.profile.target_at(t);
      const auto occupied = s.container().occupied_bins();
      std::size_t near = 0;
      for (const auto& b : occupied) {
        if (distance(s.container().at(b).bounds.centre(), target) <= settings.profile.tolerance) ++near;
      }
      chance += static_cast<double>(report.emitted.size()) * static_cast<double>(near) /
                static_cast<double>(occupied.size());
    }
    emitter_seconds += report.metrics.emitter_step_seconds * static_cast<double>(report.metrics.n_steps);
    emitter_steps += static_cast<std::size_t>(report.metrics.n_steps);
    generated += report.metrics.solutions_generated;
  }

  std::vector<Emission> final_emits;
  for (const auto& e : emitted) {
    if (e.iteration == settings.iterations - 1) final_emits.push_back(e);
  }

  RunResult r;
  r.arm = arm.name;
  r.run = run;
  r.seed = seed;
  r.alignment = alignment(emitted, settings.profile);
  r.serendipity = serendipity(emitted, selections);
  r.final_alignment = alignment(final_emits, settings.profile);
  r.final_serendipity = serendipity(final_emits, selections);
  r.chance_alignment = emitted.empty() ? kNaN : chance / static_cast<double>(emitted.size());
  r.coverage = s.container().coverage();
  r.mean_emitter_step_seconds = emitter_steps == 0 ? kNaN : emitter_seconds / static_cast<double>(emitter_steps);
  r.solutions_generated = generated;
  r.emissions = emitted.size();
  return r;
}

BenchmarkReport run_benchmark(const BenchmarkSettings& settings) {
  BenchmarkReport report;
  struct Job {
    std::size_t arm;
    int run;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < settings.arms.size(); ++a) {
    report.arms.push_back({settings.arms[a].name, std::vector<RunResult>(static_cast<std::size_t>(settings.runs))});
    for (int r = 0; r < settings.runs; ++r) jobs.push_back({a, r});
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const Job& job = jobs[k];
      try {
        report.arms[job.arm].runs[static_cast<std::size_t>(job.run)] =
            simulate_run(settings.arms[job.arm], settings, job.run, run_seed(settings.seed, job.arm, job.run));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = settings.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : settings.threads;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

double welch_greater(const std::vector<double>& a, const std::vector<double>& b) {
  const Summary sa = summarise(a);
  const Summary sb = summarise(b);
  if (sa.n < 2 || sb.n < 2) throw std::invalid_argument("Welch test needs at least two finite values per sample");
  const double va = sa.stddev * sa.stddev / static_cast<double>(sa.n);
  const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.n);
  const double diff = sa.mean - sb.mean;
  if (va + vb == 0.0) return diff > 0.0 ? 0.0 : 1.0;
  const double t = diff / std::sqrt(va + vb);
  const double df = (va + vb) * (va + vb) /
                    (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  const boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace icme::sim

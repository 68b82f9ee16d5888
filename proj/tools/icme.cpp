// icme: benchmark runner and HTTP server.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "icme/service.hpp"
#include "icme/sim.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

icme::service::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive constrained MAP-Elites with preference-learning emitters"};
  app.require_subcommand(1);

  auto* bench = app.add_subcommand("bench", "Run the simulated-user benchmark over a configuration file");
  std::string configs;
  std::optional<int> runs;
  int iters = 10;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out = "report.csv";
  bench->add_option("--configs", configs, "Benchmark configuration (JSON)")->required()->check(CLI::ExistingFile);
  bench->add_option("--runs", runs, "Seeded runs per configuration (overrides the file)");
  bench->add_option("--iters", iters, "Iterations per run")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "Master seed (overrides the file)");
  bench->add_option("--threads", threads, "Worker threads (0 = all cores)");
  bench->add_option("--out", out, "Per-run CSV; <stem>_summary.csv and <stem>_summary.json are written alongside");

  auto* serve = app.add_subcommand("serve", "Serve sessions over HTTP (ICME_BIND / ICME_HOST / ICME_PORT apply)");
  std::string service_config;
  std::optional<std::string> host;
  std::optional<int> port;
  serve->add_option("--config", service_config, "Service configuration (JSON)")->check(CLI::ExistingFile);
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Bind port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      auto settings = icme::sim::BenchmarkSettings::from_json(read_json(configs));
      if (runs) settings.runs = *runs;
      if (seed) settings.seed = *seed;
      if (threads) settings.threads = *threads;
      settings.iterations = iters;
      if (settings.runs <= 0) throw std::invalid_argument("--runs must be positive");
      std::cerr << "running " << settings.arms.size() << " configurations x " << settings.runs << " runs x "
                << settings.iterations << " iterations\n";
      const auto report = icme::sim::run_benchmark(settings);
      const std::filesystem::path out_path(out);
      const auto stem = out_path.parent_path() / out_path.stem();
      write_file(out_path, report.runs_csv());
      write_file(stem.string() + "_summary.csv", report.summary_csv());
      write_file(stem.string() + "_summary.json", report.summary_json().dump(2) + "\n");
      std::cout << report.summary_csv();
      return 0;
    }
    if (*serve) {
      icme::service::ServiceConfig cfg;
      if (!service_config.empty()) cfg = icme::service::ServiceConfig::from_json(read_json(service_config));
      cfg.apply_environment();
      if (host) cfg.host = *host;
      if (port) cfg.port = *port;
      icme::service::Service service(cfg);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
      if (!service.listen()) {
        std::cerr << "failed to bind " << cfg.host << ":" << cfg.port << "\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Python extension: sessions and the benchmark harness. Structured values
// cross the boundary as JSON text; the icme package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "icme/session.hpp"
#include "icme/sim.hpp"

namespace py = pybind11;
using nlohmann::json;
using icme::BinIndex;
using icme::session::Session;
using icme::session::SessionConfig;

namespace {

json parse_or_empty(const std::string& text) { return text.empty() ? json::object() : json::parse(text); }

}  // namespace

PYBIND11_MODULE(_icme, m) {
  m.doc() = "Interactive constrained MAP-Elites with preference-learning emitters";

  py::register_exception<icme::session::ActionRejected>(m, "ActionRejected", PyExc_PermissionError);

  py::class_<Session>(m, "Session")
      .def(py::init([](const std::string& config) { return Session(SessionConfig::from_json(parse_or_empty(config))); }),
           py::arg("config") = "")
      .def_static("load", [](const std::string& state) { return Session::load(json::parse(state)); })
      .def("save", [](const Session& s) { return s.save().dump(); })
      .def_property_readonly("iteration", &Session::iteration)
      .def_property_readonly("fi2pop_updates", &Session::fi2pop_updates)
      .def("config", [](const Session& s) { return s.config().to_json().dump(); })
      .def("occupied_bins",
           [](const Session& s) {
             std::vector<std::string> out;
             for (const auto& b : s.container().occupied_bins()) out.push_back(b.key());
             return out;
           })
      .def("user_step", [](Session& s, const std::string& bin) { return s.user_step(BinIndex::parse(bin)).to_json().dump(); })
      .def("random_step", [](Session& s) { return s.random_step().to_json().dump(); })
      .def("reinitialise", &Session::reinitialise)
      .def("apply_config_patch", [](Session& s, const std::string& patch) { s.apply_config_patch(json::parse(patch)); })
      .def("choose_favourite", [](Session& s, const std::string& bin) { s.choose_favourite(BinIndex::parse(bin)); })
      .def("study", [](const Session& s) { return s.study().to_json().dump(); })
      .def("grid", [](const Session& s) { return icme::session::grid_json(s.snapshot()).dump(); })
      .def(
          "solution",
          [](Session& s, const std::string& bin, bool interior) {
            auto out = icme::session::solution_json(s.snapshot(), BinIndex::parse(bin), interior).dump();
            s.note_inspection();
            return out;
          },
          py::arg("bin"), py::arg("interior") = false)
      .def("export", [](const Session& s, const std::string& bin) {
        return icme::session::export_json(s.snapshot(), BinIndex::parse(bin)).dump();
      })
      .def("metrics", [](const Session& s) { return icme::session::metrics_json(s.snapshot()).dump(); })
      .def("metrics_csv", [](const Session& s) { return icme::session::metrics_csv(s.snapshot()); });

  m.def(
      "run_benchmark",
      [](const std::string& settings) {
        const auto parsed = icme::sim::BenchmarkSettings::from_json(json::parse(settings));
        icme::sim::BenchmarkReport report;
        {
          py::gil_scoped_release release;
          report = icme::sim::run_benchmark(parsed);
        }
        return py::make_tuple(report.summary_json().dump(), report.runs_csv());
      },
      py::arg("settings"));
  m.def("welch_greater", &icme::sim::welch_greater, py::arg("a"), py::arg("b"));
}

#include "icme/solution.hpp"

#include <cmath>
#include <limits>

namespace icme {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

nlohmann::json Solution::to_json() const {
  nlohmann::json desc = nlohmann::json::array();
  for (double d : descriptors) desc.push_back(number(d));
  nlohmann::json ax = nlohmann::json::array();
  for (double a : axes) ax.push_back(number(a));
  nlohmann::json lineage_json = {{"generation", lineage.generation}, {"parents", lineage.parents}};
  if (lineage.source_bin) lineage_json["source_bin"] = lineage.source_bin->key();
  return {{"id", id},
          {"genotype", genotype.to_json()},
          {"descriptors", desc},
          {"axes", ax},
          {"bc", {number(bc.x), number(bc.y)}},
          {"fitness", number(fitness)},
          {"violation", violation},
          {"feasible", feasible},
          {"reasons", reasons},
          {"lineage", lineage_json}};
}

Solution Solution::from_json(const nlohmann::json& j) {
  Solution s;
  s.id = j.at("id").get<std::uint64_t>();
  s.genotype = evo::Genotype::from_json(j.at("genotype"));
  for (std::size_t k = 0; k < s.descriptors.size(); ++k) s.descriptors[k] = number_or_nan(j.at("descriptors").at(k));
  for (std::size_t k = 0; k < s.axes.size(); ++k) s.axes[k] = number_or_nan(j.at("axes").at(k));
  s.bc = {number_or_nan(j.at("bc").at(0)), number_or_nan(j.at("bc").at(1))};
  s.fitness = number_or_nan(j.at("fitness"));
  s.violation = j.at("violation").get<double>();
  s.feasible = j.at("feasible").get<bool>();
  s.reasons = j.value("reasons", std::vector<std::string>{});
  const auto& l = j.at("lineage");
  s.lineage.generation = l.value("generation", -1);
  s.lineage.parents = l.value("parents", std::vector<std::uint64_t>{});
  if (l.contains("source_bin")) s.lineage.source_bin = BinIndex::parse(l.at("source_bin").get<std::string>());
  return s;
}

}  // namespace icme

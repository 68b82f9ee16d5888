#include "icme/ple/history.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace icme::ple {

void SelectionHistory::record(SelectionRecord r) {
  if (std::find(r.occupied.begin(), r.occupied.end(), r.selected) == r.occupied.end()) {
    throw std::invalid_argument("selected bin " + r.selected.key() + " is not occupied");
  }
  if (r.features.rows() != 0 && r.features.rows() != static_cast<Eigen::Index>(r.occupied.size())) {
    throw std::invalid_argument("feature rows do not match the occupied set");
  }
  if (window_ && *window_ == 0) return;
  records_.push_back(std::move(r));
  while (window_ && records_.size() > *window_) records_.pop_front();
}

std::size_t SelectionHistory::effective_window() const {
  return window_ ? std::min(*window_, records_.size()) : records_.size();
}

void record_selection(SelectionHistory& h, const BinIndex& selected, std::vector<BinIndex> occupied,
                      std::vector<Credit> credits, Eigen::MatrixXd features, int iteration) {
  SelectionRecord r;
  r.iteration = iteration;
  r.selected = selected;
  r.occupied = std::move(occupied);
  r.credits = std::move(credits);
  r.features = std::move(features);
  h.record(std::move(r));
}

std::vector<Credit> assign_credit(const qd::Bin& selected, int previous_generation, const GeneratedCounts& generated) {
  std::map<BinIndex, double> shares;
  auto visit = [&](const Solution& s) {
    if (s.lineage.generation != previous_generation || !s.lineage.source_bin) return;
    const BinIndex& source = *s.lineage.source_bin;
    if (source.covers(selected.index) || selected.index.covers(source)) return;
    const auto it = generated.find(source);
    if (it == generated.end() || it->second == 0) return;
    shares[source] += 1.0 / static_cast<double>(it->second);
  };
  for (const auto& s : selected.feasible) visit(s);
  for (const auto& s : selected.infeasible) visit(s);
  std::vector<Credit> out;
  out.reserve(shares.size());
  for (const auto& [source, share] : shares) out.push_back({source, share});
  return out;
}

double PreferenceLogits::at(const BinIndex& b) const {
  const auto it = std::find(bins.begin(), bins.end(), b);
  if (it == bins.end()) throw std::out_of_range("no logit for bin " + b.key());
  return values[static_cast<std::size_t>(it - bins.begin())];
}

PreferenceLogits uniform_logits(const std::vector<BinIndex>& occupied) {
  PreferenceLogits l;
  l.bins = occupied;
  l.values.assign(occupied.size(), occupied.empty() ? 0.0 : 1.0 / static_cast<double>(occupied.size()));
  return l;
}

PreferenceLogits project_onto(const std::unordered_map<BinIndex, double, BinIndexHash>& keyed,
                              const std::vector<BinIndex>& occupied) {
  PreferenceLogits l;
  l.bins = occupied;
  l.values.reserve(occupied.size());
  for (BinIndex b : occupied) {
    double v = 0.0;
    for (;;) {
      if (auto it = keyed.find(b); it != keyed.end()) v += it->second;
      if (b.depth == 0) break;
      b = b.parent();
    }
    l.values.push_back(v);
  }
  return l;
}

}  // namespace icme::ple

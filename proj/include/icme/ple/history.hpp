#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "icme/container.hpp"
#include "icme/types.hpp"

namespace icme::ple {

/// Backward credit for a source bin whose offspring (from the previous
/// iteration) sit inside the bin the user just selected.
struct Credit {
  BinIndex source;
  double share = 0.0;
};

/// One human selection Y^t together with the occupied set it was made from.
struct SelectionRecord {
  int iteration = 0;
  BinIndex selected;
  /// Z_o at selection time, in container order.
  std::vector<BinIndex> occupied;
  /// Feature rows aligned with `occupied` (zero columns when unused).
  Eigen::MatrixXd features;
  std::vector<Credit> credits;
};

/// Sliding window over the last k selections; an empty window means k = inf.
class SelectionHistory {
 public:
  explicit SelectionHistory(std::optional<std::size_t> window = std::nullopt) : window_(window) {}

  /// Throws std::invalid_argument when the selected bin is not in the
  /// record's occupied set.
  void record(SelectionRecord r);
  void clear() { records_.clear(); }

  const std::deque<SelectionRecord>& records() const { return records_; }
  std::optional<std::size_t> window() const { return window_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  /// min(k, number of records).
  std::size_t effective_window() const;

 private:
  std::optional<std::size_t> window_;
  std::deque<SelectionRecord> records_;
};

void record_selection(SelectionHistory& h, const BinIndex& selected, std::vector<BinIndex> occupied,
                      std::vector<Credit> credits = {}, Eigen::MatrixXd features = {}, int iteration = 0);

using GeneratedCounts = std::unordered_map<BinIndex, std::size_t, BinIndexHash>;

/// Credits for every different source bin that produced, during
/// `previous_generation`, a member of `selected`. Each such member adds
/// 1 / n_s to its source, with n_s taken from `generated` (offspring bred
/// by that source in that iteration). Sources covering the selected bin
/// count as the same bin.
std::vector<Credit> assign_credit(const qd::Bin& selected, int previous_generation, const GeneratedCounts& generated);

/// Scores over the current occupied bins, aligned with `bins`.
struct PreferenceLogits {
  std::vector<BinIndex> bins;
  std::vector<double> values;

  double at(const BinIndex& b) const;
  std::size_t size() const { return bins.size(); }
};

PreferenceLogits uniform_logits(const std::vector<BinIndex>& occupied);

/// Sum of keyed values over each occupied bin and its stored ancestors, so
/// selections made before a bin was subdivided carry over to its quadrants.
PreferenceLogits project_onto(const std::unordered_map<BinIndex, double, BinIndexHash>& keyed,
                              const std::vector<BinIndex>& occupied);

}  // namespace icme::ple

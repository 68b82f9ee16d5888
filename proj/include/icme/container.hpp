#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "icme/solution.hpp"
#include "icme/types.hpp"

namespace icme::qd {

struct ContainerConfig {
  Rect bounds{{1.0, 1.0}, {5.0, 10.0}};
  int base_rows = 10;
  int base_cols = 10;
  std::size_t subdivision_threshold = 5;
  int max_depth = 4;
  /// Per-population cap inside one bin.
  std::size_t capacity = 5;

  void validate() const;
  nlohmann::json to_json() const;
  static ContainerConfig from_json(const nlohmann::json& j);
};

struct Bin {
  BinIndex index;
  Rect bounds;
  /// Sorted by descending fitness; ties keep insertion order.
  std::vector<Solution> feasible;
  /// Sorted by ascending violation; ties keep insertion order.
  std::vector<Solution> infeasible;
  int creation_iteration = 0;

  std::size_t size() const { return feasible.size() + infeasible.size(); }
  bool occupied() const { return size() > 0; }
  const Solution* elite() const { return feasible.empty() ? nullptr : &feasible.front(); }
  /// Elite when present, else the least-violating infeasible member.
  const Solution* representative() const;
};

/// Adaptive MAP-Elites grid over a fixed behaviour rectangle.
///
/// Depth-0 cells are refined into quadrants once they hold
/// `subdivision_threshold` members, down to `max_depth`. The leaf bins tile
/// the rectangle at all times.
class Container {
 public:
  explicit Container(ContainerConfig config = {});

  const ContainerConfig& config() const { return config_; }

  /// Stores a solution in the leaf covering its (clamped) BC and returns
  /// that leaf. Throws std::domain_error for non-finite BCs.
  BinIndex insert(Solution solution);

  /// Quadrant refinement of an over-full leaf. Returns the new leaves, or
  /// an empty list when the bin stays as it is.
  std::vector<BinIndex> maybe_subdivide(const BinIndex& index);

  struct AddResult {
    BinIndex bin;
    std::vector<BinIndex> new_bins;
  };
  /// insert() followed by maybe_subdivide() on the receiving bin.
  AddResult add(Solution solution);

  std::vector<BinIndex> occupied_bins() const;
  const std::map<BinIndex, Bin>& bins() const { return bins_; }
  const Bin* find(const BinIndex& index) const;
  const Bin& at(const BinIndex& index) const;
  BinIndex locate(BcPoint point) const;
  BcPoint clamp(BcPoint point) const;

  std::size_t occupied_count() const;
  std::size_t solution_count() const;
  /// |Z_o| / |Z| over current leaves.
  double coverage() const;

  int iteration() const { return iteration_; }
  void set_iteration(int iteration) { iteration_ = iteration; }

  nlohmann::json to_json() const;
  static Container from_json(const nlohmann::json& j);

  static constexpr int kSchemaVersion = 1;

 private:
  Rect base_cell_bounds(int row, int col) const;
  void place(Bin& bin, Solution solution) const;

  ContainerConfig config_;
  std::map<BinIndex, Bin> bins_;
  int iteration_ = 0;
};

/// Quadrant `q` of a rectangle, using the same midpoint arithmetic as the
/// container's refinement (q >> 1 selects the upper x half, q & 1 the y half).
Rect quadrant_bounds(const Rect& r, int q);

}  // namespace icme::qd

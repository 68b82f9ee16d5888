#include "icme/container.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace icme::qd {

namespace {

double lerp_edge(double lo, double hi, int k, int n) {
  if (k >= n) return hi;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
}

}  // namespace

Rect quadrant_bounds(const Rect& r, int q) {
  const BcPoint mid = r.centre();
  Rect out = r;
  if (q >> 1) {
    out.lo.x = mid.x;
  } else {
    out.hi.x = mid.x;
  }
  if (q & 1) {
    out.lo.y = mid.y;
  } else {
    out.hi.y = mid.y;
  }
  return out;
}

void ContainerConfig::validate() const {
  if (!(bounds.hi.x > bounds.lo.x) || !(bounds.hi.y > bounds.lo.y)) {
    throw std::invalid_argument("container bounds must have positive extent");
  }
  if (base_rows <= 0 || base_cols <= 0) throw std::invalid_argument("base resolution must be positive");
  if (subdivision_threshold == 0) throw std::invalid_argument("subdivision threshold must be positive");
  if (max_depth < 0 || max_depth > 4) throw std::invalid_argument("max_depth must be in [0, 4]");
  if (capacity == 0) throw std::invalid_argument("bin capacity must be positive");
}

nlohmann::json ContainerConfig::to_json() const {
  return {{"bounds", {bounds.lo.x, bounds.lo.y, bounds.hi.x, bounds.hi.y}},
          {"base_resolution", {base_rows, base_cols}},
          {"subdivision_threshold", subdivision_threshold},
          {"max_depth", max_depth},
          {"capacity", capacity}};
}

ContainerConfig ContainerConfig::from_json(const nlohmann::json& j) {
  ContainerConfig c;
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    c.bounds = {{b.at(0).get<double>(), b.at(1).get<double>()}, {b.at(2).get<double>(), b.at(3).get<double>()}};
  }
  if (j.contains("base_resolution")) {
    c.base_rows = j.at("base_resolution").at(0).get<int>();
    c.base_cols = j.at("base_resolution").at(1).get<int>();
  }
  c.subdivision_threshold = j.value("subdivision_threshold", c.subdivision_threshold);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.capacity = j.value("capacity", c.capacity);
  c.validate();
  return c;
}

const Solution* Bin::representative() const {
  if (!feasible.empty()) return &feasible.front();
  if (!infeasible.empty()) return &infeasible.front();
  return nullptr;
}

Container::Container(ContainerConfig config) : config_(config) {
  config_.validate();
  for (int r = 0; r < config_.base_rows; ++r) {
    for (int c = 0; c < config_.base_cols; ++c) {
      Bin bin;
      bin.index = {r, c, 0};
      bin.bounds = base_cell_bounds(r, c);
      bins_.emplace(bin.index, std::move(bin));
    }
  }
}

Rect Container::base_cell_bounds(int row, int col) const {
  const auto& b = config_.bounds;
  return {{lerp_edge(b.lo.x, b.hi.x, row, config_.base_rows), lerp_edge(b.lo.y, b.hi.y, col, config_.base_cols)},
          {lerp_edge(b.lo.x, b.hi.x, row + 1, config_.base_rows),
           lerp_edge(b.lo.y, b.hi.y, col + 1, config_.base_cols)}};
}

BcPoint Container::clamp(BcPoint p) const {
  const auto& b = config_.bounds;
  p.x = std::clamp(p.x, b.lo.x, std::nextafter(b.hi.x, b.lo.x));
  p.y = std::clamp(p.y, b.lo.y, std::nextafter(b.hi.y, b.lo.y));
  return p;
}

BinIndex Container::locate(BcPoint point) const {
  if (!std::isfinite(point.x) || !std::isfinite(point.y)) {
    throw std::domain_error("non-finite behaviour descriptor");
  }
  const BcPoint p = clamp(point);
  const auto& b = config_.bounds;
  int row = static_cast<int>((p.x - b.lo.x) / (b.hi.x - b.lo.x) * config_.base_rows);
  int col = static_cast<int>((p.y - b.lo.y) / (b.hi.y - b.lo.y) * config_.base_cols);
  row = std::clamp(row, 0, config_.base_rows - 1);
  col = std::clamp(col, 0, config_.base_cols - 1);
  while (row > 0 && p.x < base_cell_bounds(row, col).lo.x) --row;
  while (row + 1 < config_.base_rows && p.x >= base_cell_bounds(row, col).hi.x) ++row;
  while (col > 0 && p.y < base_cell_bounds(row, col).lo.y) --col;
  while (col + 1 < config_.base_cols && p.y >= base_cell_bounds(row, col).hi.y) ++col;

  BinIndex index{row, col, 0};
  Rect r = base_cell_bounds(row, col);
  for (int d = 0; d <= config_.max_depth; ++d) {
    if (bins_.contains(index)) return index;
    const BcPoint mid = r.centre();
    const int q = (p.x >= mid.x ? 2 : 0) + (p.y >= mid.y ? 1 : 0);
    index = index.child(q);
    r = quadrant_bounds(r, q);
  }
  throw std::logic_error("container tiling broken: no leaf covers point");
}

void Container::place(Bin& bin, Solution solution) const {
  if (solution.feasible) {
    auto pos = std::find_if(bin.feasible.begin(), bin.feasible.end(),
                            [&](const Solution& s) { return s.fitness < solution.fitness; });
    bin.feasible.insert(pos, std::move(solution));
    if (bin.feasible.size() > config_.capacity) bin.feasible.resize(config_.capacity);
  } else {
    auto pos = std::find_if(bin.infeasible.begin(), bin.infeasible.end(),
                            [&](const Solution& s) { return s.violation > solution.violation; });
    bin.infeasible.insert(pos, std::move(solution));
    if (bin.infeasible.size() > config_.capacity) bin.infeasible.resize(config_.capacity);
  }
}

BinIndex Container::insert(Solution solution) {
  if (!std::isfinite(solution.bc.x) || !std::isfinite(solution.bc.y)) {
    throw std::domain_error("non-finite behaviour descriptor");
  }
  if (solution.feasible && !std::isfinite(solution.fitness)) {
    throw std::domain_error("non-finite fitness");
  }
  const BinIndex index = locate(solution.bc);
  place(bins_.at(index), std::move(solution));
  return index;
}

std::vector<BinIndex> Container::maybe_subdivide(const BinIndex& index) {
  std::vector<BinIndex> created;
  auto it = bins_.find(index);
  if (it == bins_.end()) return created;
  if (it->second.size() < config_.subdivision_threshold || index.depth >= config_.max_depth) return created;

  Bin parent = std::move(it->second);
  bins_.erase(it);
  Bin children[4];
  for (int q = 0; q < 4; ++q) {
    children[q].index = parent.index.child(q);
    children[q].bounds = quadrant_bounds(parent.bounds, q);
    children[q].creation_iteration = iteration_;
  }
  const BcPoint mid = parent.bounds.centre();
  auto quadrant_of = [&](const Solution& s) {
    const BcPoint p = clamp(s.bc);
    return (p.x >= mid.x ? 2 : 0) + (p.y >= mid.y ? 1 : 0);
  };
  // Members arrive in rank order, so appending keeps each quadrant sorted.
  for (auto& s : parent.feasible) children[quadrant_of(s)].feasible.push_back(std::move(s));
  for (auto& s : parent.infeasible) children[quadrant_of(s)].infeasible.push_back(std::move(s));
  for (auto& child : children) {
    if (child.feasible.size() > config_.capacity) child.feasible.resize(config_.capacity);
    if (child.infeasible.size() > config_.capacity) child.infeasible.resize(config_.capacity);
    const BinIndex child_index = child.index;
    bins_.emplace(child_index, std::move(child));
    auto deeper = maybe_subdivide(child_index);
    if (deeper.empty()) {
      created.push_back(child_index);
    } else {
      created.insert(created.end(), deeper.begin(), deeper.end());
    }
  }
  std::sort(created.begin(), created.end());
  return created;
}

Container::AddResult Container::add(Solution solution) {
  AddResult result;
  result.bin = insert(std::move(solution));
  result.new_bins = maybe_subdivide(result.bin);
  return result;
}

std::vector<BinIndex> Container::occupied_bins() const {
  std::vector<BinIndex> out;
  for (const auto& [index, bin] : bins_) {
    if (bin.occupied()) out.push_back(index);
  }
  return out;
}

const Bin* Container::find(const BinIndex& index) const {
  auto it = bins_.find(index);
  return it == bins_.end() ? nullptr : &it->second;
}

const Bin& Container::at(const BinIndex& index) const {
  if (const Bin* bin = find(index)) return *bin;
  throw std::out_of_range("no such bin: " + index.key());
}

std::size_t Container::occupied_count() const {
  return static_cast<std::size_t>(
      std::count_if(bins_.begin(), bins_.end(), [](const auto& kv) { return kv.second.occupied(); }));
}

std::size_t Container::solution_count() const {
  std::size_t n = 0;
  for (const auto& [index, bin] : bins_) n += bin.size();
  return n;
}

double Container::coverage() const {
  return bins_.empty() ? 0.0 : static_cast<double>(occupied_count()) / static_cast<double>(bins_.size());
}

nlohmann::json Container::to_json() const {
  nlohmann::json bins = nlohmann::json::array();
  nlohmann::json solutions = nlohmann::json::array();
  for (const auto& [index, bin] : bins_) {
    nlohmann::json feasible = nlohmann::json::array();
    nlohmann::json infeasible = nlohmann::json::array();
    for (const auto& s : bin.feasible) {
      feasible.push_back(s.id);
      solutions.push_back(s.to_json());
    }
    for (const auto& s : bin.infeasible) {
      infeasible.push_back(s.id);
      solutions.push_back(s.to_json());
    }
    bins.push_back({{"bin", index.key()},
                    {"created", bin.creation_iteration},
                    {"feasible", feasible},
                    {"infeasible", infeasible}});
  }
  return {{"schema_version", kSchemaVersion},
          {"config", config_.to_json()},
          {"iteration", iteration_},
          {"bins", bins},
          {"solutions", solutions}};
}

Container Container::from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw std::invalid_argument("unsupported container schema version");
  }
  Container c(ContainerConfig::from_json(j.at("config")));
  c.iteration_ = j.value("iteration", 0);
  std::unordered_map<std::uint64_t, Solution> by_id;
  for (const auto& s : j.at("solutions")) {
    Solution sol = Solution::from_json(s);
    by_id.emplace(sol.id, std::move(sol));
  }
  std::map<BinIndex, Bin> bins;
  for (const auto& entry : j.at("bins")) {
    Bin bin;
    bin.index = BinIndex::parse(entry.at("bin").get<std::string>());
    if (bin.index.depth > c.config_.max_depth) throw std::invalid_argument("bin deeper than max_depth");
    const BinIndex base = bin.index.base();
    if (base.i >= c.config_.base_rows || base.j >= c.config_.base_cols) {
      throw std::invalid_argument("bin outside the base grid");
    }
    Rect r = c.base_cell_bounds(base.i, base.j);
    for (int level = 1; level <= bin.index.depth; ++level) {
      const int shift = bin.index.depth - level;
      r = quadrant_bounds(r, ((bin.index.i >> shift) & 1) * 2 + ((bin.index.j >> shift) & 1));
    }
    bin.bounds = r;
    bin.creation_iteration = entry.value("created", 0);
    for (const auto& id : entry.at("feasible")) bin.feasible.push_back(by_id.at(id.get<std::uint64_t>()));
    for (const auto& id : entry.at("infeasible")) bin.infeasible.push_back(by_id.at(id.get<std::uint64_t>()));
    bins.emplace(bin.index, std::move(bin));
  }
  // Leaves must tile the grid exactly: the area of every base cell is covered.
  std::map<BinIndex, double> coverage;
  for (const auto& [index, bin] : bins) coverage[index.base()] += std::ldexp(1.0, -2 * index.depth);
  if (coverage.size() != static_cast<std::size_t>(c.config_.base_rows * c.config_.base_cols)) {
    throw std::invalid_argument("container document does not tile the grid");
  }
  for (const auto& [base, area] : coverage) {
    if (area != 1.0) throw std::invalid_argument("container document does not tile the grid");
  }
  for (auto a = bins.begin(); a != bins.end(); ++a) {
    auto b = std::next(a);
    if (b != bins.end() && a->first.covers(b->first)) {
      throw std::invalid_argument("container document has overlapping bins");
    }
  }
  c.bins_ = std::move(bins);
  return c;
}

}  // namespace icme::qd

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace icme {

/// Point in the two-dimensional behaviour space.
struct BcPoint {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const BcPoint&) const = default;
};

/// Half-open rectangle [lo, hi) in behaviour space.
struct Rect {
  BcPoint lo;
  BcPoint hi;

  bool contains(const BcPoint& p) const {
    return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y;
  }
  BcPoint centre() const { return {(lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0}; }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }

  bool operator==(const Rect&) const = default;
};

/// Address of a bin in the adaptive grid.
///
/// (i, j) are cell coordinates at resolution base * 2^depth, so the depth-0
/// ancestor of a bin is (i >> depth, j >> depth). Ordering is row-major over
/// depth-0 cells and depth-first (quadrant order) inside a subdivided cell.
struct BinIndex {
  int i = 0;
  int j = 0;
  int depth = 0;

  bool operator==(const BinIndex&) const = default;
  std::strong_ordering operator<=>(const BinIndex& other) const;

  BinIndex base() const { return {i >> depth, j >> depth, 0}; }
  BinIndex parent() const { return {i >> 1, j >> 1, depth - 1}; }
  BinIndex child(int quadrant) const {
    return {i * 2 + (quadrant >> 1), j * 2 + (quadrant & 1), depth + 1};
  }

  /// True when `other` equals this bin or lies inside it.
  bool covers(const BinIndex& other) const;

  /// "i-j-d" textual key used in JSON documents and URLs.
  std::string key() const;
  static BinIndex parse(std::string_view key);
};

struct BinIndexHash {
  std::size_t operator()(const BinIndex& b) const noexcept {
    auto h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(b.i));
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(b.j);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(b.depth);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

}  // namespace icme

#include "icme/types.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace icme {

namespace {

int quadrant_at(const BinIndex& b, int level) {
  const int shift = b.depth - level;
  return ((b.i >> shift) & 1) * 2 + ((b.j >> shift) & 1);
}

}  // namespace

std::strong_ordering BinIndex::operator<=>(const BinIndex& other) const {
  const BinIndex a = base();
  const BinIndex b = other.base();
  if (auto c = a.i <=> b.i; c != 0) return c;
  if (auto c = a.j <=> b.j; c != 0) return c;
  const int common = std::min(depth, other.depth);
  for (int level = 1; level <= common; ++level) {
    if (auto c = quadrant_at(*this, level) <=> quadrant_at(other, level); c != 0) return c;
  }
  return depth <=> other.depth;
}

bool BinIndex::covers(const BinIndex& other) const {
  if (other.depth < depth) return false;
  const int shift = other.depth - depth;
  return (other.i >> shift) == i && (other.j >> shift) == j;
}

std::string BinIndex::key() const {
  return std::to_string(i) + "-" + std::to_string(j) + "-" + std::to_string(depth);
}

BinIndex BinIndex::parse(std::string_view key) {
  BinIndex out;
  int* fields[3] = {&out.i, &out.j, &out.depth};
  const char* p = key.data();
  const char* end = key.data() + key.size();
  for (int f = 0; f < 3; ++f) {
    auto [next, ec] = std::from_chars(p, end, *fields[f]);
    if (ec != std::errc{}) throw std::invalid_argument("malformed bin key: " + std::string(key));
    p = next;
    if (f < 2) {
      if (p == end || *p != '-') throw std::invalid_argument("malformed bin key: " + std::string(key));
      ++p;
    }
  }
  if (p != end || out.i < 0 || out.j < 0 || out.depth < 0) {
    throw std::invalid_argument("malformed bin key: " + std::string(key));
  }
  return out;
}

}  // namespace icme

#pragma once

#include <algorithm>
#include <vector>

#include "fairslice/rational.hpp"

namespace fairslice {

struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// A finite union of intervals; kept sorted and merged by normalize().
using Piece = std::vector<Interval>;

inline Piece normalize(Piece piece) {
  std::erase_if(piece, [](const Interval& iv) { return iv.hi <= iv.lo; });
  std::sort(piece.begin(), piece.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  Piece merged;
  for (auto& iv : piece) {
    if (!merged.empty() && iv.lo <= merged.back().hi) {
      if (iv.hi > merged.back().hi) merged.back().hi = iv.hi;
    } else {
      merged.push_back(std::move(iv));
    }
  }
  return merged;
}

inline Rational total_length(const Piece& piece) {
  Rational sum;
  for (const auto& iv : piece) sum += iv.length();
  return sum;
}

inline Rational overlap_length(const Piece& a, const Piece& b) {
  Rational sum;
  for (const auto& x : a)
    for (const auto& y : b) {
      const Rational& lo = std::max(x.lo, y.lo);
      const Rational& hi = std::min(x.hi, y.hi);
      if (hi > lo) sum += hi - lo;
    }
  return sum;
}

}  // namespace fairslice

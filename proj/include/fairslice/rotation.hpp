#pragma once

#include <span>
#include <vector>

#include "fairslice/interval.hpp"
#include "fairslice/rational.hpp"

namespace fairslice {

struct RotatedCell {
  std::vector<Piece> pieces;  // per agent, at most two intervals each
  Piece leftover;             // the part of the cell no fraction covers
};

/// Stacks the agents' shares of `cell` clockwise starting at `start`,
/// wrapping around the right end back to the left end. With `start` uniform
/// on the cell, each agent's expected value equals share * value(cell) for
/// any integrable density.
inline RotatedCell cmsd_rotation(const Interval& cell, std::span<const Rational> fractions, const Rational& start) {
  const Rational width = cell.length();
  RotatedCell out;
  out.pieces.resize(fractions.size());

  auto emit = [&](Piece& into, const Rational& from, const Rational& to) {
    // offsets relative to cell.lo; `to` may exceed width by at most one wrap
    if (to <= width) {
      if (to > from) into.push_back({cell.lo + from, cell.lo + to});
    } else {
      if (width > from) into.push_back({cell.lo + from, cell.hi});
      if (to - width > 0) into.push_back({cell.lo, cell.lo + (to - width)});
    }
  };

  const Rational origin = start - cell.lo;
  Rational cursor = origin;
  Rational used;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] == 0) continue;
    Rational len = fractions[i] * width;
    emit(out.pieces[i], cursor, cursor + len);
    cursor += len;
    if (cursor >= width) cursor -= width;
    used += len;
  }
  if (used < width) {
    Rational end = cursor + (width - used);
    emit(out.leftover, cursor, end);
  }
  for (auto& p : out.pieces) p = normalize(std::move(p));
  out.leftover = normalize(std::move(out.leftover));
  return out;
}

}  // namespace fairslice

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fairslice/model.hpp"
#include "fairslice/rational.hpp"

namespace testing {

using fairslice::Interval;
using fairslice::Piece;
using fairslice::Rational;

inline Rational R(const char* text) { return fairslice::parse_rational(text); }

inline Piece piece(std::initializer_list<std::pair<const char*, const char*>> ivs) {
  Piece out;
  for (auto [lo, hi] : ivs) out.push_back({R(lo), R(hi)});
  return out;
}

inline std::vector<Rational> rationals(std::initializer_list<const char*> items) {
  std::vector<Rational> out;
  for (auto* s : items) out.push_back(R(s));
  return out;
}

// Random piecewise constant profile: up to `max_blocks` segments per agent on
// a 1/grid lattice, values from {0..ladder}; `pw_uniform` restricts each agent to {0, k_i}.
inline fairslice::Profile random_profile(fairslice::Rng& rng, std::size_t n, int max_blocks, int ladder, bool pw_uniform,
                                         int grid = 24, bool random_claims = false) {
  std::vector<fairslice::AgentSpec> agents;
  for (std::size_t i = 0; i < n; ++i) {
    for (;;) {
      int blocks = static_cast<int>(rng.between(1, max_blocks));
      std::vector<int> marks;
      for (int k = 1; k < grid; ++k) marks.push_back(k);
      rng.shuffle(marks);
      marks.resize(static_cast<std::size_t>(std::min(blocks - 1, grid - 1)));
      std::sort(marks.begin(), marks.end());
      std::vector<Rational> bps{Rational(0)};
      for (int m : marks) bps.push_back(fairslice::make_rational(m, grid));
      bps.push_back(Rational(1));
      const int level = static_cast<int>(rng.between(1, ladder));
      std::vector<Rational> vals;
      bool any = false;
      for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
        int v = pw_uniform ? (rng.below(2) ? level : 0) : static_cast<int>(rng.between(0, ladder));
        any = any || v > 0;
        vals.push_back(Rational(v));
      }
      if (!any) continue;
      Rational claim(1);
      if (random_claims) claim = fairslice::make_rational(rng.between(1, 4), rng.between(1, 3));
      agents.push_back({"a" + std::to_string(i + 1), fairslice::PiecewiseDensity(bps, vals), claim});
      break;
    }
  }
  return fairslice::Profile(std::move(agents));
}

// Every pair of pieces (agents and waste) is interior-disjoint and together they tile [0,1].
inline bool tiles_unit_interval(const fairslice::Allocation& alloc) {
  std::vector<Interval> all;
  for (const auto& p : alloc.pieces) all.insert(all.end(), p.begin(), p.end());
  all.insert(all.end(), alloc.waste.begin(), alloc.waste.end());
  std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  Rational cursor(0);
  for (const auto& iv : all) {
    if (iv.lo != cursor || !(iv.hi > iv.lo)) return false;
    cursor = iv.hi;
  }
  return cursor == 1;
}

inline Rational overlap(const Piece& a, const Piece& b) {
  Rational sum;
  for (const auto& x : a)
    for (const auto& y : b) {
      Rational lo = std::max(x.lo, y.lo), hi = std::min(x.hi, y.hi);
      if (hi > lo) sum += hi - lo;
    }
  return sum;
}

}  // namespace testing

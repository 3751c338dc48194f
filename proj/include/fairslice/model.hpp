#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/interval.hpp"
#include "fairslice/rational.hpp"
#include "fairslice/rng.hpp"
#include "fairslice/rotation.hpp"

namespace fairslice {

/// Piecewise constant value density on [0,1]. Segment k is (d_k, d_{k+1}];
/// single points carry no value so the closed/open convention only matters
/// for lookups, which resolve a point to the segment on its left.
class PiecewiseDensity {
 public:
  PiecewiseDensity(std::vector<Rational> breakpoints, std::vector<Rational> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.size() < 2 || values_.size() + 1 != breakpoints_.size())
      throw Error(ErrorCode::MalformedDocument, "density needs one value per segment and at least two breakpoints");
    if (breakpoints_.front() != 0 || breakpoints_.back() != 1)
      throw Error(ErrorCode::NonIncreasingBreakpoints, "breakpoints must start at 0 and end at 1");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
      if (!(breakpoints_[k - 1] < breakpoints_[k]))
        throw Error(ErrorCode::NonIncreasingBreakpoints, "breakpoints must be strictly increasing");
    bool any_positive = false;
    for (const auto& v : values_) {
      if (v < 0) throw Error(ErrorCode::NegativeValue, "density values must be nonnegative");
      any_positive = any_positive || v > 0;
    }
    if (!any_positive) throw Error(ErrorCode::AllZeroDensity, "density is identically zero");
  }

  static PiecewiseDensity uniform() { return PiecewiseDensity({Rational(0), Rational(1)}, {Rational(1)}); }

  // Density `level` on `support` (sorted, disjoint, inside [0,1]) and zero elsewhere.
  static PiecewiseDensity indicator(const Piece& support, const Rational& level = Rational(1)) {
    std::vector<Rational> cuts{Rational(0)};
    std::vector<Rational> values;
    for (const auto& iv : normalize(support)) {
      if (iv.lo > cuts.back()) {
        values.push_back(Rational(0));
        cuts.push_back(iv.lo);
      }
      values.push_back(level);
      cuts.push_back(iv.hi);
    }
    if (cuts.back() < 1) {
      values.push_back(Rational(0));
      cuts.push_back(Rational(1));
    }
    return PiecewiseDensity(std::move(cuts), std::move(values));
  }

  const std::vector<Rational>& breakpoints() const { return breakpoints_; }
  const std::vector<Rational>& values() const { return values_; }
  std::size_t segments() const { return values_.size(); }

  // Density on the open interval immediately left of x (x in (0,1]); x = 0 maps to the first segment.
  const Rational& value_left_of(const Rational& x) const {
    auto it = std::lower_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, x);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  Rational integral(const Interval& iv) const {
    Rational sum;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      Rational lo = std::max(iv.lo, breakpoints_[k]);
      Rational hi = std::min(iv.hi, breakpoints_[k + 1]);
      if (hi > lo) sum += (hi - lo) * values_[k];
    }
    return sum;
  }

  Rational total() const { return integral({Rational(0), Rational(1)}); }

  // Positive value levels in strictly descending order (the ordinal classes).
  std::vector<Rational> levels() const {
    std::set<Rational, std::greater<>> distinct;
    for (const auto& v : values_)
      if (v > 0) distinct.insert(v);
    return {distinct.begin(), distinct.end()};
  }

  // Merges adjacent segments with equal value.
  PiecewiseDensity compacted() const {
    std::vector<Rational> cuts{breakpoints_.front()};
    std::vector<Rational> values;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!values.empty() && values.back() == values_[k]) {
        cuts.back() = breakpoints_[k + 1];
      } else {
        values.push_back(values_[k]);
        cuts.push_back(breakpoints_[k + 1]);
      }
    }
    return PiecewiseDensity(std::move(cuts), std::move(values));
  }

  friend bool operator==(const PiecewiseDensity& a, const PiecewiseDensity& b) {
    auto ca = a.compacted();
    auto cb = b.compacted();
    return ca.breakpoints_ == cb.breakpoints_ && ca.values_ == cb.values_;
  }

 private:
  std::vector<Rational> breakpoints_;
  std::vector<Rational> values_;
};

struct AgentSpec {
  std::string name;
  PiecewiseDensity density;
  Rational claim{1};
};

class Profile {
 public:
  explicit Profile(std::vector<AgentSpec> agents) : agents_(std::move(agents)) {
    if (agents_.empty()) throw Error(ErrorCode::EmptyProfile, "profile has no agents");
    std::unordered_set<std::string> names;
    for (const auto& a : agents_) {
      if (!names.insert(a.name).second) throw Error(ErrorCode::DuplicateAgent, "duplicate agent name '" + a.name + "'");
      if (a.claim <= 0) throw Error(ErrorCode::NonPositiveClaim, "claim of '" + a.name + "' must be positive");
    }
  }

  std::size_t size() const { return agents_.size(); }
  const AgentSpec& operator[](std::size_t i) const { return agents_[i]; }
  const std::vector<AgentSpec>& agents() const { return agents_; }

  std::vector<Rational> claims() const {
    std::vector<Rational> out;
    for (const auto& a : agents_) out.push_back(a.claim);
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& a : agents_) out.push_back(a.name);
    return out;
  }

  // Copy with agent i's report replaced.
  Profile with_density(std::size_t i, PiecewiseDensity density) const {
    auto copy = agents_;
    copy[i].density = std::move(density);
    return Profile(std::move(copy));
  }

 private:
  std::vector<AgentSpec> agents_;
};

/// Common grid of all agents' breakpoints; every density is constant on each cell.
/// Cell j is (cuts[j], cuts[j+1]] and values[j][i] is agent i's density there.
struct RefinedPartition {
  std::vector<Rational> cuts;
  std::vector<std::vector<Rational>> values;

  std::size_t cells() const { return values.size(); }
  std::size_t agents() const { return values.empty() ? 0 : values.front().size(); }
  Rational length(std::size_t j) const { return cuts[j + 1] - cuts[j]; }
  Interval cell(std::size_t j) const { return {cuts[j], cuts[j + 1]}; }

  bool desired(std::size_t j) const {
    return std::any_of(values[j].begin(), values[j].end(), [](const Rational& v) { return v > 0; });
  }

  std::vector<std::size_t> desirers(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values[j].size(); ++i)
      if (values[j][i] > 0) out.push_back(i);
    return out;
  }

  // Index of the cell containing the open neighbourhood right of x (x in [0,1)).
  std::size_t cell_right_of(const Rational& x) const {
    auto it = std::upper_bound(cuts.begin(), cuts.end() - 1, x);
    return static_cast<std::size_t>(it - cuts.begin()) - 1;
  }

  PiecewiseDensity density(std::size_t agent) const {
    std::vector<Rational> vals;
    for (const auto& row : values) vals.push_back(row[agent]);
    return PiecewiseDensity(cuts, std::move(vals)).compacted();
  }

  friend bool operator==(const RefinedPartition&, const RefinedPartition&) = default;
};

inline void check_extra_cuts(std::span<const Rational> extra) {
  for (const auto& x : extra)
    if (x < 0 || x > 1) throw Error(ErrorCode::InvalidArgument, "extra cut " + to_string(x) + " outside [0,1]");
}

inline RefinedPartition refine(const Profile& profile, std::span<const Rational> extra_cuts = {}) {
  check_extra_cuts(extra_cuts);
  std::set<Rational> cuts{Rational(0), Rational(1)};
  for (const auto& a : profile.agents()) cuts.insert(a.density.breakpoints().begin(), a.density.breakpoints().end());
  cuts.insert(extra_cuts.begin(), extra_cuts.end());

  RefinedPartition out;
  out.cuts.assign(cuts.begin(), cuts.end());
  out.values.resize(out.cuts.size() - 1);
  for (std::size_t j = 0; j + 1 < out.cuts.size(); ++j) {
    out.values[j].reserve(profile.size());
    for (const auto& a : profile.agents()) out.values[j].push_back(a.density.value_left_of(out.cuts[j + 1]));
  }
  return out;
}

// Splits the cells of an existing partition at extra cut points.
inline RefinedPartition refine(const RefinedPartition& base, std::span<const Rational> extra_cuts) {
  check_extra_cuts(extra_cuts);
  std::set<Rational> cuts(base.cuts.begin(), base.cuts.end());
  cuts.insert(extra_cuts.begin(), extra_cuts.end());
  RefinedPartition out;
  out.cuts.assign(cuts.begin(), cuts.end());
  out.values.reserve(out.cuts.size() - 1);
  std::size_t source = 0;
  for (std::size_t j = 0; j + 1 < out.cuts.size(); ++j) {
    while (base.cuts[source + 1] < out.cuts[j + 1]) ++source;
    out.values.push_back(base.values[source]);
  }
  return out;
}

/// Maps rescaled coordinates (after undesired cells are dropped) back to the
/// original cake. Each block is a maximal run of kept cells.
class OriginMap {
 public:
  struct Block {
    Rational rescaled_lo, rescaled_hi;
    Rational original_lo, original_hi;
  };

  OriginMap() : blocks_{{Rational(0), Rational(1), Rational(0), Rational(1)}}, kept_(1) {}
  OriginMap(std::vector<Block> blocks, Rational kept) : blocks_(std::move(blocks)), kept_(std::move(kept)) {}

  const std::vector<Block>& blocks() const { return blocks_; }
  // Original length of the kept cake; rescaled length = original length / kept().
  const Rational& kept() const { return kept_; }
  bool identity() const { return kept_ == 1; }

  Rational to_original(const Rational& x) const {
    for (const auto& b : blocks_)
      if (x <= b.rescaled_hi) return b.original_lo + (x - b.rescaled_lo) * kept_;
    return blocks_.back().original_hi;
  }

  Rational to_rescaled(const Rational& x) const {
    for (const auto& b : blocks_) {
      if (x <= b.original_lo) return b.rescaled_lo;
      if (x <= b.original_hi) return b.rescaled_lo + (x - b.original_lo) / kept_;
    }
    return Rational(1);
  }

  Piece to_original(const Piece& piece) const {
    Piece out;
    for (const auto& iv : piece) {
      for (const auto& b : blocks_) {
        Rational lo = std::max(iv.lo, b.rescaled_lo);
        Rational hi = std::min(iv.hi, b.rescaled_hi);
        if (hi > lo)
          out.push_back({b.original_lo + (lo - b.rescaled_lo) * kept_, b.original_lo + (hi - b.rescaled_lo) * kept_});
      }
    }
    return normalize(std::move(out));
  }

  // Original-coordinate intervals dropped by free disposal.
  Piece discarded() const {
    Piece out;
    Rational cursor(0);
    for (const auto& b : blocks_) {
      if (b.original_lo > cursor) out.push_back({cursor, b.original_lo});
      cursor = b.original_hi;
    }
    if (cursor < 1) out.push_back({cursor, Rational(1)});
    return out;
  }

 private:
  std::vector<Block> blocks_;
  Rational kept_;
};

struct Disposal {
  RefinedPartition partition;
  OriginMap origin;
};

/// Drops cells nobody desires and stretches the rest to tile [0,1] in order.
inline Disposal free_disposal(const RefinedPartition& partition) {
  Rational kept;
  for (std::size_t j = 0; j < partition.cells(); ++j)
    if (partition.desired(j)) kept += partition.length(j);
  if (kept == 0) throw Error(ErrorCode::NothingDesired, "no part of the cake is desired by any agent");

  Disposal out;
  std::vector<OriginMap::Block> blocks;
  out.partition.cuts.push_back(Rational(0));
  Rational cursor(0);
  for (std::size_t j = 0; j < partition.cells(); ++j) {
    if (!partition.desired(j)) continue;
    Rational next = cursor + partition.length(j) / kept;
    if (!blocks.empty() && blocks.back().original_hi == partition.cuts[j]) {
      blocks.back().rescaled_hi = next;
      blocks.back().original_hi = partition.cuts[j + 1];
    } else {
      blocks.push_back({cursor, next, partition.cuts[j], partition.cuts[j + 1]});
    }
    out.partition.cuts.push_back(next);
    out.partition.values.push_back(partition.values[j]);
    cursor = next;
  }
  out.origin = OriginMap(std::move(blocks), kept);
  return out;
}

/// V_i(piece) on a partition: exact overlap length times cell density.
inline Rational value_of(std::size_t agent, const Piece& piece, const RefinedPartition& partition) {
  Rational sum;
  for (const auto& iv : piece) {
    if (iv.hi <= iv.lo) continue;
    for (std::size_t j = partition.cell_right_of(iv.lo); j < partition.cells() && partition.cuts[j] < iv.hi; ++j) {
      Rational lo = std::max(iv.lo, partition.cuts[j]);
      Rational hi = std::min(iv.hi, partition.cuts[j + 1]);
      if (hi > lo) sum += (hi - lo) * partition.values[j][agent];
    }
  }
  return sum;
}

inline Rational value_of(const PiecewiseDensity& density, const Piece& piece) {
  Rational sum;
  for (const auto& iv : piece) sum += density.integral(iv);
  return sum;
}

/// share[j][i]: fraction of cell j owned by agent i.
struct FractionalAssignment {
  RefinedPartition partition;
  std::vector<std::vector<Rational>> share;

  static FractionalAssignment zeros(RefinedPartition partition) {
    FractionalAssignment out;
    out.share.assign(partition.cells(), std::vector<Rational>(partition.agents()));
    out.partition = std::move(partition);
    return out;
  }

  Rational utility(std::size_t agent) const {
    Rational sum;
    for (std::size_t j = 0; j < share.size(); ++j)
      if (share[j][agent] != 0) sum += share[j][agent] * partition.length(j) * partition.values[j][agent];
    return sum;
  }

  std::vector<Rational> utilities() const {
    std::vector<Rational> out;
    for (std::size_t i = 0; i < partition.agents(); ++i) out.push_back(utility(i));
    return out;
  }

  Rational assigned_length(std::size_t agent) const {
    Rational sum;
    for (std::size_t j = 0; j < share.size(); ++j) sum += share[j][agent] * partition.length(j);
    return sum;
  }
};

enum class Coordinates { Original, Rescaled };

struct Allocation {
  std::vector<std::string> names;
  std::vector<Piece> pieces;
  Piece waste;
  Coordinates coordinates = Coordinates::Original;
  std::optional<OriginMap> origin;  // present when coordinates == Rescaled

  std::size_t agents() const { return pieces.size(); }
};

inline Allocation to_original(const Allocation& alloc) {
  if (alloc.coordinates == Coordinates::Original || !alloc.origin) return alloc;
  Allocation out;
  out.names = alloc.names;
  for (const auto& p : alloc.pieces) out.pieces.push_back(alloc.origin->to_original(p));
  Piece waste = alloc.origin->to_original(alloc.waste);
  for (const auto& iv : alloc.origin->discarded()) waste.push_back(iv);
  out.waste = normalize(std::move(waste));
  out.coordinates = Coordinates::Original;
  return out;
}

struct ContiguousLayout {};
struct RotationLayout {
  std::uint64_t seed = 0;
};
using Layout = std::variant<ContiguousLayout, RotationLayout>;

/// Turns per-cell shares into concrete subintervals. Within a cell the
/// contiguous layout stacks agents left to right by index; the rotation
/// layout uses a seeded random wrap-around offset per cell.
inline Allocation materialize(const FractionalAssignment& assignment, const Layout& layout,
                              std::vector<std::string> names = {}) {
  const auto& part = assignment.partition;
  const std::size_t n = part.agents();
  for (std::size_t j = 0; j < part.cells(); ++j) {
    Rational sum;
    for (const auto& s : assignment.share[j]) {
      if (s < 0) throw Error(ErrorCode::InvalidArgument, "negative share in cell " + std::to_string(j));
      sum += s;
    }
    if (sum > 1) throw Error(ErrorCode::FractionOverflow, "shares exceed 1 in cell " + std::to_string(j));
  }

  Allocation out;
  out.pieces.resize(n);
  if (names.empty())
    for (std::size_t i = 0; i < n; ++i) names.push_back("agent" + std::to_string(i));
  out.names = std::move(names);

  std::optional<Rng> rng;
  if (auto* rot = std::get_if<RotationLayout>(&layout)) rng.emplace(rot->seed);

  for (std::size_t j = 0; j < part.cells(); ++j) {
    const Interval cell = part.cell(j);
    if (rng) {
      auto rotated = cmsd_rotation(cell, assignment.share[j], rng->uniform(cell.lo, cell.hi));
      for (std::size_t i = 0; i < n; ++i)
        out.pieces[i].insert(out.pieces[i].end(), rotated.pieces[i].begin(), rotated.pieces[i].end());
      out.waste.insert(out.waste.end(), rotated.leftover.begin(), rotated.leftover.end());
    } else {
      Rational cursor = cell.lo;
      const Rational len = cell.length();
      for (std::size_t i = 0; i < n; ++i) {
        const auto& s = assignment.share[j][i];
        if (s == 0) continue;
        Rational next = cursor + s * len;
        out.pieces[i].push_back({cursor, next});
        cursor = next;
      }
      if (cursor < cell.hi) out.waste.push_back({cursor, cell.hi});
    }
  }
  for (auto& p : out.pieces) p = normalize(std::move(p));
  out.waste = normalize(std::move(out.waste));
  return out;
}

}  // namespace fairslice

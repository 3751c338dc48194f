#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "fairslice/ccea.hpp"
#include "fairslice/csd.hpp"
#include "fairslice/error.hpp"
#include "fairslice/mea.hpp"
#include "fairslice/model.hpp"
#include "fairslice/rng.hpp"

namespace fairslice {

using Mechanism = std::function<Allocation(const Profile&)>;

/// Every cell of the common grid split evenly among all agents, laid out left to right.
inline Allocation uniform_split(const Profile& profile) {
  auto part = refine(profile);
  auto a = FractionalAssignment::zeros(part);
  const Rational share = Rational(1) / static_cast<long>(profile.size());
  for (auto& row : a.share) std::fill(row.begin(), row.end(), share);
  return materialize(a, ContiguousLayout{}, profile.names());
}

inline const std::vector<std::string>& mechanism_names() {
  static const std::vector<std::string> names{"ccea", "mea", "csd", "cmsd", "uniform"};
  return names;
}

inline Mechanism mechanism(const std::string& name, std::uint64_t seed = 42) {
  if (name == "ccea") return run_ccea;
  if (name == "mea") return [](const Profile& p) { return mea_solution(p, {.exact = true}).solution.allocation(); };
  if (name == "csd") return [](const Profile& p) { return run_csd(p).solution.allocation(); };
  if (name == "cmsd") return [seed](const Profile& p) { return run_cmsd(p, seed); };
  if (name == "uniform") return uniform_split;
  throw Error(ErrorCode::InvalidArgument, "unknown mechanism '" + name + "'");
}

enum class ReportKind { Any, PiecewiseUniform };

/// Finite family of misreports: breakpoints from the true breakpoints, the
/// truthful outcome's cut points and a uniform 1/grid lattice; values from
/// {0, ..., ladder} (or {0, 1} for piecewise uniform reports).
struct MisreportSpace {
  int grid = 10;
  int ladder = 4;
  ReportKind kind = ReportKind::Any;
  std::size_t budget = 100'000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct Manipulation {
  std::vector<std::size_t> coalition;
  std::vector<PiecewiseDensity> reports;
  std::vector<Rational> truthful;   // true-valuation utilities, one per coalition member
  std::vector<Rational> deviating;
};

struct ManipulationSearch {
  std::optional<Manipulation> found;
  std::size_t evaluated = 0;
  bool exhaustive = false;  // the whole space was tried, so absence is definitive for it
};

namespace detail {

inline std::string density_key(const PiecewiseDensity& d) {
  auto c = d.compacted();
  std::string key;
  for (const auto& b : c.breakpoints()) key += to_string(b) + ",";
  key += "|";
  for (const auto& v : c.values()) key += to_string(v) + ",";
  return key;
}

class ReportList {
 public:
  explicit ReportList(const PiecewiseDensity& truth) { add(truth); }

  bool add(const std::vector<Rational>& cuts, const std::vector<Rational>& vals) {
    if (std::all_of(vals.begin(), vals.end(), [](const Rational& v) { return v == 0; })) return false;
    return add(PiecewiseDensity(cuts, vals));
  }

  bool add(const PiecewiseDensity& d) {
    if (!seen_.insert(density_key(d)).second) return false;
    items_.push_back(d);
    return true;
  }
  std::size_t size() const { return items_.size(); }
  const PiecewiseDensity& operator[](std::size_t k) const { return items_[k]; }

 private:
  std::vector<PiecewiseDensity> items_;
  std::set<std::string> seen_;
};

inline std::vector<Rational> value_choices(const MisreportSpace& space) {
  std::vector<Rational> out;
  const int top = space.kind == ReportKind::PiecewiseUniform ? 1 : space.ladder;
  for (int v = 0; v <= top; ++v) out.push_back(Rational(v));
  return out;
}

// One member's reports, produced on demand: relabelled true levels and single
// intervals first, then every value assignment on a fixed set of breakpoints
// (the member's own, or every candidate point when the space is searched in
// full), then seeded random reports.
class ReportStream {
 public:
  ReportStream(const PiecewiseDensity& truth, std::vector<Rational> points, const MisreportSpace& space,
               bool exhaustive, std::uint64_t seed)
      : list_(truth),
        points_(std::move(points)),
        choices_(value_choices(space)),
        odometer_cuts_(exhaustive ? points_ : truth.breakpoints()),
        digit_(odometer_cuts_.size() - 1, 0),
        random_(!exhaustive),
        rng_(seed) {
    if (space.kind == ReportKind::Any) {
      auto vals = truth.values();
      std::sort(vals.begin(), vals.end());
      for (int k = 0; k < 5040; ++k) {
        list_.add(truth.breakpoints(), vals);
        if (!std::next_permutation(vals.begin(), vals.end())) break;
      }
    }
    for (std::size_t a = 0; a < points_.size(); ++a)
      for (std::size_t b = a + 1; b < points_.size(); ++b) {
        std::vector<Rational> cuts{Rational(0)}, vals;
        if (points_[a] > 0) {
          cuts.push_back(points_[a]);
          vals.push_back(Rational(0));
        }
        vals.push_back(Rational(1));
        if (points_[b] < 1) {
          cuts.push_back(points_[b]);
          vals.push_back(Rational(0));
        }
        cuts.push_back(Rational(1));
        list_.add(cuts, vals);
      }
  }

  // True when report k exists (generating it if needed).
  bool ensure(std::size_t k) {
    while (list_.size() <= k && !done_) step();
    return list_.size() > k;
  }
  std::size_t size() const { return list_.size(); }
  const PiecewiseDensity& operator[](std::size_t k) const { return list_[k]; }

 private:
  void step() {
    if (!odometer_done_) {
      std::size_t k = 0;
      while (k < digit_.size() && ++digit_[k] == choices_.size()) digit_[k++] = 0;
      if (k == digit_.size()) {
        odometer_done_ = true;
        return;
      }
      std::vector<Rational> vals;
      for (auto d : digit_) vals.push_back(choices_[d]);
      list_.add(odometer_cuts_, vals);
      return;
    }
    if (!random_ || misses_ > 10'000) {
      done_ = true;
      return;
    }
    std::vector<Rational> cuts{Rational(0)};
    for (const auto& p : points_)
      if (p > 0 && p < 1 && rng_.below(3) == 0) cuts.push_back(p);
    cuts.push_back(Rational(1));
    std::vector<Rational> vals;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) vals.push_back(choices_[rng_.below(choices_.size())]);
    misses_ = list_.add(cuts, vals) ? 0 : misses_ + 1;
  }

  ReportList list_;
  std::vector<Rational> points_;
  std::vector<Rational> choices_;
  std::vector<Rational> odometer_cuts_;
  std::vector<std::size_t> digit_;
  bool random_;
  Rng rng_;
  bool odometer_done_ = false;
  bool done_ = false;
  std::size_t misses_ = 0;
};

inline double space_size(std::size_t segments, std::size_t choices) {
  return std::pow(static_cast<double>(choices), static_cast<double>(segments));
}

}  // namespace detail

/// Searches for reports by `coalition` that leave every member at least as well
/// off under their true valuations and one strictly better off, with all
/// other reports fixed. Tuples are tried in order of their largest per-member
/// index, so the result is deterministic for any thread count.
inline ManipulationSearch find_manipulation(const Mechanism& mech, const Profile& truth,
                                            const std::vector<std::size_t>& coalition,
                                            const MisreportSpace& space = {}) {
  if (coalition.empty()) throw Error(ErrorCode::InvalidArgument, "coalition is empty");
  for (auto i : coalition)
    if (i >= truth.size()) throw Error(ErrorCode::InvalidArgument, "coalition member out of range");
  if (std::set<std::size_t>(coalition.begin(), coalition.end()).size() != coalition.size())
    throw Error(ErrorCode::InvalidArgument, "coalition lists an agent twice");
  if (space.grid < 1 || space.ladder < 1 || space.budget == 0)
    throw Error(ErrorCode::InvalidArgument, "misreport space needs grid, ladder and budget >= 1");

  auto utilities_under_truth = [&](const Allocation& alloc) {
    auto original = to_original(alloc);
    std::vector<Rational> u;
    for (auto i : coalition) {
      auto it = std::find(original.names.begin(), original.names.end(), truth[i].name);
      u.push_back(value_of(truth[i].density, original.pieces[static_cast<std::size_t>(it - original.names.begin())]));
    }
    return u;
  };
  auto honest = mech(truth);
  const auto truthful = utilities_under_truth(honest);

  std::set<Rational> pts{Rational(0), Rational(1)};
  for (const auto& a : truth.agents()) pts.insert(a.density.breakpoints().begin(), a.density.breakpoints().end());
  for (const auto& p : to_original(honest).pieces)
    for (const auto& iv : p) pts.insert({iv.lo, iv.hi});
  for (int k = 1; k < space.grid; ++k) pts.insert(make_rational(k, space.grid));
  const std::vector<Rational> points(pts.begin(), pts.end());

  const std::size_t members = coalition.size();
  const auto choices = detail::value_choices(space).size();
  const double full = std::pow(detail::space_size(points.size() - 1, choices), static_cast<double>(members));
  ManipulationSearch result;
  result.exhaustive = full <= static_cast<double>(space.budget);

  std::vector<detail::ReportStream> lists;
  for (std::size_t k = 0; k < members; ++k)
    lists.emplace_back(truth[coalition[k]].density, points, space, result.exhaustive, space.seed + k);

  auto evaluate = [&](const std::vector<std::size_t>& tuple) -> std::optional<Manipulation> {
    Profile reported = truth;
    Manipulation m{coalition, {}, truthful, {}};
    for (std::size_t k = 0; k < members; ++k) {
      reported = reported.with_density(coalition[k], lists[k][tuple[k]]);
      m.reports.push_back(lists[k][tuple[k]]);
    }
    m.deviating = utilities_under_truth(mech(reported));
    bool strict = false;
    for (std::size_t k = 0; k < members; ++k) {
      if (m.deviating[k] < truthful[k]) return std::nullopt;
      strict = strict || m.deviating[k] > truthful[k];
    }
    if (!strict) return std::nullopt;
    return m;
  };

  // tuples ordered by their largest index, then lexicographically
  std::vector<std::vector<std::size_t>> batch;
  const unsigned workers = std::max(1u, space.threads);
  auto flush = [&]() -> bool {
    std::vector<std::optional<Manipulation>> found(batch.size());
    if (workers == 1) {
      for (std::size_t b = 0; b < batch.size(); ++b) {
        found[b] = evaluate(batch[b]);
        if (found[b]) break;
      }
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t b = w; b < batch.size(); b += workers) found[b] = evaluate(batch[b]);
        });
      for (auto& t : pool) t.join();
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      ++result.evaluated;
      if (found[b]) {
        result.found = std::move(found[b]);
        return true;
      }
    }
    batch.clear();
    return false;
  };

  std::vector<std::size_t> tuple(members);
  for (std::size_t r = 1;; ++r) {
    bool any = false;
    for (auto& l : lists) any = l.ensure(r) || any;
    if (!any) break;
    std::fill(tuple.begin(), tuple.end(), 0);
    for (;;) {
      bool valid = std::find(tuple.begin(), tuple.end(), r) != tuple.end();
      for (std::size_t k = 0; k < members && valid; ++k) valid = tuple[k] < lists[k].size();
      if (valid) {
        if (result.evaluated + batch.size() >= space.budget) {
          flush();
          result.exhaustive = false;
          return result;
        }
        batch.push_back(tuple);
        if (batch.size() >= 4 * workers && flush()) return result;
      }
      std::size_t k = 0;
      while (k < members && ++tuple[k] > r) tuple[k++] = 0;
      if (k == members) break;
    }
  }
  flush();
  return result;
}

}  // namespace fairslice

#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/model.hpp"
#include "fairslice/solution.hpp"

namespace fairslice {

enum class TieBreak { Leftmost, Rightmost };

namespace detail {

struct Segment {
  Rational lo, hi, value;
};

// Available cake split at the density's breakpoints.
inline std::vector<Segment> segments_of(const std::vector<Rational>& cuts, const std::vector<Rational>& values,
                                        const Piece& available) {
  std::vector<Segment> out;
  std::size_t k = 0;
  for (const auto& iv : available) {
    while (k + 2 < cuts.size() && cuts[k + 1] <= iv.lo) ++k;
    Rational lo = iv.lo;
    for (std::size_t c = k; c + 1 < cuts.size() && lo < iv.hi; ++c) {
      if (cuts[c + 1] <= lo) continue;
      Rational hi = std::min(iv.hi, cuts[c + 1]);
      out.push_back({lo, hi, values[c]});
      lo = std::move(hi);
    }
  }
  return out;
}

inline Piece pick_best(std::vector<Segment> segs, const Rational& target, TieBreak tie) {
  Rational available;
  for (const auto& s : segs) available += s.hi - s.lo;
  if (available < target)
    throw Error(ErrorCode::InsufficientCake,
                "only " + to_string(available) + " of cake available, " + to_string(target) + " requested");
  // descending level; zero-valued filler is always consumed left to right
  std::stable_sort(segs.begin(), segs.end(), [&](const Segment& a, const Segment& b) {
    if (a.value != b.value) return a.value > b.value;
    if (tie == TieBreak::Rightmost && a.value > 0) return a.lo > b.lo;
    return a.lo < b.lo;
  });
  Piece out;
  Rational need = target;
  for (const auto& s : segs) {
    if (need <= 0) break;
    const Rational len = s.hi - s.lo;
    if (len <= need) {
      out.push_back({s.lo, s.hi});
      need -= len;
    } else if (tie == TieBreak::Rightmost && s.value > 0) {
      out.push_back({s.hi - need, s.hi});
      need = 0;
    } else {
      out.push_back({s.lo, s.lo + need});
      need = 0;
    }
  }
  return normalize(std::move(out));
}

inline Piece subtract(const Piece& from, const Piece& taken) {
  Piece out;
  std::size_t t = 0;
  for (const auto& iv : from) {
    Rational lo = iv.lo;
    while (t < taken.size() && taken[t].hi <= lo) ++t;
    for (std::size_t k = t; k < taken.size() && taken[k].lo < iv.hi; ++k) {
      if (taken[k].lo > lo) out.push_back({lo, taken[k].lo});
      lo = std::max(lo, taken[k].hi);
    }
    if (lo < iv.hi) out.push_back({lo, iv.hi});
  }
  return out;
}

}  // namespace detail

/// Most valuable sub-piece of `available` with total length `target`: whole
/// value levels in descending order, the overflowing level cut at its
/// leftmost (or rightmost) end, zero-valued filler last and leftmost.
inline Piece best_piece(const PiecewiseDensity& density, const Piece& available, const Rational& target,
                        TieBreak tie = TieBreak::Leftmost) {
  return detail::pick_best(detail::segments_of(density.breakpoints(), density.values(), normalize(available)), target,
                           tie);
}

struct CsdOptions {
  bool free_disposal = true;
  TieBreak tie_break = TieBreak::Leftmost;
  std::size_t max_agents = 8;
  unsigned threads = 0;  // 0: FAIRSLICE_THREADS or the hardware concurrency
};

struct PermutationOutcome {
  std::vector<std::size_t> permutation;
  std::vector<Piece> pieces;          // per agent, original coordinates
  std::vector<Rational> cut_points;   // every piece endpoint, original coordinates
  std::vector<Rational> utilities;    // reported-value utilities
};

namespace detail {

struct SerialCake {
  RefinedPartition partition;  // the cake the dictators choose from
  OriginMap origin;
  std::vector<PiecewiseDensity> densities;
  Rational share;  // length each agent takes
};

inline SerialCake serial_cake(const Profile& profile, bool free_disposal) {
  SerialCake cake;
  if (free_disposal) {
    auto d = prepare(profile);
    cake.partition = std::move(d.partition);
    cake.origin = std::move(d.origin);
  } else {
    cake.partition = refine(profile);
  }
  for (std::size_t i = 0; i < profile.size(); ++i) cake.densities.push_back(cake.partition.density(i));
  cake.share = Rational(1) / static_cast<long>(profile.size());
  return cake;
}

inline std::vector<std::size_t> checked_permutation(const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) throw Error(ErrorCode::InvalidPermutation, "permutation must list every agent once");
  std::vector<bool> seen(n, false);
  for (auto i : perm) {
    if (i >= n || seen[i]) throw Error(ErrorCode::InvalidPermutation, "permutation must list every agent once");
    seen[i] = true;
  }
  return perm;
}

inline unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FAIRSLICE_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

/// One serial dictatorship: agents in `permutation` order each take their best
/// piece of length 1/n of the (post-disposal) cake from what is left.
inline PermutationOutcome run_crsd(const Profile& profile, const std::vector<std::size_t>& permutation,
                                   const CsdOptions& options = {}) {
  const std::size_t n = profile.size();
  auto cake = detail::serial_cake(profile, options.free_disposal);
  PermutationOutcome out;
  out.permutation = detail::checked_permutation(permutation, n);
  out.pieces.resize(n);
  Piece available{{Rational(0), Rational(1)}};
  std::vector<Piece> rescaled(n);
  for (auto i : out.permutation) {
    rescaled[i] = best_piece(cake.densities[i], available, cake.share, options.tie_break);
    available = detail::subtract(available, rescaled[i]);
  }
  auto original = refine(profile);
  std::vector<Rational> cuts;
  for (std::size_t i = 0; i < n; ++i) {
    out.pieces[i] = cake.origin.to_original(rescaled[i]);
    for (const auto& iv : out.pieces[i]) {
      cuts.push_back(iv.lo);
      cuts.push_back(iv.hi);
    }
    out.utilities.push_back(value_of(i, out.pieces[i], original));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  out.cut_points = std::move(cuts);
  return out;
}

struct CsdResult {
  Solution solution;     // assignment over the refined grid J' (post-disposal coordinates)
  std::size_t samples;   // permutations aggregated
  bool exact;            // false for sampled estimates
};

namespace detail {

// Per agent: endpoint -> signed multiplicity; prefix sums give how many permutations own each cell.
using Tally = std::vector<std::map<Rational, Integer>>;

inline void add_piece(Tally& tally, std::size_t agent, const Piece& piece, const Integer& weight) {
  for (const auto& iv : piece) {
    tally[agent][iv.lo] += weight;
    tally[agent][iv.hi] -= weight;
  }
}

inline CsdResult assemble(const SerialCake& cake, const Profile& profile, const Tally& tally, const Integer& total,
                          std::size_t samples, bool exact) {
  const std::size_t n = profile.size();
  std::vector<Rational> cuts;
  for (const auto& t : tally)
    for (const auto& [x, w] : t) cuts.push_back(x);
  auto grid = refine(cake.partition, cuts);
  auto assignment = FractionalAssignment::zeros(grid);
  for (std::size_t i = 0; i < n; ++i) {
    Integer running = 0;
    auto it = tally[i].begin();
    for (std::size_t j = 0; j < grid.cells(); ++j) {
      while (it != tally[i].end() && it->first <= grid.cuts[j]) running += (it++)->second;
      if (running != 0) assignment.share[j][i] = Rational(running, total);
    }
  }
  return {Solution{std::move(assignment), cake.origin, profile.names()}, samples, exact};
}

}  // namespace detail

/// Averages serial dictatorship over all n! orders. The permutation tree is
/// walked depth first so that each prefix's choices are computed once and
/// weighted by the number of orders sharing it.
inline CsdResult run_csd(const Profile& profile, const CsdOptions& options = {}) {
  const std::size_t n = profile.size();
  if (n > options.max_agents)
    throw Error(ErrorCode::TooManyAgents, std::to_string(n) + " agents exceed the exact limit of " +
                                              std::to_string(options.max_agents) + "; use the sampling mode");
  auto cake = detail::serial_cake(profile, options.free_disposal);
  std::vector<Integer> factorial(n + 1, Integer(1));
  for (std::size_t k = 1; k <= n; ++k) factorial[k] = factorial[k - 1] * static_cast<unsigned>(k);

  // each first mover's subtree is independent; subtrees are tallied separately and summed
  std::vector<detail::Tally> tallies(n, detail::Tally(n));
  auto walk_subtree = [&](std::size_t first) {
    auto& tally = tallies[first];
    std::vector<bool> used(n, false);
    auto dfs = [&](auto& self, std::size_t depth, const Piece& available, std::size_t agent) -> void {
      Piece piece = best_piece(cake.densities[agent], available, cake.share, options.tie_break);
      detail::add_piece(tally, agent, piece, factorial[n - depth - 1]);
      if (depth + 1 == n) return;
      Piece rest = detail::subtract(available, piece);
      used[agent] = true;
      for (std::size_t next = 0; next < n; ++next)
        if (!used[next]) self(self, depth + 1, rest, next);
      used[agent] = false;
    };
    dfs(dfs, 0, Piece{{Rational(0), Rational(1)}}, first);
  };

  const unsigned workers = std::min<unsigned>(detail::thread_count(options.threads), static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t first = 0; first < n; ++first) walk_subtree(first);
  } else {
    std::vector<std::thread> pool;
    std::mutex lock;
    std::size_t next = 0;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t first;
          {
            std::lock_guard guard(lock);
            if (next == n) return;
            first = next++;
          }
          walk_subtree(first);
        }
      });
    for (auto& t : pool) t.join();
  }

  detail::Tally merged(n);
  for (const auto& t : tallies)
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [x, w] : t[i]) merged[i][x] += w;
  std::size_t perms = 1;
  for (std::size_t k = 2; k <= n; ++k) perms *= k;
  return detail::assemble(cake, profile, merged, factorial[n], perms, true);
}

/// Estimate of run_csd from `samples` uniformly drawn orders.
inline CsdResult run_crsd_sampled(const Profile& profile, std::size_t samples, std::uint64_t seed,
                                  const CsdOptions& options = {}) {
  if (samples == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  const std::size_t n = profile.size();
  auto cake = detail::serial_cake(profile, options.free_disposal);
  Rng rng(seed);
  detail::Tally tally(n);
  std::vector<std::size_t> order(n);
  for (std::size_t s = 0; s < samples; ++s) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    Piece available{{Rational(0), Rational(1)}};
    for (auto i : order) {
      Piece piece = best_piece(cake.densities[i], available, cake.share, options.tie_break);
      detail::add_piece(tally, i, piece, Integer(1));
      available = detail::subtract(available, piece);
    }
  }
  return detail::assemble(cake, profile, tally, Integer(static_cast<unsigned long>(samples)), samples, false);
}

/// CSD with every cell of J' split by a seeded random rotation.
inline Allocation run_cmsd(const Profile& profile, std::uint64_t seed, const CsdOptions& options = {}) {
  return run_csd(profile, options).solution.allocation(RotationLayout{seed});
}

}  // namespace fairslice

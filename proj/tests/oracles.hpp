#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fairslice/fairness.hpp"
#include "fairslice/model.hpp"
#include "fairslice/rng.hpp"
#include "fairslice/simplex.hpp"

// Test-side oracles shared by the unit tests and the acceptance binary.
namespace oracles {

using namespace fairslice;

struct Polytope {
  RefinedPartition part;
  LinearProgram lp;
  std::vector<std::vector<std::size_t>> x;  // x[j][i]: fraction of cell j held by agent i
};

// Fractional assignments on the grid meeting robust proportionality (and
// optionally non-wastefulness), written directly from the prefix definition.
inline Polytope robust_prop_polytope(const Profile& profile, bool non_wasteful) {
  Polytope p{refine(profile), {}, {}};
  const std::size_t n = profile.size(), m = p.part.cells();
  p.x.assign(m, std::vector<std::size_t>(n));
  for (std::size_t j = 0; j < m; ++j) {
    LinearConstraint cell{{}, non_wasteful && p.part.desired(j) ? Relation::Equal : Relation::LessEqual, Rational(1)};
    for (std::size_t i = 0; i < n; ++i) {
      p.x[j][i] = p.lp.add_variable();
      cell.terms.push_back({p.x[j][i], Rational(1)});
      if (non_wasteful && p.part.desired(j) && p.part.values[j][i] == 0)
        p.lp.constraints.push_back({{{p.x[j][i], Rational(1)}}, Relation::Equal, Rational(0)});
    }
    p.lp.constraints.push_back(std::move(cell));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto levels = profile[i].density.levels();
    for (std::size_t t = 0; t < levels.size(); ++t) {
      LinearConstraint prefix{{}, Relation::GreaterEqual, Rational(0)};
      for (std::size_t j = 0; j < m; ++j)
        if (p.part.values[j][i] >= levels[t]) {
          prefix.terms.push_back({p.x[j][i], p.part.length(j)});
          prefix.rhs += p.part.length(j) / static_cast<long>(n);
        }
      p.lp.constraints.push_back(std::move(prefix));
    }
  }
  return p;
}

// Maximum of the objective over the polytope.
inline Rational optimum(Polytope p, std::vector<std::pair<std::size_t, Rational>> objective) {
  for (auto& [v, c] : objective) p.lp.objective[v] = c;
  auto s = solve(p.lp);
  if (s.status != LpStatus::Optimal) throw std::runtime_error("polytope LP not optimal");
  return s.value;
}

// Random fractional split of the grid, sometimes leaving cake unassigned.
inline Allocation random_allocation(Rng& rng, const Profile& profile) {
  auto part = refine(profile);
  auto a = FractionalAssignment::zeros(part);
  for (auto& row : a.share) {
    Rational left = rng.below(4) == 0 ? make_rational(rng.between(0, 4), 4) : Rational(1);
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      row[i] = left * make_rational(rng.between(0, 6), 6);
      left -= row[i];
    }
    row.back() = left;
  }
  return materialize(a, ContiguousLayout{}, profile.names());
}

// Brute force over ordinally equivalent densities: strictly decreasing class
// weights with drops spread over many orders of magnitude. Class lengths come
// from integrating indicator densities, so a weighted value is a dot product.
inline bool weights_find_violation(Rng& rng, const Profile& profile, const Allocation& alloc,
                                   std::optional<std::size_t> other, std::size_t agent, int draws) {
  AllocationView view(profile, alloc);
  const auto& d = profile[agent].density;
  auto levels = d.levels();
  Rational claims;
  for (const auto& c : profile.claims()) claims += c;
  std::vector<Rational> own, ref;
  for (const auto& level : levels) {
    std::vector<Rational> vals;
    for (const auto& v : d.values()) vals.push_back(v == level ? Rational(1) : Rational(0));
    PiecewiseDensity indicator(d.breakpoints(), vals);
    own.push_back(value_of(indicator, view.piece(agent)));
    ref.push_back(other ? profile[agent].claim / profile[*other].claim * value_of(indicator, view.piece(*other))
                        : profile[agent].claim / claims * indicator.total());
  }
  for (int s = 0; s < draws; ++s) {
    Rational acc, gap;
    for (std::size_t c = levels.size(); c-- > 0;) {
      acc += Rational(std::pow(10.0, -9.0 * rng.uniform_double()) * (0.5 + rng.uniform_double()));
      gap += acc * (own[c] - ref[c]);
    }
    if (gap < 0) return true;
  }
  return false;
}

}  // namespace oracles

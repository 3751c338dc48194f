#pragma once

#include <optional>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/model.hpp"
#include "fairslice/simplex.hpp"

namespace fairslice {

struct ParetoImprovement {
  FractionalAssignment assignment;
  std::vector<Rational> gains;  // utility increase per agent, all >= 0 and not all zero
};

inline void require_feasible(const FractionalAssignment& a) {
  const auto& part = a.partition;
  if (a.share.size() != part.cells()) throw Error(ErrorCode::InfeasibleInput, "assignment does not match its partition");
  for (std::size_t j = 0; j < part.cells(); ++j) {
    if (a.share[j].size() != part.agents()) throw Error(ErrorCode::InfeasibleInput, "assignment row has wrong width");
    Rational sum;
    for (const auto& s : a.share[j]) {
      if (s < 0) throw Error(ErrorCode::InfeasibleInput, "negative share in cell " + std::to_string(j));
      sum += s;
    }
    if (sum > 1) throw Error(ErrorCode::InfeasibleInput, "cell " + std::to_string(j) + " is over-assigned");
  }
}

/// Solves  max sum(eps)  s.t.  sum_i y[j][i] <= 1,  sum_j v[j][i] l_j y[j][i] - eps_i >= u_i.
/// Returns an improving assignment iff the optimum exceeds `slack` (0 for exact certification).
inline std::optional<ParetoImprovement> pareto_improvement(const FractionalAssignment& current,
                                                           const Rational& slack = Rational(0)) {
  require_feasible(current);
  const auto& part = current.partition;
  const std::size_t n = part.agents(), m = part.cells();

  LinearProgram lp;
  std::vector<std::vector<std::optional<std::size_t>>> y(m, std::vector<std::optional<std::size_t>>(n));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (part.values[j][i] > 0) y[j][i] = lp.add_variable();
  std::vector<std::size_t> eps;
  for (std::size_t i = 0; i < n; ++i) eps.push_back(lp.add_variable(Rational(1)));

  for (std::size_t j = 0; j < m; ++j) {
    LinearConstraint cell{{}, Relation::LessEqual, Rational(1)};
    for (std::size_t i = 0; i < n; ++i)
      if (y[j][i]) cell.terms.push_back({*y[j][i], Rational(1)});
    if (!cell.terms.empty()) lp.constraints.push_back(std::move(cell));
  }
  const auto utilities = current.utilities();
  for (std::size_t i = 0; i < n; ++i) {
    LinearConstraint keep{{}, Relation::GreaterEqual, utilities[i]};
    for (std::size_t j = 0; j < m; ++j)
      if (y[j][i]) keep.terms.push_back({*y[j][i], part.values[j][i] * part.length(j)});
    keep.terms.push_back({eps[i], Rational(-1)});
    lp.constraints.push_back(std::move(keep));
  }

  auto solution = solve(lp);
  if (solution.status != LpStatus::Optimal) throw Error(ErrorCode::Internal, "pareto program should be feasible and bounded");
  if (solution.value <= slack) return std::nullopt;

  ParetoImprovement out{FractionalAssignment::zeros(part), {}};
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (y[j][i]) out.assignment.share[j][i] = solution.x[*y[j][i]];
  for (std::size_t i = 0; i < n; ++i) out.gains.push_back(out.assignment.utility(i) - utilities[i]);
  return out;
}

}  // namespace fairslice

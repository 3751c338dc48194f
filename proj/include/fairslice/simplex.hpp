#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/rational.hpp"

namespace fairslice {

enum class Relation { LessEqual, Equal, GreaterEqual };

struct LinearConstraint {
  std::vector<std::pair<std::size_t, Rational>> terms;  // sparse: (variable, coefficient)
  Relation relation = Relation::LessEqual;
  Rational rhs;
};

/// maximize objective . x  subject to constraints, x >= 0.
struct LinearProgram {
  std::size_t variables = 0;
  std::vector<Rational> objective;
  std::vector<LinearConstraint> constraints;

  std::size_t add_variable(Rational cost = Rational(0)) {
    objective.push_back(std::move(cost));
    return variables++;
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Rational value;
  std::vector<Rational> x;
};

namespace detail {

// Dense tableau; column `cols` holds the right-hand side.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, std::vector<Rational>(cols + 1)), basis_(rows) {}

  std::vector<Rational>& row(std::size_t r) { return rows_[r]; }
  std::size_t& basic(std::size_t r) { return basis_[r]; }
  std::size_t rows() const { return rows_.size(); }

  void pivot(std::size_t r, std::size_t c, std::vector<Rational>& objective, Rational& value) {
    auto& p = rows_[r];
    const Rational inv = Rational(1) / p[c];
    std::vector<std::size_t> nonzero;
    for (std::size_t k = 0; k <= cols_; ++k) {
      if (p[k] == 0) continue;
      p[k] *= inv;
      nonzero.push_back(k);
    }
    for (std::size_t other = 0; other < rows_.size(); ++other) {
      if (other == r || rows_[other][c] == 0) continue;
      auto& target = rows_[other];
      const Rational factor = target[c];
      for (auto k : nonzero) target[k] -= factor * p[k];
    }
    // reduced costs and the running objective value
    const Rational factor = objective[c];
    if (factor != 0) {
      for (auto k : nonzero) {
        if (k == cols_) value += factor * p[k];
        else objective[k] -= factor * p[k];
      }
    }
    basis_[r] = c;
  }

  // Bland's rule: lowest-index improving column, lowest-index basic variable among ratio ties.
  // Returns false when unbounded.
  bool optimize(std::vector<Rational>& objective, Rational& value, const std::vector<bool>& allowed) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t c = 0; c < cols_; ++c)
        if (allowed[c] && objective[c] > 0) {
          enter = c;
          break;
        }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t r = 0; r < rows_.size(); ++r) {
        const auto& a = rows_[r][*enter];
        if (a <= 0) continue;
        Rational ratio = rows_[r][cols_] / a;
        if (!leave || ratio < best || (ratio == best && basis_[r] < basis_[*leave])) {
          leave = r;
          best = std::move(ratio);
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter, objective, value);
    }
  }

  void drop_row(std::size_t r) {
    rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

 private:
  std::size_t cols_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Exact two-phase primal simplex with Bland's anti-cycling rule.
inline LpSolution solve(const LinearProgram& lp) {
  const std::size_t n = lp.variables;
  const std::size_t m = lp.constraints.size();
  if (lp.objective.size() != n) throw Error(ErrorCode::InvalidArgument, "objective size differs from variable count");

  // columns: originals, then one slack/surplus per inequality, then one artificial per row that needs it
  std::vector<Relation> rel(m);
  std::vector<bool> flip(m, false);
  std::size_t slacks = 0, artificials = 0;
  for (std::size_t r = 0; r < m; ++r) {
    const auto& c = lp.constraints[r];
    for (const auto& [var, coeff] : c.terms)
      if (var >= n) throw Error(ErrorCode::InvalidArgument, "constraint references an unknown variable");
    rel[r] = c.relation;
    if (c.rhs < 0) {
      flip[r] = true;
      if (rel[r] == Relation::LessEqual) rel[r] = Relation::GreaterEqual;
      else if (rel[r] == Relation::GreaterEqual) rel[r] = Relation::LessEqual;
    }
    if (rel[r] != Relation::Equal) ++slacks;
    if (rel[r] != Relation::LessEqual) ++artificials;
  }
  const std::size_t cols = n + slacks + artificials;
  detail::Tableau t(m, cols);
  std::vector<bool> is_artificial(cols, false);
  std::size_t next_slack = n, next_artificial = n + slacks;
  for (std::size_t r = 0; r < m; ++r) {
    const auto& c = lp.constraints[r];
    auto& row = t.row(r);
    const Rational sign(flip[r] ? -1 : 1);
    for (const auto& [var, coeff] : c.terms) row[var] += sign * coeff;
    row[cols] = sign * c.rhs;
    if (rel[r] == Relation::LessEqual) {
      row[next_slack] = 1;
      t.basic(r) = next_slack++;
    } else {
      if (rel[r] == Relation::GreaterEqual) row[next_slack++] = -1;
      row[next_artificial] = 1;
      is_artificial[next_artificial] = true;
      t.basic(r) = next_artificial++;
    }
  }

  std::vector<bool> allowed(cols, true);
  for (std::size_t k = 0; k < cols; ++k) allowed[k] = !is_artificial[k];

  // phase 1: maximize -sum(artificials)
  if (artificials > 0) {
    std::vector<Rational> objective(cols);
    Rational value;
    for (std::size_t r = 0; r < m; ++r) {
      if (!is_artificial[t.basic(r)]) continue;
      const auto& row = t.row(r);
      for (std::size_t k = 0; k < cols; ++k)
        if (!is_artificial[k]) objective[k] += row[k];
      value -= row[cols];
    }
    t.optimize(objective, value, allowed);
    if (value != 0) return {LpStatus::Infeasible, Rational(0), {}};
    // drive remaining (zero-valued) artificials out of the basis, dropping redundant rows
    for (std::size_t r = 0; r < t.rows();) {
      if (!is_artificial[t.basic(r)]) {
        ++r;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t k = 0; k < cols; ++k)
        if (!is_artificial[k] && t.row(r)[k] != 0) {
          col = k;
          break;
        }
      if (col) {
        std::vector<Rational> dummy(cols);
        Rational ignored;
        t.pivot(r, *col, dummy, ignored);
        ++r;
      } else {
        t.drop_row(r);
      }
    }
  }

  std::vector<Rational> objective(cols);
  Rational value;
  for (std::size_t k = 0; k < n; ++k) objective[k] = lp.objective[k];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto b = t.basic(r);
    if (b >= n || lp.objective[b] == 0) continue;
    const Rational cb = lp.objective[b];
    const auto& row = t.row(r);
    for (std::size_t k = 0; k < cols; ++k)
      if (row[k] != 0) objective[k] -= cb * row[k];
    value += cb * row[cols];
  }
  if (!t.optimize(objective, value, allowed)) return {LpStatus::Unbounded, Rational(0), {}};

  LpSolution out{LpStatus::Optimal, value, std::vector<Rational>(n)};
  for (std::size_t r = 0; r < t.rows(); ++r)
    if (t.basic(r) < n) out.x[t.basic(r)] = t.row(r)[cols];
  return out;
}

}  // namespace fairslice

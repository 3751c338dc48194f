#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/maxflow.hpp"
#include "fairslice/model.hpp"
#include "fairslice/solution.hpp"

namespace fairslice {

struct MeaOptions {
  double tolerance = 1e-9;
  bool exact = false;
  std::size_t max_iterations = 10'000'000;
};

/// Fisher-market equilibrium with budgets; maximizes sum_i budget_i * log(u_i).
/// Prices are per unit length of each cell. In exact mode the rational fields
/// are set and the residual is 0.
struct EquilibriumResult {
  FractionalAssignment assignment;
  std::vector<double> utilities;
  std::vector<double> prices;
  std::optional<std::vector<Rational>> exact_utilities;
  std::optional<std::vector<Rational>> exact_prices;
  double residual = 0;
  std::size_t iterations = 0;

  bool exact() const { return exact_prices.has_value(); }
};

namespace detail {

struct Market {
  std::size_t agents = 0, cells = 0;
  std::vector<std::vector<std::size_t>> wants;   // agent -> cells with positive value
  std::vector<std::vector<Rational>> worth;      // agent -> exact cell value v_ij * l_j, parallel to wants
  std::vector<std::vector<double>> weight;       // normalized worth (sums to 1 per agent)
  std::vector<std::vector<std::size_t>> buyers;  // cell -> agents desiring it
  std::vector<Rational> budgets;
  std::vector<double> shares;  // budgets normalized to sum 1
};

inline Market make_market(const RefinedPartition& part, const std::vector<Rational>& budgets) {
  Market mk;
  mk.agents = part.agents();
  mk.cells = part.cells();
  if (budgets.size() != mk.agents) throw Error(ErrorCode::InvalidArgument, "one budget per agent required");
  mk.wants.resize(mk.agents);
  mk.worth.resize(mk.agents);
  mk.weight.resize(mk.agents);
  mk.buyers.resize(mk.cells);
  Rational total_budget;
  for (const auto& b : budgets) {
    if (b <= 0) throw Error(ErrorCode::InvalidArgument, "budgets must be positive");
    total_budget += b;
  }
  for (std::size_t j = 0; j < mk.cells; ++j) {
    if (!part.desired(j)) throw Error(ErrorCode::InvalidArgument, "market cells must be desired (apply free disposal)");
    if (part.length(j) <= 0) throw Error(ErrorCode::InvalidArgument, "market cells must have positive length");
  }
  for (std::size_t i = 0; i < mk.agents; ++i) {
    Rational total;
    for (std::size_t j = 0; j < mk.cells; ++j) {
      if (part.values[j][i] <= 0) continue;
      mk.wants[i].push_back(j);
      mk.worth[i].push_back(part.values[j][i] * part.length(j));
      total += mk.worth[i].back();
      mk.buyers[j].push_back(i);
    }
    if (mk.wants[i].empty())
      throw Error(ErrorCode::DegenerateAgent, "agent " + std::to_string(i) + " desires no part of the cake");
    for (const auto& w : mk.worth[i]) mk.weight[i].push_back(to_double(w / total));
    mk.shares.push_back(to_double(budgets[i] / total_budget));
  }
  mk.budgets = budgets;
  return mk;
}

// Proportional response dynamics on bids; bids()[i][k] is agent i's spending on cell wants[i][k].
class ProportionalResponse {
 public:
  explicit ProportionalResponse(const Market& mk) : mk_(mk), bids_(mk.agents), fraction_(mk.agents), price_(mk.cells) {
    // start from the even split of every cell among its desirers
    for (std::size_t i = 0; i < mk.agents; ++i) {
      bids_[i].resize(mk.wants[i].size());
      for (auto j : mk.wants[i]) fraction_[i].push_back(1.0 / static_cast<double>(mk.buyers[j].size()));
    }
    respond();
  }

  void step() {
    for (std::size_t i = 0; i < mk_.agents; ++i)
      for (std::size_t k = 0; k < mk_.wants[i].size(); ++k) {
        const double p = price_[mk_.wants[i][k]];
        fraction_[i][k] = p > 0 ? bids_[i][k] / p : 0.0;
      }
    respond();
  }

  // Cell prices (total, not per length) in normalized money.
  const std::vector<double>& prices() const { return price_; }

  double fraction(std::size_t i, std::size_t k) const {
    const double p = price_[mk_.wants[i][k]];
    return p > 0 ? bids_[i][k] / p : 0.0;
  }

  // Budget-weighted relative bang-per-buck shortfall of each agent's spending.
  double residual() const {
    double worst = 0;
    for (std::size_t i = 0; i < mk_.agents; ++i) {
      double best = 0;
      for (std::size_t k = 0; k < mk_.wants[i].size(); ++k)
        best = std::max(best, mk_.weight[i][k] / price_[mk_.wants[i][k]]);
      double gap = 0, spent = 0;
      for (std::size_t k = 0; k < mk_.wants[i].size(); ++k) {
        const double bpb = mk_.weight[i][k] / price_[mk_.wants[i][k]];
        gap += bids_[i][k] * (1.0 - bpb / best);
        spent += bids_[i][k];
      }
      worst = std::max(worst, gap / mk_.shares[i]);
      worst = std::max(worst, std::abs(spent - mk_.shares[i]) / mk_.shares[i]);
    }
    return worst;
  }

 private:
  void respond() {
    std::fill(price_.begin(), price_.end(), 0.0);
    for (std::size_t i = 0; i < mk_.agents; ++i) {
      const auto& w = mk_.weight[i];
      auto& x = fraction_[i];
      auto& b = bids_[i];
      double u = 0;
      for (std::size_t k = 0; k < x.size(); ++k) u += w[k] * x[k];
      for (std::size_t k = 0; k < x.size(); ++k) {
        b[k] = u > 0 ? mk_.shares[i] * w[k] * x[k] / u : mk_.shares[i] / static_cast<double>(x.size());
        price_[mk_.wants[i][k]] += b[k];
      }
    }
  }

  const Market& mk_;
  std::vector<std::vector<double>> bids_, fraction_;
  std::vector<double> price_;
};

struct ExactEquilibrium {
  std::vector<Rational> cell_prices;            // total price per cell, in budget units
  std::vector<std::vector<Rational>> fraction;  // [cell][agent]
};

// Guesses which (agent, cell) pairs are tight from approximate prices and
// solves for the equilibrium on that support exactly. Returns nullopt when the
// guess is not an equilibrium support.
inline std::optional<ExactEquilibrium> recover_exact(const Market& mk, const std::vector<double>& approx_prices,
                                                     double tau) {
  const std::size_t n = mk.agents, m = mk.cells;
  std::vector<std::vector<std::size_t>> edges(n);  // indices into wants[i]
  for (std::size_t i = 0; i < n; ++i) {
    double best = 0;
    for (std::size_t k = 0; k < mk.wants[i].size(); ++k)
      best = std::max(best, mk.weight[i][k] / approx_prices[mk.wants[i][k]]);
    for (std::size_t k = 0; k < mk.wants[i].size(); ++k)
      if (mk.weight[i][k] / approx_prices[mk.wants[i][k]] >= best * (1.0 - tau)) edges[i].push_back(k);
  }
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> cell_edges(m);  // cell -> (agent, k)
  for (std::size_t i = 0; i < n; ++i)
    for (auto k : edges[i]) cell_edges[mk.wants[i][k]].push_back({i, k});

  // per component: price ratios along edges from worth_ij = alpha_i * price_j
  std::vector<std::optional<Rational>> price(m), alpha(n);
  for (std::size_t root = 0; root < m; ++root) {
    if (price[root]) continue;
    if (cell_edges[root].empty()) return std::nullopt;
    price[root] = Rational(1);
    std::vector<std::size_t> agents_here, cells_here{root};
    std::queue<std::pair<bool, std::size_t>> queue;  // (is_cell, index)
    queue.push({true, root});
    while (!queue.empty()) {
      auto [is_cell, u] = queue.front();
      queue.pop();
      if (is_cell) {
        for (auto [i, k] : cell_edges[u]) {
          Rational a = mk.worth[i][k] / *price[u];
          if (alpha[i]) {
            if (*alpha[i] != a) return std::nullopt;
            continue;
          }
          alpha[i] = a;
          agents_here.push_back(i);
          queue.push({false, i});
        }
      } else {
        for (auto k : edges[u]) {
          const auto j = mk.wants[u][k];
          Rational p = mk.worth[u][k] / *alpha[u];
          if (price[j]) {
            if (*price[j] != p) return std::nullopt;
            continue;
          }
          price[j] = p;
          cells_here.push_back(j);
          queue.push({true, j});
        }
      }
    }
    Rational money, value;
    for (auto i : agents_here) money += mk.budgets[i];
    for (auto j : cells_here) value += *price[j];
    const Rational scale = money / value;
    for (auto j : cells_here) *price[j] *= scale;
    for (auto i : agents_here) *alpha[i] /= scale;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!alpha[i]) return std::nullopt;  // agent with no tight cell cannot spend

  // nobody may prefer a cell outside their support
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < mk.wants[i].size(); ++k)
      if (mk.worth[i][k] > *alpha[i] * *price[mk.wants[i][k]]) return std::nullopt;

  // spend every budget on tight cells so that every cell is sold exactly
  BipartiteNetwork net;
  net.left_caps = mk.budgets;
  net.arcs.resize(n);
  for (std::size_t j = 0; j < m; ++j) net.right_caps.push_back(*price[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (auto k : edges[i]) net.arcs[i].push_back(mk.wants[i][k]);
  auto flow = max_flow(net);
  Rational total;
  for (const auto& b : mk.budgets) total += b;
  if (flow.value != total) return std::nullopt;

  ExactEquilibrium out;
  out.fraction.assign(m, std::vector<Rational>(n));
  for (std::size_t j = 0; j < m; ++j) out.cell_prices.push_back(*price[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < net.arcs[i].size(); ++a) {
      const auto j = net.arcs[i][a];
      out.fraction[j][i] = flow.flow[i][a] / *price[j];
    }
  return out;
}

}  // namespace detail

/// Equilibrium on a partition whose cells are all desired. Iterative mode runs
/// proportional response dynamics until the residual is at most the
/// tolerance; exact mode additionally reads the tight support off the
/// approximate prices and solves for the rational equilibrium on it.
inline EquilibriumResult solve_equilibrium(const RefinedPartition& part, const std::vector<Rational>& budgets,
                                           const MeaOptions& options = {}) {
  if (!(options.tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto mk = detail::make_market(part, budgets);
  const std::size_t n = mk.agents, m = mk.cells;
  detail::ProportionalResponse prd(mk);
  Rational total_budget;
  for (const auto& b : budgets) total_budget += b;
  const double money = to_double(total_budget);

  EquilibriumResult out;
  out.assignment = FractionalAssignment::zeros(part);

  if (options.exact) {
    std::size_t done = 0, next_try = 64;
    while (done <= options.max_iterations) {
      for (; done < next_try; ++done) prd.step();
      for (double tau : {1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10}) {
        auto eq = detail::recover_exact(mk, prd.prices(), tau);
        if (!eq) continue;
        out.iterations = done;
        out.exact_prices.emplace();
        for (std::size_t j = 0; j < m; ++j) {
          out.exact_prices->push_back(eq->cell_prices[j] / part.length(j));
          out.prices.push_back(to_double(out.exact_prices->back()));
        }
        out.assignment.share = std::move(eq->fraction);
        out.exact_utilities = out.assignment.utilities();
        for (const auto& u : *out.exact_utilities) out.utilities.push_back(to_double(u));
        out.residual = 0;
        return out;
      }
      next_try *= 2;
    }
    throw Error(ErrorCode::NoConvergence,
                "no exact equilibrium support identified within " + std::to_string(options.max_iterations) + " iterations");
  }

  std::size_t done = 0;
  for (; prd.residual() > options.tolerance; ++done) {
    if (done >= options.max_iterations)
      throw Error(ErrorCode::NoConvergence, "residual " + to_decimal(prd.residual(), 3) + " after " +
                                                std::to_string(done) + " iterations");
    prd.step();
  }
  out.iterations = done;
  out.residual = prd.residual();

  // shares as exact dyadic rationals; the last desirer of a cell takes the remainder
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < mk.wants[i].size(); ++k)
      out.assignment.share[mk.wants[i][k]][i] = from_double(prd.fraction(i, k));
  for (std::size_t j = 0; j < m; ++j) {
    const auto& who = mk.buyers[j];
    Rational rest(1);
    for (std::size_t t = 0; t + 1 < who.size(); ++t) {
      auto& s = out.assignment.share[j][who[t]];
      if (s > rest) s = rest;
      rest -= s;
    }
    out.assignment.share[j][who.back()] = rest;
  }
  for (std::size_t j = 0; j < m; ++j) out.prices.push_back(prd.prices()[j] * money / to_double(part.length(j)));
  for (const auto& u : out.assignment.utilities()) out.utilities.push_back(to_double(u));
  return out;
}

struct MeaOutcome {
  Solution solution;
  EquilibriumResult equilibrium;  // utilities and prices in original units
};

inline MeaOutcome mea_solution(const Profile& profile, const MeaOptions& options = {}) {
  auto disposal = prepare(profile);
  auto eq = solve_equilibrium(disposal.partition, profile.claims(), options);
  const auto& kept = disposal.origin.kept();
  const double kept_d = to_double(kept);
  for (auto& u : eq.utilities) u *= kept_d;
  for (auto& p : eq.prices) p /= kept_d;
  if (eq.exact()) {
    for (auto& u : *eq.exact_utilities) u *= kept;
    for (auto& p : *eq.exact_prices) p /= kept;
  }
  Solution sol{eq.assignment, disposal.origin, profile.names()};
  return {std::move(sol), std::move(eq)};
}

/// Nash-welfare (claims-weighted) allocation with its equilibrium certificate.
inline std::pair<Allocation, EquilibriumResult> run_mea(const Profile& profile, const MeaOptions& options = {}) {
  auto outcome = mea_solution(profile, options);
  return {outcome.solution.allocation(), std::move(outcome.equilibrium)};
}

}  // namespace fairslice

#include "support.hpp"

#include <array>
#include <cmath>

#include "fairslice/ccea.hpp"
#include "fairslice/mea.hpp"
#include "fairslice/pareto.hpp"
#include "fairslice/profiles.hpp"

using namespace fairslice;
using testing::R;
using testing::rationals;

namespace {

// Exact KKT check: budgets spent exactly, cells cleared, purchases only at maximum bang per buck.
void check_certificate(const RefinedPartition& part, const std::vector<Rational>& budgets, const EquilibriumResult& eq) {
  REQUIRE(eq.exact());
  const auto& p = *eq.exact_prices;
  for (std::size_t j = 0; j < part.cells(); ++j) {
    CHECK(p[j] > 0);
    Rational sold;
    for (std::size_t i = 0; i < part.agents(); ++i) sold += eq.assignment.share[j][i];
    CHECK(sold == 1);
  }
  for (std::size_t i = 0; i < part.agents(); ++i) {
    Rational spent, best;
    for (std::size_t j = 0; j < part.cells(); ++j) {
      spent += p[j] * part.length(j) * eq.assignment.share[j][i];
      best = std::max(best, part.values[j][i] / p[j]);
    }
    CHECK(spent == budgets[i]);
    for (std::size_t j = 0; j < part.cells(); ++j)
      if (eq.assignment.share[j][i] > 0) CHECK(part.values[j][i] / p[j] == best);
  }
}

double weighted_log_nash(const std::vector<double>& u, const std::vector<Rational>& claims) {
  double s = 0;
  for (std::size_t i = 0; i < u.size(); ++i) s += to_double(claims[i]) * std::log(u[i]);
  return s;
}

// Two agents, at most two contested cells: grid over agent 1's fraction of each contested cell.
double grid_best_log_nash(const RefinedPartition& part, const std::vector<Rational>& claims, int resolution) {
  std::vector<std::size_t> contested;
  std::vector<double> base(2, 0.0);
  for (std::size_t j = 0; j < part.cells(); ++j) {
    auto who = part.desirers(j);
    if (who.size() == 2) contested.push_back(j);
    else if (who.size() == 1) base[who[0]] += to_double(part.values[j][who[0]] * part.length(j));
  }
  REQUIRE(contested.size() <= 2);
  std::vector<std::array<double, 2>> worth;
  for (auto j : contested)
    worth.push_back({to_double(part.values[j][0] * part.length(j)), to_double(part.values[j][1] * part.length(j))});
  double best = -INFINITY;
  const int outer = contested.size() >= 1 ? resolution : 0;
  const int inner = contested.size() >= 2 ? resolution : 0;
  const double c0 = to_double(claims[0]), c1 = to_double(claims[1]);
  for (int a = 0; a <= outer; ++a) {
    double fa = static_cast<double>(a) / resolution;
    double u0 = base[0], u1 = base[1];
    if (!worth.empty()) {
      u0 += fa * worth[0][0];
      u1 += (1 - fa) * worth[0][1];
    }
    for (int b = 0; b <= inner; ++b) {
      double v0 = u0, v1 = u1;
      if (worth.size() > 1) {
        double fb = static_cast<double>(b) / resolution;
        v0 += fb * worth[1][0];
        v1 += (1 - fb) * worth[1][1];
      }
      if (v0 <= 0 || v1 <= 0) continue;
      best = std::max(best, c0 * std::log(v0) + c1 * std::log(v1));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("mea: fig1 profile, exact equilibrium") {
  // oracle first: max log(1 + 2t) + log(2.1 - 3t) over t in [0, 0.5] on a 1e-4 grid peaks at t = 0.1
  double best_t = 0, best = -INFINITY;
  for (int k = 0; k <= 5000; ++k) {
    double t = k * 1e-4;
    double f = std::log(1 + 2 * t) + std::log(2.1 - 3 * t);
    if (f > best) {
      best = f;
      best_t = t;
    }
  }
  CHECK(std::abs(best_t - 0.1) < 1e-9);

  auto outcome = mea_solution(profiles::fig1(), {.exact = true});
  const auto& eq = outcome.equilibrium;
  REQUIRE(eq.exact());
  CHECK(*eq.exact_utilities == rationals({"6/5", "9/5"}));
  CHECK(*eq.exact_prices == rationals({"25/3", "5/3", "5/3"}));
  CHECK(eq.residual == 0);
  CHECK(outcome.solution.utilities() == rationals({"6/5", "9/5"}));
  CHECK(eq.assignment.share[0] == rationals({"1", "0"}));
  CHECK(eq.assignment.share[1] == rationals({"0", "1"}));
  CHECK(eq.assignment.share[2] == rationals({"1/5", "4/5"}));

  auto d = prepare(profiles::fig1());
  auto rescaled = solve_equilibrium(d.partition, rationals({"1", "1"}), {.exact = true});
  check_certificate(d.partition, rationals({"1", "1"}), rescaled);

  // strictly larger Nash product than CCEA
  auto ccea = ccea_solution(profiles::fig1()).utilities();
  CHECK(ccea[0] * ccea[1] == R("1.92"));
  CHECK((*eq.exact_utilities)[0] * (*eq.exact_utilities)[1] == R("2.16"));
}

TEST_CASE("mea: fig1 profile, iterative mode") {
  auto outcome = mea_solution(profiles::fig1());
  const auto& eq = outcome.equilibrium;
  CHECK_FALSE(eq.exact());
  CHECK(eq.residual <= 1e-9);
  CHECK(std::abs(eq.utilities[0] - 1.2) < 1e-6);
  CHECK(std::abs(eq.utilities[1] - 1.8) < 1e-6);
  CHECK(std::abs(eq.prices[0] - 25.0 / 3) < 1e-6);
  CHECK(std::abs(eq.prices[1] - 5.0 / 3) < 1e-6);
  CHECK(std::abs(eq.prices[2] - 5.0 / 3) < 1e-6);
  for (const auto& row : eq.assignment.share) {
    Rational sum;
    for (const auto& s : row) sum += s;
    CHECK(sum == 1);
  }
}

TEST_CASE("mea: trivial instances") {
  auto single = profiles::make({{"a", profiles::density({"0", "1/4", "3/4", "1"}, {"2", "0", "1"})}});
  auto one = mea_solution(single, {.exact = true});
  CHECK(*one.equilibrium.exact_utilities == rationals({"3/4"}));
  auto d = prepare(single);
  Rational spent;
  for (std::size_t j = 0; j < d.partition.cells(); ++j) {
    CHECK(one.equilibrium.assignment.share[j][0] == 1);
    spent += (*one.equilibrium.exact_prices)[j] * d.partition.length(j) * d.origin.kept();
  }
  CHECK(spent == 1);

  auto twins = mea_solution(profiles::identical_uniform(2), {.exact = true});
  CHECK(twins.equilibrium.assignment.share[0] == rationals({"1/2", "1/2"}));
  CHECK(*twins.equilibrium.exact_utilities == rationals({"1/2", "1/2"}));

  auto overlap = mea_solution(profiles::overlapping_uniform(), {.exact = true});
  CHECK(*overlap.equilibrium.exact_utilities == rationals({"0.4", "0.6"}));
}

TEST_CASE("mea: thm5 instance does not split the left half evenly") {
  auto outcome = mea_solution(profiles::thm5(), {.exact = true});
  const auto& share = outcome.equilibrium.assignment.share;
  auto part = outcome.equilibrium.assignment.partition;
  bool uneven = false;
  for (std::size_t i = 0; i < 2; ++i) uneven = uneven || share[0][i] * part.length(0) != R("1/4");
  CHECK(uneven);
  CHECK_FALSE(pareto_improvement(outcome.equilibrium.assignment));
}

TEST_CASE("mea: errors") {
  RefinedPartition part{rationals({"0", "1"}), {{Rational(1), Rational(0)}}};
  CHECK_THROWS_AS(solve_equilibrium(part, rationals({"1", "1"})), Error);
  try {
    solve_equilibrium(part, rationals({"1", "1"}));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateAgent);
  }
  auto d = prepare(profiles::fig1());
  try {
    solve_equilibrium(d.partition, rationals({"1", "1"}), {.tolerance = 1e-15, .max_iterations = 3});
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("mea: exact certificates, Pareto optimality and envy-freeness on random profiles") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(3);
    auto profile = testing::random_profile(rng, n, 4, 4, trial % 2 == 0, 12, trial % 3 == 0);
    auto d = prepare(profile);
    auto eq = solve_equilibrium(d.partition, profile.claims(), {.exact = true});
    check_certificate(d.partition, profile.claims(), eq);
    CHECK_FALSE(pareto_improvement(eq.assignment));
    // claims-weighted envy-freeness: c_k u_i >= c_i V_i(X_k)
    const auto& a = eq.assignment;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        Rational other;
        for (std::size_t j = 0; j < a.partition.cells(); ++j)
          other += a.share[j][k] * a.partition.length(j) * a.partition.values[j][i];
        CHECK(profile[k].claim * a.utility(i) >= profile[i].claim * other);
      }
    // utilities converge like the square root of the residual on degenerate markets
    auto approx = solve_equilibrium(d.partition, profile.claims(), {.tolerance = 1e-13});
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(approx.utilities[i] - eq.utilities[i]) < 1e-6);
  }
}

TEST_CASE("mea: scaling one agent's density leaves the exact assignment unchanged") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto profile = testing::random_profile(rng, 2 + rng.below(2), 4, 4, false, 12);
    auto base = mea_solution(profile, {.exact = true});
    const std::size_t who = rng.below(profile.size());
    auto density = profile[who].density;
    std::vector<Rational> scaled;
    for (const auto& v : density.values()) scaled.push_back(v * R("7/3"));
    auto other = mea_solution(profile.with_density(who, PiecewiseDensity(density.breakpoints(), scaled)), {.exact = true});
    CHECK(other.equilibrium.assignment.share == base.equilibrium.assignment.share);
    CHECK(*other.equilibrium.exact_prices == *base.equilibrium.exact_prices);
  }
}

TEST_CASE("mea: Nash product is not beaten by a grid search on two-agent instances") {
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 25; ++trial) {
    auto profile = testing::random_profile(rng, 2, 3, 4, false, 6, trial % 2 == 0);
    auto part = refine(profile);
    std::size_t contested = 0;
    for (std::size_t j = 0; j < part.cells(); ++j) contested += part.desirers(j).size() == 2;
    if (contested > 2) continue;
    ++checked;
    auto outcome = mea_solution(profile, {.exact = true});
    double solver = weighted_log_nash(outcome.equilibrium.utilities, profile.claims());
    CHECK(grid_best_log_nash(part, profile.claims(), 1000) <= solver + 1e-6);
  }
  CHECK(checked == 25);
}

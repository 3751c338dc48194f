#include "support.hpp"
#include "oracles.hpp"

#include <cmath>

#include "fairslice/ccea.hpp"
#include "fairslice/csd.hpp"
#include "fairslice/fairness.hpp"
#include "fairslice/mea.hpp"
#include "fairslice/profiles.hpp"

using namespace fairslice;
using testing::piece;
using testing::R;
using testing::rationals;
using oracles::random_allocation;
using oracles::weights_find_violation;

namespace {

PropertyReport check(Property p, const Profile& profile, const Allocation& alloc) {
  return check_all(profile, alloc, {}, std::span<const Property>(&p, 1)).front();
}

Allocation allocation_of(const Profile& profile, std::vector<Piece> pieces, Piece waste = {}) {
  return {profile.names(), std::move(pieces), std::move(waste), Coordinates::Original, std::nullopt};
}

void expect_lattice(const Profile& profile, const Allocation& alloc) {
  AllocationView view(profile, alloc);
  std::vector<PropertyReport> reports;
  for (auto p : kAllProperties) reports.push_back(check_property(p, view));
  auto broken = lattice_violations(view, reports);
  CHECK(broken.empty());
  for (const auto& r : reports)
    if (r.failed()) CHECK(replay(profile, alloc, r));
}

}  // namespace

TEST_CASE("fairness: envy-freeness") {
  auto fig = profiles::fig1();
  CHECK(check(Property::EF, fig, run_ccea(fig)).passed());

  auto p16 = profiles::prop16();
  auto csd = run_csd(p16).solution.allocation();
  auto ef = check(Property::EF, p16, csd);
  REQUIRE(ef.failed());
  auto w = std::get<EnvyWitness>(ef.witness);
  CHECK(w.agent == 0);
  CHECK(w.other == 2);
  CHECK(w.lhs == R("1/3"));
  CHECK(w.rhs == R("5/12"));
  CHECK(replay(p16, csd, ef));

  auto single = profiles::identical_uniform(1);
  CHECK(check(Property::EF, single, run_ccea(single)).passed());

  // claims weight the comparison: with claims 2:1 a 2:1 split of a uniform cake is envy-free
  Profile weighted({{"a", PiecewiseDensity::uniform(), Rational(2)}, {"b", PiecewiseDensity::uniform(), Rational(1)}});
  auto split = allocation_of(weighted, {piece({{"0", "2/3"}}), piece({{"2/3", "1"}})});
  CHECK(check(Property::EF, weighted, split).passed());
  auto even = allocation_of(weighted, {piece({{"0", "1/2"}}), piece({{"1/2", "1"}})});
  auto envious = check(Property::EF, weighted, even);
  REQUIRE(envious.failed());
  CHECK(std::get<EnvyWitness>(envious.witness).agent == 0);
  CHECK(replay(weighted, even, envious));
}

TEST_CASE("fairness: proportionality") {
  auto fig = profiles::fig1();
  auto ccea = run_ccea(fig);
  CHECK(check(Property::PROP, fig, ccea).passed());
  // thresholds are half of the total values 2 and 2.1
  CHECK(fig[0].density.total() == 2);
  CHECK(fig[1].density.total() == R("2.1"));
  CHECK(AllocationView(fig, ccea).utilities() == rationals({"1.6", "1.2"}));
  CHECK(check(Property::PROP, fig, run_csd(fig).solution.allocation()).passed());
  auto empty = allocation_of(fig, {{}, {}}, piece({{"0", "1"}}));
  auto report = check(Property::PROP, fig, empty);
  REQUIRE(report.failed());
  CHECK(replay(fig, empty, report));
  auto nothing = allocation_of(fig, {{}, {}});
  CHECK(check(Property::PROP, fig, nothing).failed());
}

TEST_CASE("fairness: robust envy-freeness and proportionality") {
  auto fig = profiles::fig1();
  CHECK(check(Property::RobustEF, fig, run_ccea(fig)).passed());

  auto mea = mea_solution(fig, {.exact = true}).solution.allocation();
  auto rprop = check(Property::RobustPROP, fig, mea);
  REQUIRE(rprop.failed());
  auto w = std::get<PrefixWitness>(rprop.witness);
  CHECK(w.agent == 0);
  CHECK_FALSE(w.other);
  CHECK(w.prefix == 1);
  CHECK(w.weights.size() == 2);
  CHECK(w.weights[0] > w.weights[1]);
  CHECK(w.weights[1] > 0);
  CHECK(replay(fig, mea, rprop));
  CHECK(AllocationView(fig, mea).class_lengths(0, 0) == rationals({"1/10", "1/10"}));
  CHECK(check(Property::PROP, fig, mea).passed());

  // half of every cell to each agent: equality throughout
  auto part = refine(fig);
  auto half = FractionalAssignment::zeros(part);
  for (auto& row : half.share) row = rationals({"1/2", "1/2"});
  auto even = materialize(half, ContiguousLayout{}, fig.names());
  CHECK(check(Property::RobustEF, fig, even).passed());
  CHECK(check(Property::RobustPROP, fig, even).passed());
}

TEST_CASE("fairness: Pareto optimality") {
  auto fig = profiles::fig1();
  CHECK(check(Property::PO, fig, mea_solution(fig, {.exact = true}).solution.allocation()).passed());

  // J4 is the only contested cell: agent 1 holding a fraction x of it gives (1 + x, 0.6 + 1.5 (1 - x)),
  // a line through (1.6, 1.2), so nothing dominates the eating outcome
  CHECK(R("1.2") == R("0.6") + R("1.5") * (1 - (R("1.6") - 1)));
  CHECK(check(Property::PO, fig, run_ccea(fig)).passed());

  auto single = profiles::make({{"a", profiles::density({"0", "1/4", "1"}, {"0", "3"})}});
  CHECK(check(Property::PO, single, allocation_of(single, {piece({{"1/4", "1"}})}, piece({{"0", "1/4"}}))).passed());

  auto t5 = profiles::thm5();
  auto uniform = allocation_of(t5, {piece({{"0", "1/4"}, {"1/2", "3/4"}}), piece({{"1/4", "1/2"}, {"3/4", "1"}})});
  auto po = check(Property::PO, t5, uniform);
  REQUIRE(po.failed());
  CHECK(replay(t5, uniform, po));
}

TEST_CASE("fairness: non-wastefulness") {
  auto fig = profiles::fig1();
  CHECK(check(Property::NonWasteful, fig, run_ccea(fig)).passed());

  auto leaves_j3 = allocation_of(fig, {piece({{"0", "3/10"}, {"1/2", "1"}}), {}}, piece({{"3/10", "1/2"}}));
  auto report = check(Property::NonWasteful, fig, leaves_j3);
  REQUIRE(report.failed());
  auto w = std::get<WasteWitness>(report.witness);
  CHECK(w.where == Interval{R("3/10"), R("1/2")});
  CHECK_FALSE(w.holder);
  CHECK(replay(fig, leaves_j3, report));

  auto misplaced = allocation_of(fig, {piece({{"0", "1/2"}, {"4/5", "1"}}), piece({{"1/2", "4/5"}})});
  auto bad = check(Property::NonWasteful, fig, misplaced);
  REQUIRE(bad.failed());
  CHECK(std::get<WasteWitness>(bad.witness).holder == std::optional<std::size_t>(0));
  CHECK(replay(fig, misplaced, bad));
}

TEST_CASE("fairness: symmetry and unanimity") {
  auto twins = profiles::identical_uniform(3);
  auto csd = run_csd(twins).solution.allocation();
  CHECK(check(Property::Symmetry, twins, csd).passed());
  auto lopsided = allocation_of(twins, {piece({{"0", "1/2"}}), piece({{"1/2", "3/4"}}), piece({{"3/4", "1"}})});
  auto sym = check(Property::Symmetry, twins, lopsided);
  REQUIRE(sym.failed());
  CHECK(replay(twins, lopsided, sym));
  CHECK(check(Property::Symmetry, profiles::fig1(), run_ccea(profiles::fig1())).verdict ==
        Verdict::NotApplicable);

  auto blocks = profiles::make({{"a1", profiles::density({"0", "1/3", "1"}, {"1", "0"})},
                                {"a2", profiles::density({"0", "1/3", "2/3", "1"}, {"0", "2", "0"})},
                                {"a3", profiles::density({"0", "2/3", "1"}, {"0", "5"})}});
  CHECK(check(Property::Unanimity, blocks, run_csd(blocks).solution.allocation()).passed());
  auto rotated = allocation_of(blocks, {piece({{"1/3", "2/3"}}), piece({{"2/3", "1"}}), piece({{"0", "1/3"}})});
  auto un = check(Property::Unanimity, blocks, rotated);
  REQUIRE(un.failed());
  CHECK(replay(blocks, rotated, un));

  auto fig = profiles::fig1();
  CHECK(check(Property::Unanimity, fig, run_csd(fig).solution.allocation()).verdict == Verdict::NotApplicable);
  // a favourite that is not unique: uniform agents tie everywhere
  CHECK(check(Property::Unanimity, twins, csd).verdict == Verdict::NotApplicable);
}

TEST_CASE("fairness: unique favourite pieces") {
  auto d = profiles::density({"0", "1/10", "1/2", "1"}, {"10", "0", "2"});
  CHECK(unique_favourite(d, R("1/10")) == piece({{"0", "1/10"}}));
  CHECK(unique_favourite(d, R("3/5")) == piece({{"0", "1/10"}, {"1/2", "1"}}));
  CHECK(unique_favourite(d, R("1")) == piece({{"0", "1/10"}, {"1/2", "1"}}));
  CHECK_FALSE(unique_favourite(d, R("1/2")));
}

TEST_CASE("fairness: invalid allocations are rejected") {
  auto fig = profiles::fig1();
  auto overlap = allocation_of(fig, {piece({{"0", "1/2"}}), piece({{"2/5", "1"}})});
  CHECK_THROWS_AS(AllocationView(fig, overlap), Error);
  Allocation missing{{"a1"}, {piece({{"0", "1"}})}, {}, Coordinates::Original, std::nullopt};
  CHECK_THROWS_AS(AllocationView(fig, missing), Error);
  Allocation stranger{{"a1", "zz"}, {{}, {}}, {}, Coordinates::Original, std::nullopt};
  CHECK_THROWS_AS(AllocationView(fig, stranger), Error);
}

TEST_CASE("fairness: prefix dominance agrees with random ordinally equivalent weights") {
  Rng rng(99);
  int failures_seen = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(3);
    auto profile = testing::random_profile(rng, n, 6, 5, false, 12, trial % 4 == 0);
    Allocation alloc = trial % 3 == 0 ? run_ccea(profile)
                       : trial % 3 == 1 ? random_allocation(rng, profile)
                                        : mea_solution(profile, {.exact = true}).solution.allocation();
    AllocationView view(profile, alloc);
    for (std::size_t i = 0; i < n; ++i) {
      auto own = view.class_lengths(i, i);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        auto w = detail::prefix_violation(i, k, own, view.class_lengths(i, k), profile[i].claim / profile[k].claim,
                                          Rational(0));
        CHECK(static_cast<bool>(w) == weights_find_violation(rng, profile, alloc, k, i, 1000));
        failures_seen += static_cast<bool>(w);
      }
      auto p = detail::prefix_violation(i, std::nullopt, own, view.class_lengths(i, std::nullopt),
                                        profile[i].claim / detail::total_claims(profile), Rational(0));
      CHECK(static_cast<bool>(p) == weights_find_violation(rng, profile, alloc, std::nullopt, i, 1000));
      failures_seen += static_cast<bool>(p);
    }
  }
  CHECK(failures_seen > 50);
}

TEST_CASE("fairness: implication lattice and witness replay across mechanisms") {
  Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    auto profile = testing::random_profile(rng, n, 5, 4, trial % 2 == 0, 12, trial % 5 == 0);
    expect_lattice(profile, run_ccea(profile));
    expect_lattice(profile, mea_solution(profile, {.exact = true}).solution.allocation());
    expect_lattice(profile, run_csd(profile).solution.allocation());
    expect_lattice(profile, run_cmsd(profile, static_cast<std::uint64_t>(trial)));
    expect_lattice(profile, random_allocation(rng, profile));
  }
}

TEST_CASE("fairness: mechanism guarantees on random profiles") {
  Rng rng(555);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    auto profile = testing::random_profile(rng, n, 6, 5, false, 12);
    auto ccea = check_all(profile, run_ccea(profile));
    CHECK(ccea[static_cast<int>(Property::RobustEF)].passed());
    CHECK(ccea[static_cast<int>(Property::NonWasteful)].passed());
    auto csd = check_all(profile, run_csd(profile).solution.allocation());
    CHECK(csd[static_cast<int>(Property::RobustPROP)].passed());
    CHECK(csd[static_cast<int>(Property::Symmetry)].verdict != Verdict::Fail);
    auto mea = check_all(profile, mea_solution(profile, {.exact = true}).solution.allocation());
    CHECK(mea[static_cast<int>(Property::PO)].passed());
    CHECK(mea[static_cast<int>(Property::EF)].passed());
    CHECK(mea[static_cast<int>(Property::PROP)].passed());
  }
}

TEST_CASE("fairness: slack absorbs iterative-solver error") {
  auto fig = profiles::fig1();
  auto approx = mea_solution(fig).solution.allocation();
  auto strict = check_all(fig, approx);
  auto loose = check_all(fig, approx, {.slack = R("1/1000000")});
  CHECK(loose[static_cast<int>(Property::PO)].passed());
  CHECK(loose[static_cast<int>(Property::EF)].passed());
  CHECK(strict[static_cast<int>(Property::NonWasteful)].passed());
}

TEST_CASE("fairness: property names round-trip") {
  for (auto p : kAllProperties) CHECK(parse_property(to_string(p)) == p);
  CHECK_THROWS_AS(parse_property("fast"), Error);
}

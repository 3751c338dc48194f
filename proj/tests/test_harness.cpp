#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "fairslice/fixtures.hpp"
#include "fairslice/harness.hpp"
#include "fairslice/profiles.hpp"

using namespace fairslice;
using testing::R;
using testing::rationals;

namespace {

std::vector<Rational> exact_utilities(const json& doc) {
  std::vector<Rational> out;
  for (const auto& u : doc.at("utilities")) out.push_back(R(u.at("exact").get<std::string>().c_str()));
  return out;
}

std::string fixture_dir() { return std::string(FAIRSLICE_SOURCE_DIR) + "/fixtures"; }

}  // namespace

TEST_CASE("generator: seeded determinism") {
  GeneratorOptions options{.agents = 2, .max_blocks = 3, .seed = 7};
  CHECK(io::profile_to_json(generate_profile(options)) == io::profile_to_json(generate_profile(options)));
  options.seed = 8;
  auto other = generate_profile(options);
  options.seed = 7;
  CHECK(io::profile_to_json(other) != io::profile_to_json(generate_profile(options)));
}

TEST_CASE("generator: value ladder and 1/24 lattice") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto p = generate_profile({.agents = 3, .max_blocks = 6, .ladder = 4, .seed = seed});
    REQUIRE(p.size() == 3);
    for (const auto& a : p.agents()) {
      CHECK(a.density.total() > 0);
      CHECK(a.density.segments() <= 6);
      for (const auto& v : a.density.values()) {
        CHECK(v >= 0);
        CHECK(v <= 4);
        CHECK(denominator(v) == 1);
      }
      for (const auto& b : a.density.breakpoints()) CHECK(denominator(b * 24) == 1);
      CHECK(a.claim == 1);
    }
  }
}

TEST_CASE("generator: piecewise uniform densities use one level") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    auto p = generate_profile({.agents = 4, .max_blocks = 6, .ladder = 5, .pw_uniform = true, .seed = seed});
    for (const auto& a : p.agents()) {
      std::set<Rational> positive;
      for (const auto& v : a.density.values())
        if (v > 0) positive.insert(v);
      CHECK(positive.size() == 1);
    }
  }
}

TEST_CASE("generator: claims and argument errors") {
  auto p = generate_profile({.agents = 5, .random_claims = true, .seed = 3});
  for (const auto& a : p.agents()) CHECK(a.claim > 0);
  CHECK_THROWS_AS(generate_profile({.agents = 0}), Error);
  CHECK_THROWS_AS(generate_profile({.max_blocks = 0}), Error);
  CHECK_THROWS_AS(generate_profile({.ladder = 0}), Error);
  // more blocks than lattice cells still yields a valid density
  auto fine = generate_profile({.agents = 1, .max_blocks = 50, .grid = 4, .seed = 2});
  CHECK(fine[0].density.segments() <= 4);
}

TEST_CASE("run report: eating on the fig1 profile") {
  auto rep = run_report(profiles::fig1(), {.algorithm = "ccea"});
  const auto& doc = rep.document;
  CHECK(exact_utilities(doc) == rationals({"8/5", "6/5"}));
  CHECK(doc["utilities"][0]["decimal"] == "1.6");
  CHECK(doc["utilities"][1]["agent"] == "a2");
  CHECK(doc["nash_product"]["exact"] == "48/25");
  CHECK(doc["nash_product"]["decimal"] == "1.92");
  CHECK(doc["properties"]["r-ef"]["verdict"] == "pass");
  CHECK(doc["properties"]["non-wasteful"]["verdict"] == "pass");
  CHECK(doc["properties"].size() == std::size(kAllProperties));
  CHECK(doc["allocation"]["coordinates"] == "original");
  CHECK(io::allocation_from_json(doc, profiles::fig1()).pieces == rep.result.allocation.pieces);
}

TEST_CASE("run report: market equilibrium extras") {
  auto exact = run_report(profiles::fig1(), {.algorithm = "mea", .exact = true}).document;
  CHECK(exact_utilities(exact) == rationals({"6/5", "9/5"}));
  CHECK(exact["equilibrium"]["exact"] == true);
  CHECK(exact["equilibrium"]["residual"] == 0.0);
  std::vector<std::string> prices;
  for (const auto& p : exact["equilibrium"]["prices"]) prices.push_back(p["exact"]);
  CHECK(prices == std::vector<std::string>{"25/3", "5/3", "5/3"});
  CHECK_FALSE(exact.contains("slack"));

  auto iterative = run_report(profiles::fig1(), {.algorithm = "mea"});
  CHECK(iterative.document["equilibrium"]["exact"] == false);
  CHECK(iterative.document.contains("slack"));
  auto u = iterative.result.utilities;
  CHECK(std::abs(to_double(u[0]) - 1.2) < 1e-6);
  CHECK(std::abs(to_double(u[1]) - 1.8) < 1e-6);
  CHECK(iterative.document["properties"]["po"]["verdict"] == "pass");
}

TEST_CASE("run report: serial dictatorship variants") {
  auto fig = profiles::fig1();
  CHECK(run_algorithm(fig, {.algorithm = "csd"}).utilities == rationals({"8/5", "6/5"}));
  auto fixed = run_algorithm(fig, {.algorithm = "crsd", .permutation = std::vector<std::size_t>{1, 0},
                                   .free_disposal = false});
  CHECK(fixed.utilities == rationals({"7/5", "3/2"}));
  CHECK(fixed.extras["csd"]["permutation"] == json::array({1, 0}));
  auto drawn = run_algorithm(fig, {.algorithm = "crsd", .seed = 9});
  CHECK(drawn.extras["csd"]["permutation"].size() == 2);
  CHECK(run_algorithm(fig, {.algorithm = "crsd", .seed = 9}).utilities == drawn.utilities);
  auto sampled = run_algorithm(fig, {.algorithm = "crsd", .seed = 3, .samples = 50, .free_disposal = false});
  CHECK(sampled.extras["csd"]["exact"] == false);
  CHECK(sampled.extras["csd"]["permutations"] == 50);
  auto cmsd = run_algorithm(fig, {.algorithm = "cmsd", .seed = 42});
  CHECK(cmsd.extras["csd"]["seed"] == 42);
  CHECK(testing::tiles_unit_interval(cmsd.allocation));
  auto rescaled = run_report(fig, {.algorithm = "csd", .rescaled = true}).document;
  CHECK(rescaled["allocation"]["coordinates"] == "rescaled");
  CHECK_THROWS_AS(run_algorithm(fig, {.algorithm = "lottery"}), Error);
  CHECK_THROWS_AS(run_algorithm(fig, {.algorithm = "crsd", .permutation = std::vector<std::size_t>{0, 0}}), Error);
}

TEST_CASE("run report: selected properties and witnesses") {
  auto rep = run_report(profiles::prop16(), {.algorithm = "csd", .properties = {Property::EF, Property::RobustPROP}});
  const auto& props = rep.document["properties"];
  CHECK(props.size() == 2);
  CHECK(props["r-prop"]["verdict"] == "pass");
  const auto& w = props["ef"]["witness"];
  CHECK(w["kind"] == "envy");
  CHECK(w["agent"] == "a1");
  CHECK(w["other"] == "a3");
  CHECK(w["own_value"] == "1/3");
  CHECK(w["other_value"] == "5/12");

  auto mea = run_report(profiles::fig1(), {.algorithm = "mea", .exact = true,
                                              .properties = {Property::RobustPROP}});
  const auto& pw = mea.document["properties"]["r-prop"]["witness"];
  CHECK(pw["kind"] == "prefix");
  CHECK(pw["agent"] == "a1");
  CHECK(pw["prefix"] == 1);
  CHECK(R(pw["lhs"].get<std::string>().c_str()) < R(pw["rhs"].get<std::string>().c_str()));

  auto thm5 = run_report(profiles::thm5(), {.algorithm = "uniform", .properties = {Property::PO}});
  const auto& iw = thm5.document["properties"]["po"]["witness"];
  CHECK(iw["kind"] == "improvement");
  CHECK(iw["gains"].size() == 2);
}

TEST_CASE("nash product with a zero utility") {
  auto j = nash_to_json(profiles::fig1(), rationals({"0", "3"}));
  CHECK(j["exact"] == "0");
  CHECK(j["weighted_log"].is_null());
}

TEST_CASE("compare: eating minus market on the fig1 profile") {
  auto cmp = compare_utilities({profiles::fig1()}, {.algorithm = "ccea"}, {.algorithm = "mea", .exact = true});
  CHECK(cmp.difference == rationals({"2/5", "-3/5"}));
  CHECK(cmp.max_abs == R("3/5"));
  CHECK(cmp.trials == 1);
}

TEST_CASE("compare: identical mechanisms and piecewise uniform agreement") {
  std::vector<Profile> profiles;
  for (std::uint64_t t = 0; t < 20; ++t)
    profiles.push_back(generate_profile({.agents = 3, .max_blocks = 6, .pw_uniform = true, .seed = 100 + t}));
  CHECK(compare_utilities(profiles, {.algorithm = "csd"}, {.algorithm = "csd"}).max_abs == 0);
  CHECK(compare_utilities(profiles, {.algorithm = "ccea"}, {.algorithm = "mea", .exact = true}).max_abs == 0);
  // the tolerance bounds the bang-per-buck residual; utility error grows like its square root
  auto loose = compare_utilities(profiles, {.algorithm = "ccea"}, {.algorithm = "mea"});
  CHECK(to_double(loose.max_abs) <= 1e-4);
  auto tight = compare_utilities(profiles, {.algorithm = "ccea"}, {.algorithm = "mea", .tolerance = 1e-13});
  CHECK(to_double(tight.max_abs) <= 1e-6);
  CHECK(tight.trials == 20);
}

TEST_CASE("fixtures: every bundled fixture passes") {
  auto outcomes = run_fixture_dir(fixture_dir());
  std::set<std::string> names;
  for (const auto& o : outcomes) {
    INFO(o.name << ": " << (o.failures.empty() ? "" : o.failures.front()));
    CHECK(o.passed());
    CHECK(o.checks > 0);
    names.insert(o.name);
  }
  CHECK(names == std::set<std::string>{"fig1", "example3", "prop10", "prop15", "prop16", "thm5", "thm7-p1", "thm7-p2",
                                       "thm7-p3"});
}

TEST_CASE("fixtures: wrong expectations are reported") {
  auto doc = json::parse(io::read_file(fixture_dir() + "/fig1.json"));
  doc["expect"]["runs"][0]["utilities"] = json::array({"1", "6/5"});
  doc["expect"]["runs"][0]["properties"]["po"] = "fail";
  auto out = run_fixture(doc, "tampered");
  CHECK_FALSE(out.passed());
  CHECK(out.failures.size() == 2);

  auto p10 = json::parse(io::read_file(fixture_dir() + "/prop10.json"));
  p10["expect"]["manipulations"][0]["reports"][0] = io::density_to_json(profiles::prop10_truth()[1].density);
  p10["expect"]["manipulations"][0].erase("deviating");
  p10["expect"]["manipulations"][0]["search"] = false;
  CHECK_FALSE(run_fixture(p10, "truthful").passed());

  auto dir = std::filesystem::temp_directory_path() / "fairslice_fixture_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(run_fixture_dir(dir.string()), Error);
  CHECK_THROWS_AS(run_fixture_dir((dir / "missing").string()), Error);
  std::filesystem::remove_all(dir);
}

#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "fairslice/model.hpp"

// Small named profiles used by the golden fixtures, the tests and the CLI.
namespace fairslice::profiles {

// Builds a density from "p/q"/decimal strings: breakpoints then one value per segment.
inline PiecewiseDensity density(std::initializer_list<const char*> breakpoints, std::initializer_list<const char*> values) {
  std::vector<Rational> b, v;
  for (auto* s : breakpoints) b.push_back(parse_rational(s));
  for (auto* s : values) v.push_back(parse_rational(s));
  return PiecewiseDensity(std::move(b), std::move(v));
}

inline Profile make(std::vector<std::pair<std::string, PiecewiseDensity>> agents) {
  std::vector<AgentSpec> specs;
  for (auto& [name, d] : agents) specs.push_back({name, std::move(d), Rational(1)});
  return Profile(std::move(specs));
}

// Two agents: 10 on [0,0.1], 2 on (0.5,1] versus 3 on (0.3,1].
inline Profile fig1() {
  return make({{"a1", density({"0", "1/10", "1/2", "1"}, {"10", "0", "2"})},
               {"a2", density({"0", "3/10", "1"}, {"0", "3"})}});
}

// Piecewise uniform: a1 wants [0,0.4], a2 wants [0.2,1].
inline Profile overlapping_uniform() {
  return make({{"a1", density({"0", "2/5", "1"}, {"1", "0"})}, {"a2", density({"0", "1/5", "1"}, {"0", "1"})}});
}

// Both agents prefer the left half, agent 1 relatively more strongly (2:1 versus 3:2).
inline Profile thm5() {
  return make({{"a1", density({"0", "1/2", "1"}, {"2", "1"})}, {"a2", density({"0", "1/2", "1"}, {"3", "2"})}});
}

// Deviation chain with a = 2, b = 1, epsilon = 1.
inline Profile thm7_p1() {
  return make({{"a1", density({"0", "1/2", "1"}, {"2", "1"})}, {"a2", density({"0", "1/2", "1"}, {"2", "1"})}});
}
inline Profile thm7_p2() {
  return make({{"a1", density({"0", "1/4", "1/2", "3/4", "1"}, {"2", "0", "1", "0"})},
               {"a2", density({"0", "1/2", "1"}, {"2", "1"})}});
}
inline Profile thm7_p3() {
  return make({{"a1", density({"0", "1/4", "1/2", "3/4", "1"}, {"2", "0", "1", "0"})},
               {"a2", density({"0", "1/4", "1/2", "1"}, {"3", "2", "1"})}});
}

// Uniform-split manipulation: a2 truly wants only (0.8,1]; reporting (0.6,1] pays off.
inline Profile prop10_truth() {
  return make({{"a1", density({"0", "1/5", "1"}, {"1", "0"})}, {"a2", density({"0", "4/5", "1"}, {"0", "1"})}});
}
inline PiecewiseDensity prop10_misreport() { return density({"0", "3/5", "1"}, {"0", "1"}); }

// Quarter-cake coalition manipulation of serial dictatorship.
inline Profile prop15_truth() {
  return make({{"a1", density({"0", "1/4", "1/2", "3/4", "1"}, {"4", "3", "2", "1"})},
               {"a2", density({"0", "1/4", "1/2", "3/4", "1"}, {"3", "4", "1", "2"})}});
}
inline Profile prop15_deviation() {
  return make({{"a1", density({"0", "1/4", "1/2", "3/4", "1"}, {"4", "2", "3", "1"})},
               {"a2", density({"0", "1/4", "1/2", "3/4", "1"}, {"2", "4", "1", "3"})}});
}

// Three piecewise-uniform agents where serial dictatorship leaves agent 1 envious of agent 3.
inline Profile prop16() {
  return make({{"a1", density({"0", "2/3", "1"}, {"3/2", "0"})},
               {"a2", density({"0", "1/3", "2/3", "1"}, {"3/2", "0", "3/2"})},
               {"a3", density({"0", "1/3", "1"}, {"0", "3/2"})}});
}

inline Profile identical_uniform(std::size_t n) {
  std::vector<std::pair<std::string, PiecewiseDensity>> agents;
  for (std::size_t i = 0; i < n; ++i) agents.push_back({"a" + std::to_string(i + 1), PiecewiseDensity::uniform()});
  return make(std::move(agents));
}

}  // namespace fairslice::profiles

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/model.hpp"
#include "fairslice/rng.hpp"

namespace fairslice {

struct GeneratorOptions {
  std::size_t agents = 2;
  int max_blocks = 3;
  int ladder = 4;           // values drawn from {0, ..., ladder}
  bool pw_uniform = false;  // each agent uses {0, k_i} only
  int grid = 24;            // breakpoints on multiples of 1/grid
  bool random_claims = false;
  std::uint64_t seed = 1;
};

/// Random profile: each agent gets 1..max_blocks segments with breakpoints on
/// the 1/grid lattice; an all-zero draw is redrawn.
inline Profile generate_profile(const GeneratorOptions& options) {
  if (options.agents == 0) throw Error(ErrorCode::EmptyProfile, "generator needs at least one agent");
  if (options.max_blocks < 1 || options.ladder < 1 || options.grid < 1)
    throw Error(ErrorCode::InvalidArgument, "max blocks, ladder and grid must be positive");
  Rng rng(options.seed);
  std::vector<AgentSpec> agents;
  std::vector<int> lattice;
  for (int k = 1; k < options.grid; ++k) lattice.push_back(k);
  for (std::size_t i = 0; i < options.agents; ++i) {
    const auto blocks = static_cast<std::size_t>(std::min(rng.between(1, options.max_blocks), std::int64_t{options.grid}));
    const auto level = Rational(rng.between(1, options.ladder));
    std::vector<Rational> bps, vals;
    for (;;) {
      auto marks = lattice;
      rng.shuffle(marks);
      marks.resize(blocks - 1);
      std::sort(marks.begin(), marks.end());
      bps = {Rational(0)};
      for (int m : marks) bps.push_back(make_rational(m, options.grid));
      bps.push_back(Rational(1));
      vals.clear();
      for (std::size_t k = 0; k < blocks; ++k)
        vals.push_back(options.pw_uniform ? (rng.below(2) ? level : Rational(0)) : Rational(rng.between(0, options.ladder)));
      if (std::any_of(vals.begin(), vals.end(), [](const Rational& v) { return v > 0; })) break;
    }
    Rational claim(1);
    if (options.random_claims) claim = make_rational(rng.between(1, 4), rng.between(1, 3));
    agents.push_back({"a" + std::to_string(i + 1), PiecewiseDensity(bps, vals), claim});
  }
  return Profile(std::move(agents));
}

}  // namespace fairslice

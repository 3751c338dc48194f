#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "fairslice/rational.hpp"

namespace fairslice {

// Seedable, portable generator. std::mt19937_64 has a fully specified output
// sequence, so a seed reproduces the same draws on every platform. The
// distributions below are hand-rolled for the same reason (std:: distributions
// are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // k / 2^53 for k uniform in [0, 2^53).
  Rational uniform_unit() {
    static const Integer two_53 = Integer(1) << 53;
    return Rational(Integer(next() >> 11), two_53);
  }

  Rational uniform(const Rational& lo, const Rational& hi) { return lo + (hi - lo) * uniform_unit(); }

  double uniform_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
      std::uint64_t x = next();
      if (x < limit) return x % bound;
    }
  }

  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairslice

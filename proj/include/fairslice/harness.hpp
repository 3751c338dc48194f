#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairslice/ccea.hpp"
#include "fairslice/csd.hpp"
#include "fairslice/fairness.hpp"
#include "fairslice/generator.hpp"
#include "fairslice/io.hpp"
#include "fairslice/manipulation.hpp"
#include "fairslice/mea.hpp"

namespace fairslice {

using json = nlohmann::json;

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"ccea", "mea", "csd", "crsd", "cmsd", "uniform"};
  return names;
}

struct RunRequest {
  std::string algorithm = "ccea";
  std::uint64_t seed = 42;
  std::optional<std::vector<std::size_t>> permutation;  // crsd: a fixed order
  std::size_t samples = 0;                              // crsd: average over sampled orders
  bool exact = false;                                   // mea: exact equilibrium
  double tolerance = 1e-9;                              // mea: iterative tolerance
  bool free_disposal = true;                            // csd family
  bool rescaled = false;                                // report pieces in post-disposal coordinates
  std::vector<Property> properties{std::begin(kAllProperties), std::end(kAllProperties)};
};

struct RunResult {
  Allocation allocation;            // original coordinates
  std::optional<Allocation> rescaled;
  std::vector<Rational> utilities;  // true-valuation utilities of `allocation`
  CheckOptions check;
  json extras = json::object();
};

inline json exact_and_decimal(const Rational& r) { return {{"exact", to_string(r)}, {"decimal", to_decimal(r)}}; }

inline std::vector<Rational> utilities_of(const Profile& profile, const Allocation& alloc) {
  auto original = to_original(alloc);
  std::vector<Rational> out;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    auto it = std::find(original.names.begin(), original.names.end(), profile[i].name);
    out.push_back(it == original.names.end()
                      ? Rational(0)
                      : value_of(profile[i].density, original.pieces[static_cast<std::size_t>(it - original.names.begin())]));
  }
  return out;
}

/// Runs one mechanism and records what it computed besides the pieces.
inline RunResult run_algorithm(const Profile& profile, const RunRequest& request) {
  const auto& alg = request.algorithm;
  CsdOptions csd{.free_disposal = request.free_disposal};
  RunResult out;
  auto from_solution = [&](const Solution& sol, const Layout& layout) {
    out.allocation = sol.allocation(layout);
    if (request.rescaled) out.rescaled = sol.rescaled_allocation(layout);
  };
  if (alg == "ccea") {
    from_solution(ccea_solution(profile), ContiguousLayout{});
  } else if (alg == "mea") {
    auto outcome = mea_solution(profile, {.tolerance = request.tolerance, .exact = request.exact});
    from_solution(outcome.solution, ContiguousLayout{});
    const auto& eq = outcome.equilibrium;
    json prices = json::array(), utils = json::array();
    if (eq.exact()) {
      for (const auto& p : *eq.exact_prices) prices.push_back(exact_and_decimal(p));
    } else {
      for (double p : eq.prices) prices.push_back({{"decimal", to_decimal(p)}});
      out.check.slack = from_double(std::max(1e-6, 100 * request.tolerance));
    }
    out.extras["equilibrium"] = {{"exact", eq.exact()},
                                 {"prices", prices},
                                 {"residual", eq.residual},
                                 {"iterations", eq.iterations}};
  } else if (alg == "csd") {
    auto res = run_csd(profile, csd);
    from_solution(res.solution, ContiguousLayout{});
    out.extras["csd"] = {{"permutations", res.samples}, {"exact", res.exact}};
  } else if (alg == "cmsd") {
    auto res = run_csd(profile, csd);
    from_solution(res.solution, RotationLayout{request.seed});
    out.extras["csd"] = {{"permutations", res.samples}, {"exact", res.exact}, {"seed", request.seed}};
  } else if (alg == "crsd") {
    if (request.samples > 0) {
      auto res = run_crsd_sampled(profile, request.samples, request.seed, csd);
      from_solution(res.solution, ContiguousLayout{});
      out.extras["csd"] = {{"permutations", res.samples}, {"exact", res.exact}, {"seed", request.seed}};
    } else {
      std::vector<std::size_t> perm(profile.size());
      if (request.permutation) {
        perm = *request.permutation;
      } else {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng rng(request.seed);
        rng.shuffle(perm);
      }
      auto res = run_crsd(profile, perm, csd);
      out.allocation = Allocation{profile.names(), res.pieces, {}, Coordinates::Original, std::nullopt};
      out.extras["csd"] = {{"permutation", res.permutation}, {"exact", true}};
    }
  } else if (alg == "uniform") {
    out.allocation = uniform_split(profile);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + alg + "'");
  }
  out.utilities = utilities_of(profile, out.allocation);
  return out;
}

inline json witness_to_json(const Profile& profile, const Witness& witness) {
  auto name = [&](std::size_t i) { return profile[i].name; };
  auto numbers = [](const std::vector<Rational>& xs) {
    json a = json::array();
    for (const auto& x : xs) a.push_back(to_string(x));
    return a;
  };
  return std::visit(
      [&](const auto& w) -> json {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<W, EnvyWitness>) {
          return {{"kind", "envy"}, {"agent", name(w.agent)}, {"other", name(w.other)},
                  {"own_value", to_string(w.lhs)}, {"other_value", to_string(w.rhs)}};
        } else if constexpr (std::is_same_v<W, ShortfallWitness>) {
          return {{"kind", "shortfall"}, {"agent", name(w.agent)}, {"value", to_string(w.lhs)},
                  {"required", to_string(w.rhs)}};
        } else if constexpr (std::is_same_v<W, PrefixWitness>) {
          json j = {{"kind", "prefix"}, {"agent", name(w.agent)}, {"prefix", w.prefix},
                    {"weights", numbers(w.weights)}, {"lhs", to_string(w.lhs)}, {"rhs", to_string(w.rhs)}};
          if (w.other) j["other"] = name(*w.other);
          return j;
        } else if constexpr (std::is_same_v<W, ImprovementWitness>) {
          json cells = json::array();
          const auto& part = w.assignment.partition;
          for (std::size_t j = 0; j < part.cells(); ++j)
            cells.push_back({{"interval", {to_string(part.cuts[j]), to_string(part.cuts[j + 1])}},
                             {"shares", numbers(w.assignment.share[j])}});
          return {{"kind", "improvement"}, {"gains", numbers(w.gains)}, {"assignment", cells}};
        } else if constexpr (std::is_same_v<W, WasteWitness>) {
          json j = {{"kind", "waste"}, {"interval", {to_string(w.where.lo), to_string(w.where.hi)}},
                    {"desirer", name(w.desirer)}};
          j["holder"] = w.holder ? json(name(*w.holder)) : json(nullptr);
          return j;
        } else if constexpr (std::is_same_v<W, SymmetryWitness>) {
          return {{"kind", "asymmetry"}, {"agent", name(w.agent)}, {"other", name(w.other)},
                  {"utility", to_string(w.utility)}, {"other_utility", to_string(w.other_utility)}};
        } else {
          return {{"kind", "unanimity"}, {"agent", name(w.agent)}, {"favourite", io::piece_to_json(w.favourite)},
                  {"received", to_string(w.received)}, {"favourite_value", to_string(w.favourite_value)}};
        }
      },
      witness);
}

inline json properties_to_json(const Profile& profile, const std::vector<PropertyReport>& reports) {
  json out = json::object();
  for (const auto& r : reports) {
    json entry = {{"verdict", to_string(r.verdict)}};
    if (r.failed()) entry["witness"] = witness_to_json(profile, r.witness);
    out[to_string(r.property)] = entry;
  }
  return out;
}

inline json utilities_to_json(const Profile& profile, const std::vector<Rational>& utilities) {
  json out = json::array();
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    json u = exact_and_decimal(utilities[i]);
    u["agent"] = profile[i].name;
    out.push_back(u);
  }
  return out;
}

// Product of utilities, and the claims-weighted log welfare when every utility is positive.
inline json nash_to_json(const Profile& profile, const std::vector<Rational>& utilities) {
  Rational product(1);
  for (const auto& u : utilities) product *= u;
  json out = exact_and_decimal(product);
  bool positive = std::all_of(utilities.begin(), utilities.end(), [](const Rational& u) { return u > 0; });
  if (positive) {
    double log_welfare = 0;
    for (std::size_t i = 0; i < utilities.size(); ++i)
      log_welfare += to_double(profile[i].claim) * std::log(to_double(utilities[i]));
    out["weighted_log"] = to_decimal(log_welfare);
  } else {
    out["weighted_log"] = nullptr;
  }
  return out;
}

struct RunReport {
  RunResult result;
  std::vector<PropertyReport> properties;
  json document;
};

inline RunReport run_report(const Profile& profile, const RunRequest& request) {
  RunReport rep{run_algorithm(profile, request), {}, {}};
  rep.properties = check_all(profile, rep.result.allocation, rep.result.check, request.properties);
  json doc;
  doc["algorithm"] = request.algorithm;
  doc["allocation"] = io::allocation_to_json(request.rescaled && rep.result.rescaled ? *rep.result.rescaled
                                                                                      : rep.result.allocation);
  doc["utilities"] = utilities_to_json(profile, rep.result.utilities);
  doc["nash_product"] = nash_to_json(profile, rep.result.utilities);
  doc["properties"] = properties_to_json(profile, rep.properties);
  if (rep.result.check.slack > 0) doc["slack"] = to_decimal(rep.result.check.slack);
  for (auto it = rep.result.extras.begin(); it != rep.result.extras.end(); ++it) doc[it.key()] = it.value();
  rep.document = std::move(doc);
  return rep;
}

struct Comparison {
  std::vector<Rational> difference;  // first trial: alg1 - alg2 per agent
  Rational max_abs;                  // over every trial and agent
  std::size_t trials = 0;
};

inline Comparison compare_utilities(const std::vector<Profile>& profiles, const RunRequest& first,
                                    const RunRequest& second) {
  Comparison out;
  for (const auto& p : profiles) {
    auto a = run_algorithm(p, first).utilities;
    auto b = run_algorithm(p, second).utilities;
    std::vector<Rational> diff;
    for (std::size_t i = 0; i < a.size(); ++i) {
      diff.push_back(a[i] - b[i]);
      out.max_abs = std::max(out.max_abs, abs(diff.back()));
    }
    if (out.trials++ == 0) out.difference = std::move(diff);
  }
  return out;
}

}  // namespace fairslice

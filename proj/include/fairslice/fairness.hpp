#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/model.hpp"
#include "fairslice/pareto.hpp"

namespace fairslice {

enum class Property { EF, PROP, RobustEF, RobustPROP, PO, NonWasteful, Symmetry, Unanimity };
enum class Verdict { Pass, Fail, NotApplicable };

inline constexpr Property kAllProperties[] = {Property::EF,          Property::PROP,     Property::RobustEF,
                                              Property::RobustPROP,  Property::PO,       Property::NonWasteful,
                                              Property::Symmetry,    Property::Unanimity};

inline const char* to_string(Property p) {
  switch (p) {
    case Property::EF: return "ef";
    case Property::PROP: return "prop";
    case Property::RobustEF: return "r-ef";
    case Property::RobustPROP: return "r-prop";
    case Property::PO: return "po";
    case Property::NonWasteful: return "non-wasteful";
    case Property::Symmetry: return "symmetry";
    case Property::Unanimity: return "unanimity";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::NotApplicable: return "not-applicable";
  }
  return "?";
}

inline Property parse_property(const std::string& name) {
  for (auto p : kAllProperties)
    if (name == to_string(p)) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown property '" + name + "'");
}

// `agent` values its own piece at `lhs` but the comparison demands at least `rhs`.
struct EnvyWitness {
  std::size_t agent, other;
  Rational lhs, rhs;
};
struct ShortfallWitness {
  std::size_t agent;
  Rational lhs, rhs;
};
// An ordinally equivalent density (weights per value class, best class first)
// under which the robust inequality fails at class prefix `prefix`.
struct PrefixWitness {
  std::size_t agent;
  std::optional<std::size_t> other;  // absent for robust proportionality
  std::size_t prefix;
  std::vector<Rational> weights;
  Rational lhs, rhs;
};
struct ImprovementWitness {
  FractionalAssignment assignment;
  std::vector<Rational> gains;
};
struct WasteWitness {
  Interval where;
  std::optional<std::size_t> holder;  // absent when the cake is unassigned
  std::size_t desirer;
};
struct SymmetryWitness {
  std::size_t agent, other;
  Rational utility, other_utility;
};
struct UnanimityWitness {
  std::size_t agent;
  Piece favourite;
  Rational received, favourite_value;
};

using Witness = std::variant<std::monostate, EnvyWitness, ShortfallWitness, PrefixWitness, ImprovementWitness,
                             WasteWitness, SymmetryWitness, UnanimityWitness>;

struct PropertyReport {
  Property property;
  Verdict verdict;
  Witness witness;

  bool passed() const { return verdict == Verdict::Pass; }
  bool failed() const { return verdict == Verdict::Fail; }
};

struct CheckOptions {
  Rational slack{0};  // tolerated shortfall, for allocations from the iterative market solver
};

/// An allocation laid over the profile's grid, split further at every piece endpoint.
class AllocationView {
 public:
  AllocationView(const Profile& profile, const Allocation& allocation) : profile_(profile) {
    Allocation alloc = to_original(allocation);
    if (alloc.coordinates != Coordinates::Original)
      throw Error(ErrorCode::InfeasibleInput, "rescaled allocation without an origin map");
    if (alloc.pieces.size() != profile.size() || alloc.names.size() != profile.size())
      throw Error(ErrorCode::InfeasibleInput, "allocation does not list every agent");
    pieces_.resize(profile.size());
    for (std::size_t k = 0; k < alloc.names.size(); ++k) {
      auto names = profile.names();
      auto it = std::find(names.begin(), names.end(), alloc.names[k]);
      if (it == names.end()) throw Error(ErrorCode::InfeasibleInput, "unknown agent '" + alloc.names[k] + "'");
      pieces_[static_cast<std::size_t>(it - names.begin())] = normalize(alloc.pieces[k]);
    }
    waste_ = normalize(alloc.waste);

    std::vector<Rational> ends;
    auto collect = [&](const Piece& p) {
      for (const auto& iv : p) {
        if (iv.lo < 0 || iv.hi > 1) throw Error(ErrorCode::InfeasibleInput, "piece outside [0,1]");
        ends.push_back(iv.lo);
        ends.push_back(iv.hi);
      }
    };
    for (const auto& p : pieces_) collect(p);
    collect(waste_);
    grid_ = refine(profile, ends);

    held_ = FractionalAssignment::zeros(grid_);
    wasted_.assign(grid_.cells(), Rational(0));
    auto mark = [&](const Piece& p, auto&& record) {
      for (const auto& iv : p) {
        auto j = static_cast<std::size_t>(std::lower_bound(grid_.cuts.begin(), grid_.cuts.end(), iv.lo) -
                                          grid_.cuts.begin());
        for (; grid_.cuts[j] < iv.hi; ++j) record(j);
      }
    };
    for (std::size_t i = 0; i < pieces_.size(); ++i)
      mark(pieces_[i], [&](std::size_t j) { held_.share[j][i] += 1; });
    mark(waste_, [&](std::size_t j) { wasted_[j] += 1; });
    for (std::size_t j = 0; j < grid_.cells(); ++j) {
      Rational sum = wasted_[j];
      for (const auto& s : held_.share[j]) sum += s;
      if (sum > 1)
        throw Error(ErrorCode::InfeasibleInput, "pieces overlap on (" + to_string(grid_.cuts[j]) + ", " +
                                                    to_string(grid_.cuts[j + 1]) + "]");
    }
    for (std::size_t i = 0; i < profile.size(); ++i) utilities_.push_back(held_.utility(i));
  }

  const Profile& profile() const { return profile_; }
  const RefinedPartition& grid() const { return grid_; }
  const FractionalAssignment& held() const { return held_; }
  const Piece& piece(std::size_t i) const { return pieces_[i]; }
  const Rational& utility(std::size_t i) const { return utilities_[i]; }
  const std::vector<Rational>& utilities() const { return utilities_; }
  std::size_t agents() const { return profile_.size(); }

  // Agent i's value for agent k's piece.
  Rational value(std::size_t i, std::size_t k) const {
    Rational sum;
    for (std::size_t j = 0; j < grid_.cells(); ++j)
      if (held_.share[j][k] > 0) sum += grid_.length(j) * grid_.values[j][i];
    return sum;
  }

  // Length of agent k's piece inside each of agent i's value classes (best first).
  std::vector<Rational> class_lengths(std::size_t i, std::optional<std::size_t> k) const {
    auto levels = profile_[i].density.levels();
    std::vector<Rational> out(levels.size());
    for (std::size_t j = 0; j < grid_.cells(); ++j) {
      const auto& v = grid_.values[j][i];
      if (v == 0) continue;
      auto c = static_cast<std::size_t>(std::find(levels.begin(), levels.end(), v) - levels.begin());
      out[c] += k ? held_.share[j][*k] * grid_.length(j) : grid_.length(j);
    }
    return out;
  }

  // Value agent i places on cake held by nobody.
  Rational unassigned_value(std::size_t i) const {
    Rational sum;
    for (std::size_t j = 0; j < grid_.cells(); ++j) {
      Rational free = 1;
      for (const auto& s : held_.share[j]) free -= s;
      sum += free * grid_.length(j) * grid_.values[j][i];
    }
    return sum;
  }

 private:
  const Profile& profile_;
  std::vector<Piece> pieces_;
  Piece waste_;
  RefinedPartition grid_;
  FractionalAssignment held_;
  std::vector<Rational> wasted_;
  std::vector<Rational> utilities_;
};

namespace detail {

inline PropertyReport pass(Property p) { return {p, Verdict::Pass, {}}; }
inline PropertyReport not_applicable(Property p) { return {p, Verdict::NotApplicable, {}}; }

inline Rational total_claims(const Profile& profile) {
  Rational sum;
  for (const auto& c : profile.claims()) sum += c;
  return sum;
}

// Strictly decreasing positive class weights whose value gap is dominated by prefix `t`:
// consecutive weight drops are 1 at t and a small epsilon elsewhere (Abel summation).
inline std::vector<Rational> steep_weights(const std::vector<Rational>& gaps, std::size_t t) {
  Rational spread;
  for (std::size_t s = 0; s < gaps.size(); ++s)
    if (s != t) spread += abs(gaps[s]);
  const Rational eps = -gaps[t] / (2 * (1 + spread));
  std::vector<Rational> w(gaps.size());
  Rational acc;
  for (std::size_t s = gaps.size(); s-- > 0;) {
    acc += s == t ? Rational(1) : eps;
    w[s] = acc;
  }
  return w;
}

inline Rational weighted(const std::vector<Rational>& weights, const std::vector<Rational>& lengths) {
  Rational sum;
  for (std::size_t c = 0; c < weights.size(); ++c) sum += weights[c] * lengths[c];
  return sum;
}

// First prefix t with own_t < ratio * ref_t, reported with its steep weights.
inline std::optional<PrefixWitness> prefix_violation(std::size_t agent, std::optional<std::size_t> other,
                                                     const std::vector<Rational>& own,
                                                     const std::vector<Rational>& reference, const Rational& ratio,
                                                     const Rational& slack) {
  std::vector<Rational> gaps(own.size());
  Rational a, b;
  std::optional<std::size_t> worst;
  for (std::size_t t = 0; t < own.size(); ++t) {
    a += own[t];
    b += reference[t];
    gaps[t] = a - ratio * b;
    if (gaps[t] + slack < 0 && (!worst || gaps[t] < gaps[*worst])) worst = t;
  }
  if (!worst) return std::nullopt;
  auto weights = steep_weights(gaps, *worst);
  return PrefixWitness{agent, other, *worst, weights, weighted(weights, own), ratio * weighted(weights, reference)};
}

}  // namespace detail

inline PropertyReport check_envy_free(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  std::optional<EnvyWitness> worst;
  for (std::size_t i = 0; i < view.agents(); ++i)
    for (std::size_t k = 0; k < view.agents(); ++k) {
      if (i == k) continue;
      Rational rhs = profile[i].claim / profile[k].claim * view.value(i, k);
      if (view.utility(i) + options.slack < rhs &&
          (!worst || rhs - view.utility(i) > worst->rhs - worst->lhs))
        worst = EnvyWitness{i, k, view.utility(i), rhs};
    }
  if (worst) return {Property::EF, Verdict::Fail, *worst};
  return detail::pass(Property::EF);
}

inline PropertyReport check_proportional(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  const Rational claims = detail::total_claims(profile);
  std::optional<ShortfallWitness> worst;
  for (std::size_t i = 0; i < view.agents(); ++i) {
    Rational rhs = profile[i].claim / claims * profile[i].density.total();
    if (view.utility(i) + options.slack < rhs && (!worst || rhs - view.utility(i) > worst->rhs - worst->lhs))
      worst = ShortfallWitness{i, view.utility(i), rhs};
  }
  if (worst) return {Property::PROP, Verdict::Fail, *worst};
  return detail::pass(Property::PROP);
}

/// Robust envy-freeness as prefix dominance over each agent's value classes.
inline PropertyReport check_robust_ef(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  for (std::size_t i = 0; i < view.agents(); ++i) {
    auto own = view.class_lengths(i, i);
    for (std::size_t k = 0; k < view.agents(); ++k) {
      if (i == k) continue;
      auto w = detail::prefix_violation(i, k, own, view.class_lengths(i, k), profile[i].claim / profile[k].claim,
                                        options.slack);
      if (w) return {Property::RobustEF, Verdict::Fail, *w};
    }
  }
  return detail::pass(Property::RobustEF);
}

inline PropertyReport check_robust_prop(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  const Rational claims = detail::total_claims(profile);
  for (std::size_t i = 0; i < view.agents(); ++i) {
    auto w = detail::prefix_violation(i, std::nullopt, view.class_lengths(i, i), view.class_lengths(i, std::nullopt),
                                      profile[i].claim / claims, options.slack);
    if (w) return {Property::RobustPROP, Verdict::Fail, *w};
  }
  return detail::pass(Property::RobustPROP);
}

inline PropertyReport check_pareto(const AllocationView& view, const CheckOptions& options = {}) {
  auto improvement = pareto_improvement(view.held(), options.slack);
  if (!improvement) return detail::pass(Property::PO);
  return {Property::PO, Verdict::Fail, ImprovementWitness{std::move(improvement->assignment), improvement->gains}};
}

inline PropertyReport check_non_wasteful(const AllocationView& view, const CheckOptions& = {}) {
  const auto& grid = view.grid();
  const auto& held = view.held();
  for (std::size_t j = 0; j < grid.cells(); ++j) {
    auto who = grid.desirers(j);
    if (who.empty()) continue;
    Rational free = 1;
    for (std::size_t i = 0; i < view.agents(); ++i) {
      free -= held.share[j][i];
      if (held.share[j][i] > 0 && grid.values[j][i] == 0)
        return {Property::NonWasteful, Verdict::Fail, WasteWitness{grid.cell(j), i, who.front()}};
    }
    if (free > 0) return {Property::NonWasteful, Verdict::Fail, WasteWitness{grid.cell(j), std::nullopt, who.front()}};
  }
  return detail::pass(Property::NonWasteful);
}

/// Agents with identical reports and claims must receive equal utility; not
/// applicable when no two agents are identical.
inline PropertyReport check_symmetry(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  bool any = false;
  for (std::size_t i = 0; i < view.agents(); ++i)
    for (std::size_t k = i + 1; k < view.agents(); ++k) {
      if (!(profile[i].density == profile[k].density) || profile[i].claim != profile[k].claim) continue;
      any = true;
      if (abs(view.utility(i) - view.utility(k)) > options.slack)
        return {Property::Symmetry, Verdict::Fail, SymmetryWitness{i, k, view.utility(i), view.utility(k)}};
    }
  return any ? detail::pass(Property::Symmetry) : detail::not_applicable(Property::Symmetry);
}

/// Positive-value part of an agent's favourite piece of length `target`, when
/// that part is unique: the best classes must fill the length exactly, or the
/// whole support must fit.
inline std::optional<Piece> unique_favourite(const PiecewiseDensity& density, const Rational& target) {
  Rational filled;
  Piece core;
  const auto& bps = density.breakpoints();
  for (const auto& level : density.levels()) {
    for (std::size_t k = 0; k + 1 < bps.size(); ++k)
      if (density.values()[k] == level) {
        core.push_back({bps[k], bps[k + 1]});
        filled += bps[k + 1] - bps[k];
      }
    if (filled == target) return normalize(core);
    if (filled > target) return std::nullopt;
  }
  return normalize(core);
}

inline PropertyReport check_unanimity(const AllocationView& view, const CheckOptions& options = {}) {
  const auto& profile = view.profile();
  const Rational target = Rational(1) / static_cast<long>(profile.size());
  std::vector<Piece> favourite;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    auto f = unique_favourite(profile[i].density, target);
    if (!f) return detail::not_applicable(Property::Unanimity);
    for (const auto& g : favourite)
      for (const auto& a : *f)
        for (const auto& b : g)
          if (std::max(a.lo, b.lo) < std::min(a.hi, b.hi)) return detail::not_applicable(Property::Unanimity);
    favourite.push_back(std::move(*f));
  }
  for (std::size_t i = 0; i < profile.size(); ++i) {
    Rational best = value_of(profile[i].density, favourite[i]);
    if (view.utility(i) + options.slack < best)
      return {Property::Unanimity, Verdict::Fail, UnanimityWitness{i, favourite[i], view.utility(i), best}};
  }
  return detail::pass(Property::Unanimity);
}

inline PropertyReport check_property(Property p, const AllocationView& view, const CheckOptions& options = {}) {
  switch (p) {
    case Property::EF: return check_envy_free(view, options);
    case Property::PROP: return check_proportional(view, options);
    case Property::RobustEF: return check_robust_ef(view, options);
    case Property::RobustPROP: return check_robust_prop(view, options);
    case Property::PO: return check_pareto(view, options);
    case Property::NonWasteful: return check_non_wasteful(view, options);
    case Property::Symmetry: return check_symmetry(view, options);
    case Property::Unanimity: return check_unanimity(view, options);
  }
  throw Error(ErrorCode::Internal, "unhandled property");
}

inline std::vector<PropertyReport> check_all(const Profile& profile, const Allocation& allocation,
                                             const CheckOptions& options = {},
                                             std::span<const Property> which = kAllProperties) {
  AllocationView view(profile, allocation);
  std::vector<PropertyReport> out;
  for (auto p : which) out.push_back(check_property(p, view, options));
  return out;
}

/// Re-derives a failure from its witness with plain integrals over the
/// reported densities (and the witness weights for robust properties).
inline bool replay(const Profile& profile, const Allocation& allocation, const PropertyReport& report) {
  if (!report.failed()) return false;
  AllocationView view(profile, allocation);
  auto piece_value = [&](std::size_t i, std::size_t k) { return value_of(profile[i].density, view.piece(k)); };
  auto reweighted = [&](std::size_t i, const std::vector<Rational>& weights) {
    const auto& d = profile[i].density;
    auto levels = d.levels();
    std::vector<Rational> vals;
    for (const auto& v : d.values()) {
      auto c = std::find(levels.begin(), levels.end(), v);
      vals.push_back(c == levels.end() ? Rational(0) : weights[static_cast<std::size_t>(c - levels.begin())]);
    }
    return PiecewiseDensity(d.breakpoints(), vals);
  };
  const Rational claims = detail::total_claims(profile);

  return std::visit(
      [&](const auto& w) -> bool {
        using W = std::decay_t<decltype(w)>;
        if constexpr (std::is_same_v<W, EnvyWitness>) {
          return piece_value(w.agent, w.agent) == w.lhs &&
                 profile[w.agent].claim / profile[w.other].claim * piece_value(w.agent, w.other) == w.rhs &&
                 w.lhs < w.rhs;
        } else if constexpr (std::is_same_v<W, ShortfallWitness>) {
          return piece_value(w.agent, w.agent) == w.lhs &&
                 profile[w.agent].claim / claims * profile[w.agent].density.total() == w.rhs && w.lhs < w.rhs;
        } else if constexpr (std::is_same_v<W, PrefixWitness>) {
          for (std::size_t c = 1; c < w.weights.size(); ++c)
            if (!(w.weights[c] < w.weights[c - 1])) return false;
          if (w.weights.empty() || w.weights.back() <= 0) return false;
          auto d = reweighted(w.agent, w.weights);
          Rational lhs = value_of(d, view.piece(w.agent));
          Rational rhs = w.other ? profile[w.agent].claim / profile[*w.other].claim * value_of(d, view.piece(*w.other))
                                 : profile[w.agent].claim / claims * d.total();
          return lhs == w.lhs && rhs == w.rhs && lhs < rhs;
        } else if constexpr (std::is_same_v<W, ImprovementWitness>) {
          require_feasible(w.assignment);
          bool strict = false;
          for (std::size_t i = 0; i < profile.size(); ++i) {
            Rational gain = w.assignment.utility(i) - piece_value(i, i);
            if (gain < 0 || gain != w.gains[i]) return false;
            strict = strict || gain > 0;
          }
          return strict;
        } else if constexpr (std::is_same_v<W, WasteWitness>) {
          Piece where{w.where};
          if (value_of(profile[w.desirer].density, where) <= 0) return false;
          if (w.holder)
            return overlap_length(view.piece(*w.holder), where) > 0 && value_of(profile[*w.holder].density, where) == 0;
          for (std::size_t i = 0; i < profile.size(); ++i)
            if (overlap_length(view.piece(i), where) > 0) return false;
          return true;
        } else if constexpr (std::is_same_v<W, SymmetryWitness>) {
          return profile[w.agent].density == profile[w.other].density &&
                 piece_value(w.agent, w.agent) == w.utility && piece_value(w.other, w.other) == w.other_utility &&
                 w.utility != w.other_utility;
        } else if constexpr (std::is_same_v<W, UnanimityWitness>) {
          return piece_value(w.agent, w.agent) == w.received &&
                 value_of(profile[w.agent].density, w.favourite) == w.favourite_value && w.received < w.favourite_value;
        } else {
          return false;
        }
      },
      report.witness);
}

/// Implications between the properties that must hold on any allocation.
inline std::vector<std::string> lattice_violations(const AllocationView& view,
                                                   const std::vector<PropertyReport>& reports) {
  auto verdict = [&](Property p) -> std::optional<bool> {
    for (const auto& r : reports)
      if (r.property == p && r.verdict != Verdict::NotApplicable) return r.passed();
    return std::nullopt;
  };
  std::vector<std::string> out;
  auto implies = [&](std::initializer_list<Property> premises, Property conclusion, const char* name) {
    for (auto p : premises)
      if (verdict(p) != true) return;
    if (verdict(conclusion) == false) out.push_back(name);
  };
  implies({Property::RobustEF, Property::NonWasteful}, Property::RobustPROP, "r-ef & non-wasteful => r-prop");
  implies({Property::RobustEF}, Property::EF, "r-ef => ef");
  implies({Property::RobustPROP}, Property::PROP, "r-prop => prop");
  implies({Property::EF, Property::NonWasteful}, Property::PROP, "ef & non-wasteful => prop");
  implies({Property::PO}, Property::NonWasteful, "po => non-wasteful");
  bool full = view.agents() == 2;
  for (std::size_t i = 0; full && i < view.agents(); ++i) full = view.unassigned_value(i) == 0;
  if (full) {
    implies({Property::PROP}, Property::EF, "two agents, full: prop => ef");
    implies({Property::RobustPROP}, Property::RobustEF, "two agents, full: r-prop => r-ef");
  }
  return out;
}

}  // namespace fairslice

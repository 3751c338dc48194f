#pragma once

#include <optional>
#include <vector>

#include "fairslice/error.hpp"
#include "fairslice/maxflow.hpp"

namespace fairslice {

/// One stage of the eating process: active agents, each eating from a single
/// value class (its arcs) at rate `rates[i]`, having already eaten
/// `consumed[i]` from that class without the pieces being pinned down yet.
struct EatingNetwork {
  std::vector<Rational> rates;
  std::vector<Rational> consumed;               // defaults to zero when empty
  std::vector<std::vector<std::size_t>> arcs;  // agent -> cells of its current class
  std::vector<Rational> capacities;             // remaining length per cell
};

struct Bottleneck {
  Rational duration;  // δ*: extra eating time until some agent set exhausts its neighbourhood
  std::vector<std::size_t> tight_agents;
  std::vector<std::size_t> tight_cells;
  std::vector<std::vector<Rational>> flow;  // parallel to EatingNetwork::arcs, total eaten at δ*
};

namespace detail {

inline BipartiteNetwork eating_flow_network(const EatingNetwork& net, const Rational& duration) {
  BipartiteNetwork b;
  b.right_caps = net.capacities;
  b.arcs = net.arcs;
  for (std::size_t i = 0; i < net.rates.size(); ++i)
    b.left_caps.push_back((net.consumed.empty() ? Rational(0) : net.consumed[i]) + net.rates[i] * duration);
  return b;
}

// (s(N(S)) - consumed(S)) / rate(S)
inline Rational subset_ratio(const EatingNetwork& net, const std::vector<bool>& members) {
  std::vector<bool> hit(net.capacities.size(), false);
  Rational supply, demand, rate;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (!members[i]) continue;
    rate += net.rates[i];
    if (!net.consumed.empty()) demand += net.consumed[i];
    for (auto j : net.arcs[i]) hit[j] = true;
  }
  for (std::size_t j = 0; j < hit.size(); ++j)
    if (hit[j]) supply += net.capacities[j];
  return (supply - demand) / rate;
}

}  // namespace detail

/// Largest extra eating time δ* for which every active agent can keep eating
/// its class at its rate: δ* = min_S (s(N(S)) - consumed(S)) / rate(S).
/// Found by discrete Newton steps: each infeasible guess yields a violating
/// agent set from the min cut whose ratio is a strictly smaller guess.
/// The reported tight set is the largest source side of a min cut at δ*,
/// i.e. the union of all bottleneck sets.
inline Bottleneck find_bottleneck(const EatingNetwork& net) {
  const std::size_t n = net.rates.size();
  if (n == 0) throw Error(ErrorCode::Unbounded, "no active agents: eating time is unbounded");
  for (std::size_t i = 0; i < n; ++i) {
    if (net.arcs[i].empty()) throw Error(ErrorCode::InvalidArgument, "active agent without any available cell");
    if (net.rates[i] <= 0) throw Error(ErrorCode::InvalidArgument, "eating rates must be positive");
  }

  Rational guess;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> single(n, false);
    single[i] = true;
    Rational r = detail::subset_ratio(net, single);
    if (i == 0 || r < guess) guess = r;
  }

  for (std::size_t iteration = 0;; ++iteration) {
    auto b = detail::eating_flow_network(net, guess);
    Rational demand;
    for (const auto& c : b.left_caps) demand += c;
    auto flow = max_flow(b);
    if (flow.value == demand) {
      Bottleneck out;
      out.duration = guess;
      for (std::size_t i = 0; i < n; ++i)
        if (flow.left_max_source_side[i]) out.tight_agents.push_back(i);
      for (std::size_t j = 0; j < net.capacities.size(); ++j)
        if (flow.right_max_source_side[j]) out.tight_cells.push_back(j);
      out.flow = std::move(flow.flow);
      return out;
    }
    Rational next = detail::subset_ratio(net, flow.left_source_side);
    if (!(next < guess) || iteration > 4 * (n + net.capacities.size()) + 8)
      throw Error(ErrorCode::Internal, "bottleneck search failed to make progress");
    guess = std::move(next);
  }
}

}  // namespace fairslice

#pragma once

#include <optional>
#include <vector>

#include "fairslice/bottleneck.hpp"
#include "fairslice/model.hpp"
#include "fairslice/solution.hpp"

namespace fairslice {

struct EatingStage {
  Rational duration;  // δ* of the stage
  Rational clock;     // cumulative eating time at the end of the stage
  std::vector<std::size_t> tight_agents;
  std::vector<std::size_t> tight_cells;
};

/// Controlled cake eating: every agent eats its current top value class at
/// rate `rates[i]`. Each stage runs until some set of agents exhausts the
/// cells it can reach; those agents are assigned the flow found for them and
/// move on to their next class, while everybody else keeps an unpinned
/// running total of what it has eaten so far.
inline FractionalAssignment eating_schedule(const RefinedPartition& partition, const std::vector<Rational>& rates,
                                            std::vector<EatingStage>* trace = nullptr) {
  const std::size_t n = partition.agents(), m = partition.cells();
  if (rates.size() != n) throw Error(ErrorCode::InvalidArgument, "one eating rate per agent required");

  auto out = FractionalAssignment::zeros(partition);
  std::vector<Rational> remaining(m), consumed(n);
  for (std::size_t j = 0; j < m; ++j) remaining[j] = partition.length(j);
  std::vector<std::optional<Rational>> level(n);
  Rational clock;

  auto top_level = [&](std::size_t i) -> std::optional<Rational> {
    std::optional<Rational> best;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& v = partition.values[j][i];
      if (v > 0 && remaining[j] > 0 && (!best || v > *best)) best = v;
    }
    return best;
  };
  for (std::size_t i = 0; i < n; ++i) level[i] = top_level(i);

  for (;;) {
    std::vector<std::size_t> agents;
    for (std::size_t i = 0; i < n; ++i)
      if (level[i]) agents.push_back(i);
    if (agents.empty()) break;

    // cells of any active agent's class, in cell order
    std::vector<long> local(m, -1);
    std::vector<std::size_t> cells;
    EatingNetwork net;
    for (auto i : agents) {
      net.rates.push_back(rates[i]);
      net.consumed.push_back(consumed[i]);
      auto& row = net.arcs.emplace_back();
      for (std::size_t j = 0; j < m; ++j) {
        if (remaining[j] > 0 && partition.values[j][i] == *level[i]) {
          if (local[j] < 0) {
            local[j] = static_cast<long>(cells.size());
            cells.push_back(j);
          }
          row.push_back(static_cast<std::size_t>(local[j]));
        }
      }
    }
    // arcs were numbered in discovery order; capacities follow the same order
    for (auto j : cells) net.capacities.push_back(remaining[j]);

    Bottleneck b = find_bottleneck(net);
    clock += b.duration;

    std::vector<bool> tight(n, false);
    for (auto k : b.tight_agents) tight[agents[k]] = true;
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const std::size_t i = agents[k];
      if (!tight[i]) {
        consumed[i] += rates[i] * b.duration;
        continue;
      }
      for (std::size_t a = 0; a < net.arcs[k].size(); ++a) {
        const Rational& f = b.flow[k][a];
        if (f == 0) continue;
        const std::size_t j = cells[net.arcs[k][a]];
        remaining[j] -= f;
        out.share[j][i] += f / partition.length(j);
      }
      consumed[i] = 0;
    }
    for (auto c : b.tight_cells)
      if (remaining[cells[c]] != 0) throw Error(ErrorCode::Internal, "tight cell not exhausted");

    if (trace) {
      EatingStage stage{b.duration, clock, {}, {}};
      for (auto k : b.tight_agents) stage.tight_agents.push_back(agents[k]);
      for (auto c : b.tight_cells) stage.tight_cells.push_back(cells[c]);
      trace->push_back(std::move(stage));
    }

    for (auto i : agents) {
      auto next = top_level(i);
      if (!tight[i] && next != level[i]) throw Error(ErrorCode::Internal, "non-bottleneck agent lost its class");
      level[i] = next;
    }
  }
  return out;
}

inline Solution ccea_solution(const Profile& profile) {
  auto disposal = prepare(profile);
  return {eating_schedule(disposal.partition, profile.claims()), disposal.origin, profile.names()};
}

/// Robust envy-free, non-wasteful allocation (claims act as eating rates).
inline Allocation run_ccea(const Profile& profile) { return ccea_solution(profile).allocation(); }

}  // namespace fairslice

#pragma once

#include <cassert>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

#include "fairslice/rational.hpp"

namespace fairslice {

/// Dinic's algorithm over exact rational capacities. Arcs are explored in
/// insertion order, so the resulting flow is deterministic.
class FlowGraph {
 public:
  explicit FlowGraph(std::size_t nodes) : adj_(nodes) {}

  std::size_t add_arc(std::size_t from, std::size_t to, Rational cap) {
    std::size_t id = arcs_.size();
    arcs_.push_back({to, std::move(cap), Rational(0)});
    adj_[from].push_back(id);
    arcs_.push_back({from, Rational(0), Rational(0)});
    adj_[to].push_back(id + 1);
    return id;
  }

  Rational max_flow(std::size_t s, std::size_t t) {
    Rational total;
    while (build_levels(s, t)) {
      next_.assign(adj_.size(), 0);
      for (;;) {
        Rational pushed = augment(s, t, Rational(-1));
        if (pushed == 0) break;
        total += pushed;
      }
    }
    return total;
  }

  const Rational& flow(std::size_t arc) const { return arcs_[arc].flow; }
  const Rational& capacity(std::size_t arc) const { return arcs_[arc].cap; }

  // Nodes reachable from s in the residual graph: the smallest source side of a min cut.
  std::vector<bool> reachable_from(std::size_t s) const {
    std::vector<bool> seen(adj_.size(), false);
    std::vector<std::size_t> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto id : adj_[u]) {
        const auto& a = arcs_[id];
        if (!seen[a.to] && a.cap - a.flow > 0) {
          seen[a.to] = true;
          stack.push_back(a.to);
        }
      }
    }
    return seen;
  }

  // Nodes that cannot reach t in the residual graph: the largest source side of a min cut.
  std::vector<bool> cannot_reach(std::size_t t) const {
    std::vector<bool> reaches(adj_.size(), false);
    std::vector<std::size_t> stack{t};
    reaches[t] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      // residual arc u->v exists iff the paired arc stored at v points to u with spare capacity
      for (auto id : adj_[v]) {
        const auto& reverse = arcs_[id ^ 1];
        std::size_t u = arcs_[id].to;
        if (!reaches[u] && reverse.cap - reverse.flow > 0) {
          reaches[u] = true;
          stack.push_back(u);
        }
      }
    }
    for (std::size_t i = 0; i < reaches.size(); ++i) reaches[i] = !reaches[i];
    return reaches;
  }

  Rational cut_capacity(const std::vector<bool>& source_side) const {
    Rational sum;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (!source_side[u]) continue;
      for (auto id : adj_[u])
        if ((id & 1) == 0 && !source_side[arcs_[id].to]) sum += arcs_[id].cap;
    }
    return sum;
  }

 private:
  struct Arc {
    std::size_t to;
    Rational cap;
    Rational flow;
  };

  bool build_levels(std::size_t s, std::size_t t) {
    level_.assign(adj_.size(), -1);
    std::queue<std::size_t> queue;
    level_[s] = 0;
    queue.push(s);
    while (!queue.empty()) {
      auto u = queue.front();
      queue.pop();
      for (auto id : adj_[u]) {
        const auto& a = arcs_[id];
        if (level_[a.to] < 0 && a.cap - a.flow > 0) {
          level_[a.to] = level_[u] + 1;
          queue.push(a.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  // limit < 0 means unbounded
  Rational augment(std::size_t u, std::size_t t, const Rational& limit) {
    if (u == t) return limit;
    for (auto& i = next_[u]; i < adj_[u].size(); ++i) {
      auto id = adj_[u][i];
      auto& a = arcs_[id];
      Rational spare = a.cap - a.flow;
      if (spare <= 0 || level_[a.to] != level_[u] + 1) continue;
      Rational bound = (limit < 0 || spare < limit) ? spare : limit;
      Rational pushed = augment(a.to, t, bound);
      if (pushed > 0) {
        a.flow += pushed;
        arcs_[id ^ 1].flow -= pushed;
        return pushed;
      }
    }
    return Rational(0);
  }

  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

/// Source -> left nodes -> right nodes -> sink, with uncapacitated middle arcs.
struct BipartiteNetwork {
  std::vector<Rational> left_caps;
  std::vector<Rational> right_caps;
  std::vector<std::vector<std::size_t>> arcs;  // arcs[left] = right neighbours
};

struct BipartiteFlow {
  Rational value;
  std::vector<std::vector<Rational>> flow;  // parallel to BipartiteNetwork::arcs
  std::vector<bool> left_source_side;      // smallest min cut
  std::vector<bool> right_source_side;
  std::vector<bool> left_max_source_side;  // largest min cut
  std::vector<bool> right_max_source_side;
};

inline BipartiteFlow max_flow(const BipartiteNetwork& net) {
  const std::size_t L = net.left_caps.size(), R = net.right_caps.size();
  const std::size_t s = L + R, t = L + R + 1;
  FlowGraph g(L + R + 2);
  Rational big(1);
  for (const auto& c : net.left_caps) big += c;

  std::vector<std::size_t> source_arcs, sink_arcs;
  for (std::size_t i = 0; i < L; ++i) source_arcs.push_back(g.add_arc(s, i, net.left_caps[i]));
  std::vector<std::vector<std::size_t>> middle(L);
  for (std::size_t i = 0; i < L; ++i)
    for (auto j : net.arcs[i]) middle[i].push_back(g.add_arc(i, L + j, big));
  for (std::size_t j = 0; j < R; ++j) sink_arcs.push_back(g.add_arc(L + j, t, net.right_caps[j]));

  BipartiteFlow out;
  out.value = g.max_flow(s, t);
  out.flow.resize(L);
  for (std::size_t i = 0; i < L; ++i)
    for (auto id : middle[i]) out.flow[i].push_back(g.flow(id));

  auto small = g.reachable_from(s);
  auto large = g.cannot_reach(t);
#ifndef NDEBUG
  assert(g.cut_capacity(small) == out.value);
  assert(g.cut_capacity(large) == out.value);
#endif
  out.left_source_side.assign(small.begin(), small.begin() + static_cast<std::ptrdiff_t>(L));
  out.right_source_side.assign(small.begin() + static_cast<std::ptrdiff_t>(L), small.begin() + static_cast<std::ptrdiff_t>(L + R));
  out.left_max_source_side.assign(large.begin(), large.begin() + static_cast<std::ptrdiff_t>(L));
  out.right_max_source_side.assign(large.begin() + static_cast<std::ptrdiff_t>(L), large.begin() + static_cast<std::ptrdiff_t>(L + R));
  return out;
}

}  // namespace fairslice

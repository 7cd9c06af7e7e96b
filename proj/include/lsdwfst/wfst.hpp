// lsdwfst/wfst.hpp

// Copyright 2026  lsdwfst authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lsdwfst/log.hpp"
#include "lsdwfst/symbol_table.hpp"
#include "lsdwfst/weight.hpp"

namespace lsdwfst {

using StateId = std::int32_t;
using ArcIndex = std::uint32_t;
inline constexpr StateId kNoState = -1;

struct Arc {
  StateId src = kNoState;
  StateId dst = kNoState;
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight weight;

  bool is_epsilon() const { return ilabel == kEpsilon; }
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Immutable transducer with arcs stored contiguously and grouped by source
/// state. Within a state arcs are sorted by (ilabel, dst), so the epsilon arcs
/// of a state always form a prefix of its arc range.
class Wfst {
 public:
  Wfst() = default;

  StateId num_states() const { return static_cast<StateId>(finals_.size()); }
  std::size_t num_arcs() const { return arcs_.size(); }
  StateId start() const { return start_; }

  std::span<const Arc> arcs() const { return arcs_; }

  /// Arcs leaving `s`, in stored order. Throws std::out_of_range for bad ids.
  std::span<const Arc> out_arcs(StateId s) const {
    check_state(s);
    return {arcs_.data() + offsets_[s], arcs_.data() + offsets_[s + 1]};
  }
  /// Global index (into arcs()) of the first arc leaving `s`.
  ArcIndex arc_offset(StateId s) const {
    check_state(s);
    return offsets_[s];
  }
  std::size_t out_degree(StateId s) const {
    check_state(s);
    return offsets_[s + 1] - offsets_[s];
  }
  std::size_t num_epsilon_arcs(StateId s) const {
    check_state(s);
    return eps_end_[s] - offsets_[s];
  }
  std::span<const Arc> epsilon_arcs(StateId s) const {
    check_state(s);
    return {arcs_.data() + offsets_[s], arcs_.data() + eps_end_[s]};
  }
  std::span<const Arc> emitting_arcs(StateId s) const {
    check_state(s);
    return {arcs_.data() + eps_end_[s], arcs_.data() + offsets_[s + 1]};
  }
  ArcIndex emitting_offset(StateId s) const {
    check_state(s);
    return eps_end_[s];
  }

  Weight final_weight(StateId s) const {
    check_state(s);
    return finals_[s];
  }
  bool is_final(StateId s) const { return final_weight(s).is_finite(); }

  /// Arcs entering `s` (linear scan; meant for inspection, not search).
  std::vector<Arc> incoming_arcs(StateId s) const {
    check_state(s);
    std::vector<Arc> in;
    for (const Arc& a : arcs_)
      if (a.dst == s) in.push_back(a);
    return in;
  }

  Label max_ilabel() const { return max_ilabel_; }
  bool has_epsilon_arcs() const { return num_epsilon_ > 0; }

  /// Topological rank of each state in the epsilon-only subgraph, or an empty
  /// vector when that subgraph has a cycle.
  const std::vector<std::int32_t>& epsilon_topo_rank() const { return eps_rank_; }
  bool epsilon_subgraph_acyclic() const { return !eps_rank_.empty() || num_states() == 0; }

  friend bool operator==(const Wfst& a, const Wfst& b) {
    return a.start_ == b.start_ && a.arcs_ == b.arcs_ && a.finals_ == b.finals_;
  }

 private:
  friend class WfstBuilder;

  void check_state(StateId s) const {
    if (s < 0 || s >= num_states())
      throw std::out_of_range("state id " + std::to_string(s) + " out of range [0, " +
                              std::to_string(num_states()) + ")");
  }

  StateId start_ = kNoState;
  std::vector<Arc> arcs_;
  std::vector<ArcIndex> offsets_{0};
  std::vector<ArcIndex> eps_end_;
  std::vector<Weight> finals_;
  std::vector<std::int32_t> eps_rank_;
  Label max_ilabel_ = 0;
  std::size_t num_epsilon_ = 0;
};

/// Mutable staging area; Build() produces the sorted, offset-indexed Wfst.
class WfstBuilder {
 public:
  StateId add_state() {
    finals_.push_back(Weight::Zero());
    return static_cast<StateId>(finals_.size()) - 1;
  }
  void reserve_states(StateId n) {
    while (static_cast<StateId>(finals_.size()) < n) add_state();
  }
  void set_start(StateId s) {
    reserve_states(s + 1);
    start_ = s;
  }
  void set_final(StateId s, Weight w = Weight::One()) {
    reserve_states(s + 1);
    finals_[s] = w;
  }
  void add_arc(StateId src, StateId dst, Label ilabel, Label olabel, Weight w) {
    if (src < 0 || dst < 0) throw std::invalid_argument("negative state id");
    if (ilabel < 0 || olabel < 0) throw std::invalid_argument("negative label");
    reserve_states(std::max(src, dst) + 1);
    arcs_.push_back({src, dst, ilabel, olabel, w});
  }
  StateId num_states() const { return static_cast<StateId>(finals_.size()); }

  Wfst Build() && {
    Wfst w;
    const StateId n = num_states();
    if (n > 0 && (start_ < 0 || start_ >= n)) throw std::invalid_argument("start state not set");
    std::stable_sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
      return std::tie(a.src, a.ilabel, a.dst) < std::tie(b.src, b.ilabel, b.dst);
    });
    if (arcs_.size() > std::numeric_limits<ArcIndex>::max() / 2)
      throw std::length_error("too many arcs");
    w.start_ = n > 0 ? start_ : kNoState;
    w.finals_ = std::move(finals_);
    w.arcs_ = std::move(arcs_);
    w.offsets_.assign(n + 1, 0);
    w.eps_end_.assign(n, 0);
    for (const Arc& a : w.arcs_) {
      ++w.offsets_[a.src + 1];
      w.max_ilabel_ = std::max(w.max_ilabel_, a.ilabel);
      if (a.is_epsilon()) ++w.num_epsilon_;
    }
    for (StateId s = 0; s < n; ++s) w.offsets_[s + 1] += w.offsets_[s];
    for (StateId s = 0; s < n; ++s) {
      ArcIndex e = w.offsets_[s];
      while (e < w.offsets_[s + 1] && w.arcs_[e].is_epsilon()) ++e;
      w.eps_end_[s] = e;
    }
    w.eps_rank_ = EpsilonTopoRank(w);
    if (n > 0 && std::none_of(w.finals_.begin(), w.finals_.end(),
                              [](Weight f) { return f.is_finite(); }))
      LSDWFST_WARN << "WFST has no final state; decoding will report non-final results";
    return w;
  }

 private:
  // Kahn's algorithm over epsilon arcs; empty result means a cycle exists.
  static std::vector<std::int32_t> EpsilonTopoRank(const Wfst& w) {
    const StateId n = w.num_states();
    std::vector<std::int32_t> indeg(n, 0);
    for (const Arc& a : w.arcs_)
      if (a.is_epsilon()) ++indeg[a.dst];
    std::vector<StateId> queue;
    for (StateId s = 0; s < n; ++s)
      if (indeg[s] == 0) queue.push_back(s);
    std::vector<std::int32_t> rank(n, -1);
    std::int32_t next = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      StateId s = queue[i];
      rank[s] = next++;
      for (const Arc& a : w.epsilon_arcs(s))
        if (--indeg[a.dst] == 0) queue.push_back(a.dst);
    }
    if (next != n) return {};
    return rank;
  }

  StateId start_ = 0;
  std::vector<Arc> arcs_;
  std::vector<Weight> finals_;
};

/// Result of the epsilon-cycle check: empty `cycle` means ok.
struct EpsilonCycleReport {
  std::vector<StateId> cycle;  // states in traversal order, first state not repeated
  double total_weight = 0.0;
  bool ok() const { return cycle.empty(); }
};

namespace detail {

// Tarjan SCC over epsilon arcs; returns component id per state.
inline std::vector<std::int32_t> EpsilonSccs(const Wfst& w, std::int32_t* num_components) {
  const StateId n = w.num_states();
  std::vector<std::int32_t> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<char> on_stack(n, 0);
  std::vector<StateId> stack;
  std::int32_t counter = 0, ncomp = 0;
  struct Frame {
    StateId s;
    std::size_t next_arc;
  };
  std::vector<Frame> call;
  for (StateId root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      auto eps = w.epsilon_arcs(f.s);
      if (f.next_arc < eps.size()) {
        StateId d = eps[f.next_arc++].dst;
        if (index[d] < 0) {
          index[d] = low[d] = counter++;
          stack.push_back(d);
          on_stack[d] = 1;
          call.push_back({d, 0});
        } else if (on_stack[d]) {
          low[f.s] = std::min(low[f.s], index[d]);
        }
        continue;
      }
      StateId s = f.s;
      call.pop_back();
      if (!call.empty()) low[call.back().s] = std::min(low[call.back().s], low[s]);
      if (low[s] == index[s]) {
        StateId x;
        do {
          x = stack.back();
          stack.pop_back();
          on_stack[x] = 0;
          comp[x] = ncomp;
        } while (x != s);
        ++ncomp;
      }
    }
  }
  *num_components = ncomp;
  return comp;
}

// Finds a cycle of total weight <= 0 inside one strongly connected epsilon
// component using Karp's minimum-mean-cycle recurrence.
inline EpsilonCycleReport NonPositiveCycleInComponent(const Wfst& w,
                                                      const std::vector<StateId>& members,
                                                      const std::vector<std::int32_t>& comp,
                                                      std::int32_t c) {
  const std::size_t k = members.size();
  std::vector<std::int32_t> local(w.num_states(), -1);
  for (std::size_t i = 0; i < k; ++i) local[members[i]] = static_cast<std::int32_t>(i);
  struct E {
    std::int32_t u, v;
    double wt;
  };
  std::vector<E> edges;
  for (StateId s : members)
    for (const Arc& a : w.epsilon_arcs(s))
      if (comp[a.dst] == c) edges.push_back({local[s], local[a.dst], a.weight.value()});
  // dist[j][v]: min weight of a walk with exactly j edges from members[0] to v.
  std::vector<std::vector<double>> dist(k + 1, std::vector<double>(k, kInfCost));
  std::vector<std::vector<std::int32_t>> pred(k + 1, std::vector<std::int32_t>(k, -1));
  dist[0][0] = 0.0;
  for (std::size_t j = 1; j <= k; ++j)
    for (const E& e : edges)
      if (dist[j - 1][e.u] < kInfCost && dist[j - 1][e.u] + e.wt < dist[j][e.v]) {
        dist[j][e.v] = dist[j - 1][e.u] + e.wt;
        pred[j][e.v] = e.u;
      }
  double best_mean = kInfCost;
  std::int32_t best_v = -1;
  for (std::size_t v = 0; v < k; ++v) {
    if (dist[k][v] == kInfCost) continue;
    double worst = -kInfCost;
    for (std::size_t j = 0; j < k; ++j)
      if (dist[j][v] < kInfCost)
        worst = std::max(worst, (dist[k][v] - dist[j][v]) / static_cast<double>(k - j));
    if (worst < best_mean) {
      best_mean = worst;
      best_v = static_cast<std::int32_t>(v);
    }
  }
  EpsilonCycleReport report;
  if (best_v < 0 || best_mean > 0.0) return report;
  // The k-edge walk to best_v repeats a vertex; pick a repeated segment with
  // weight <= 0 (a minimum mean cycle lies on this walk).
  std::vector<std::int32_t> walk(k + 1);
  walk[k] = best_v;
  for (std::size_t j = k; j > 0; --j) walk[j - 1] = pred[j][walk[j]];
  std::vector<std::int32_t> seen(k, -1);
  auto seg_weight = [&](std::size_t from, std::size_t to) {
    return dist[to][walk[to]] - dist[from][walk[from]];
  };
  std::vector<std::int32_t> fallback;
  for (std::size_t j = 0; j <= k; ++j) {
    std::int32_t v = walk[j];
    if (seen[v] >= 0) {
      std::size_t from = static_cast<std::size_t>(seen[v]);
      double wt = seg_weight(from, j);
      if (wt <= 0.0) {
        for (std::size_t i = from; i < j; ++i) report.cycle.push_back(members[walk[i]]);
        report.total_weight = wt;
        return report;
      }
    }
    seen[v] = static_cast<std::int32_t>(j);
  }
  // Rounding can hide the segment; report the whole component.
  report.cycle = members;
  report.total_weight = best_mean * static_cast<double>(k);
  return report;
}

}  // namespace detail

/// Reports one cycle made only of epsilon arcs whose total weight is <= 0.
/// Cycles of positive weight are accepted (they converge under relaxation).
inline EpsilonCycleReport validate_epsilon_acyclic(const Wfst& w) {
  if (w.epsilon_subgraph_acyclic()) return {};
  std::int32_t ncomp = 0;
  auto comp = detail::EpsilonSccs(w, &ncomp);
  std::vector<std::vector<StateId>> members(ncomp);
  for (StateId s = 0; s < w.num_states(); ++s) members[comp[s]].push_back(s);
  for (std::int32_t c = 0; c < ncomp; ++c) {
    const auto& m = members[c];
    if (m.size() == 1) {
      for (const Arc& a : w.epsilon_arcs(m[0]))
        if (a.dst == m[0] && a.weight.value() <= 0.0) return {{m[0]}, a.weight.value()};
      continue;
    }
    auto report = detail::NonPositiveCycleInComponent(w, m, comp, c);
    if (!report.ok()) return report;
  }
  return {};
}

}  // namespace lsdwfst

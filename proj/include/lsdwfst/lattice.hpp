// lsdwfst/lattice.hpp

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
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lsdwfst/search.hpp"
#include "lsdwfst/wfst.hpp"
#include "lsdwfst/wfst_text.hpp"

namespace lsdwfst {

using NodeId = std::int32_t;

struct LatticeNode {
  StateId state = kNoState;
  std::uint32_t step = 0;
  Weight final_weight = Weight::Zero();

  bool is_final() const { return final_weight.is_finite(); }
  friend bool operator==(const LatticeNode&, const LatticeNode&) = default;
};

struct LatticeArc {
  NodeId from = 0;
  NodeId to = 0;
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  Weight graph_cost;
  Weight acoustic_cost;

  double cost() const { return graph_cost.value() + acoustic_cost.value(); }
  friend bool operator==(const LatticeArc&, const LatticeArc&) = default;
};

/// Acyclic raw lattice over (state, step) nodes. Node ids are a topological
/// order and node 0 is the start node; arcs are sorted by source node.
class Lattice {
 public:
  Lattice() = default;
  Lattice(std::vector<LatticeNode> nodes, std::vector<LatticeArc> arcs)
      : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
    std::stable_sort(arcs_.begin(), arcs_.end(),
                     [](const LatticeArc& a, const LatticeArc& b) { return a.from < b.from; });
    offsets_.assign(nodes_.size() + 1, 0);
    for (const LatticeArc& a : arcs_) {
      if (a.from < 0 || a.to < 0 || a.from >= num_nodes() || a.to >= num_nodes())
        throw std::invalid_argument("lattice arc references a missing node");
      if (a.to <= a.from) throw std::invalid_argument("lattice arcs must go forward in node order");
      ++offsets_[a.from + 1];
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) offsets_[i + 1] += offsets_[i];
  }

  bool empty() const { return nodes_.empty(); }
  NodeId num_nodes() const { return static_cast<NodeId>(nodes_.size()); }
  std::size_t num_arcs() const { return arcs_.size(); }
  const std::vector<LatticeNode>& nodes() const { return nodes_; }
  const std::vector<LatticeArc>& arcs() const { return arcs_; }
  const LatticeNode& node(NodeId n) const { return nodes_.at(n); }

  std::span<const LatticeArc> out_arcs(NodeId n) const {
    return {arcs_.data() + offsets_.at(n), arcs_.data() + offsets_.at(n + 1)};
  }
  std::size_t arc_offset(NodeId n) const { return offsets_.at(n); }

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.nodes_ == b.nodes_ && a.arcs_ == b.arcs_;
  }

 private:
  std::vector<LatticeNode> nodes_;
  std::vector<LatticeArc> arcs_;
  std::vector<std::size_t> offsets_{0};
};

/// Keeps only nodes on some start-to-final path, preserving node order.
inline Lattice trim_lattice(const Lattice& l, NodeId start = 0) {
  const NodeId n = l.num_nodes();
  if (n == 0 || start < 0 || start >= n) return {};
  std::vector<char> fwd(n, 0), bwd(n, 0);
  fwd[start] = 1;
  for (NodeId i = start; i < n; ++i)
    if (fwd[i])
      for (const LatticeArc& a : l.out_arcs(i)) fwd[a.to] = 1;
  for (NodeId i = n - 1; i >= 0; --i) {
    if (l.node(i).is_final()) bwd[i] = 1;
    for (const LatticeArc& a : l.out_arcs(i))
      if (bwd[a.to]) bwd[i] = 1;
  }
  if (!(fwd[start] && bwd[start])) return {};
  std::vector<NodeId> remap(n, -1);
  std::vector<LatticeNode> nodes;
  for (NodeId i = 0; i < n; ++i)
    if (fwd[i] && bwd[i]) {
      remap[i] = static_cast<NodeId>(nodes.size());
      nodes.push_back(l.node(i));
    }
  std::vector<LatticeArc> arcs;
  for (const LatticeArc& a : l.arcs())
    if (remap[a.from] >= 0 && remap[a.to] >= 0) {
      LatticeArc b = a;
      b.from = remap[a.from];
      b.to = remap[a.to];
      arcs.push_back(b);
    }
  return Lattice(std::move(nodes), std::move(arcs));
}

/// Builds the raw lattice incrementally from step snapshots. Nodes are the
/// surviving (state, step) pairs; emitting arcs join consecutive steps and
/// epsilon arcs join survivors of the same step.
class LatticeBuilder : public LatticeSink {
 public:
  explicit LatticeBuilder(const Wfst& w)
      : wfst_(w), prev_map_(w.num_states(), -1), cur_map_(w.num_states(), -1) {}

  void add_step(StepSnapshot snap) override {
    if (snap.step != expected_step_)
      throw std::logic_error("lattice snapshots must arrive in step order");
    ++expected_step_;
    for (StateId s : prev_states_) prev_map_[s] = -1;
    std::swap(prev_map_, cur_map_);
    prev_states_ = std::move(cur_states_);
    cur_states_.clear();

    // Order within the step must be topological for the epsilon arcs.
    const auto& rank = wfst_.epsilon_topo_rank();
    std::vector<std::size_t> order(snap.tokens.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](std::size_t i) {
      return std::make_tuple(snap.tokens[i].cost, snap.eps_depth[i], snap.tokens[i].state);
    };
    if (!rank.empty())
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return rank[snap.tokens[a].state] < rank[snap.tokens[b].state];
      });
    else
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    for (std::size_t k = 0; k < order.size(); ++k) {
      const Token& t = snap.tokens[order[k]];
      cur_map_[t.state] = static_cast<NodeId>(nodes_.size());
      cur_states_.push_back(t.state);
      nodes_.push_back({t.state, snap.step, Weight::Zero()});
    }
    if (snap.step > 0) {
      for (StateId s : prev_states_) {
        for (const Arc& a : wfst_.emitting_arcs(s)) {
          const double ac = snap.frame_costs[a.ilabel];
          if (ac == kInfCost || cur_map_[a.dst] < 0) continue;
          arcs_.push_back({prev_map_[s], cur_map_[a.dst], a.ilabel, a.olabel, a.weight, Weight(ac)});
        }
      }
    }
    if (wfst_.has_epsilon_arcs()) {
      for (std::size_t i = 0; i < snap.tokens.size(); ++i) {
        const StateId s = snap.tokens[i].state;
        for (const Arc& a : wfst_.epsilon_arcs(s)) {
          const NodeId to = cur_map_[a.dst];
          if (to < 0) continue;
          // With epsilon cycles, keep only arcs that go forward in node order.
          if (rank.empty() && to <= cur_map_[s]) continue;
          arcs_.push_back({cur_map_[s], to, a.ilabel, a.olabel, a.weight, Weight::One()});
        }
      }
    }
    last_step_begin_ = nodes_.size() - snap.tokens.size();
  }

  /// Marks final nodes of the last step and returns the trimmed lattice.
  Lattice finish() {
    if (nodes_.empty()) return {};
    for (std::size_t i = last_step_begin_; i < nodes_.size(); ++i)
      nodes_[i].final_weight = wfst_.final_weight(nodes_[i].state);
    NodeId start = -1;
    for (NodeId i = 0; i < static_cast<NodeId>(nodes_.size()); ++i)
      if (nodes_[i].step == 0 && nodes_[i].state == wfst_.start()) start = i;
    Lattice raw(std::move(nodes_), std::move(arcs_));
    nodes_.clear();
    arcs_.clear();
    return trim_lattice(raw, start);
  }

 private:
  const Wfst& wfst_;
  std::vector<NodeId> prev_map_, cur_map_;
  std::vector<StateId> prev_states_, cur_states_;
  std::vector<LatticeNode> nodes_;
  std::vector<LatticeArc> arcs_;
  std::size_t last_step_begin_ = 0;
  std::uint32_t expected_step_ = 0;
};

/// Stores snapshots for a later build_lattice call.
class LatticeRecorder : public LatticeSink {
 public:
  void add_step(StepSnapshot snap) override { steps.push_back(std::move(snap)); }
  std::vector<StepSnapshot> steps;
};

/// Raw lattice holding every path through the recorded survivors.
inline Lattice build_lattice(const Wfst& w, const std::vector<StepSnapshot>& trace) {
  LatticeBuilder builder(w);
  for (const StepSnapshot& s : trace) builder.add_step(s);
  return builder.finish();
}

namespace detail {

// Min cost from the start node to each node.
inline std::vector<double> ForwardCosts(const Lattice& l) {
  std::vector<double> alpha(l.num_nodes(), kInfCost);
  if (l.empty()) return alpha;
  alpha[0] = 0.0;
  for (NodeId i = 0; i < l.num_nodes(); ++i) {
    if (alpha[i] == kInfCost) continue;
    for (const LatticeArc& a : l.out_arcs(i))
      alpha[a.to] = std::min(alpha[a.to], alpha[i] + a.graph_cost.value() + a.acoustic_cost.value());
  }
  return alpha;
}

// Min cost from each node to the end, final weight included.
inline std::vector<double> BackwardCosts(const Lattice& l) {
  std::vector<double> beta(l.num_nodes(), kInfCost);
  for (NodeId i = l.num_nodes() - 1; i >= 0; --i) {
    double b = l.node(i).final_weight.value();
    for (const LatticeArc& a : l.out_arcs(i))
      b = std::min(b, a.graph_cost.value() + a.acoustic_cost.value() + beta[a.to]);
    beta[i] = b;
  }
  return beta;
}

}  // namespace detail

inline constexpr double kLatticePruneTolerance = 1e-9;

/// Keeps the arcs (and final weights) lying on some path whose cost is within
/// `lattice_beam` of the best path, then trims.
inline Lattice prune_lattice(const Lattice& l, double lattice_beam) {
  if (!(lattice_beam >= 0.0)) throw std::invalid_argument("lattice beam must be >= 0");
  if (l.empty()) return {};
  auto alpha = detail::ForwardCosts(l);
  auto beta = detail::BackwardCosts(l);
  const double best = beta[0];
  if (best == kInfCost) return {};
  const double limit = best + lattice_beam + kLatticePruneTolerance;
  std::vector<LatticeNode> nodes = l.nodes();
  for (NodeId i = 0; i < l.num_nodes(); ++i)
    if (nodes[i].is_final() && !(alpha[i] + nodes[i].final_weight.value() <= limit))
      nodes[i].final_weight = Weight::Zero();
  std::vector<LatticeArc> arcs;
  for (const LatticeArc& a : l.arcs())
    if (alpha[a.from] + a.graph_cost.value() + a.acoustic_cost.value() + beta[a.to] <= limit)
      arcs.push_back(a);
  return trim_lattice(Lattice(std::move(nodes), std::move(arcs)));
}

struct LatticePath {
  double cost = kInfCost;
  std::vector<Label> olabels;
  std::vector<Label> ilabels;
  std::vector<NodeId> nodes;
};

/// Cheapest start-to-final path. Equal-cost predecessors are resolved by the
/// lower predecessor state id, then the lower arc index.
inline LatticePath lattice_best_path(const Lattice& l) {
  if (l.empty()) throw std::invalid_argument("lattice_best_path: empty lattice");
  const NodeId n = l.num_nodes();
  std::vector<double> alpha(n, kInfCost);
  std::vector<std::size_t> back(n, SIZE_MAX);
  alpha[0] = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    if (alpha[i] == kInfCost) continue;
    const std::size_t base = l.arc_offset(i);
    auto out = l.out_arcs(i);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const LatticeArc& a = out[k];
      const double c = alpha[i] + a.graph_cost.value() + a.acoustic_cost.value();
      bool take = c < alpha[a.to];
      if (!take && c == alpha[a.to] && back[a.to] != SIZE_MAX) {
        const LatticeArc& cur = l.arcs()[back[a.to]];
        take = std::make_pair(l.node(i).state, base + k) <
               std::make_pair(l.node(cur.from).state, back[a.to]);
      }
      if (take) {
        alpha[a.to] = c;
        back[a.to] = base + k;
      }
    }
  }
  NodeId best = -1;
  double best_cost = kInfCost;
  for (NodeId i = 0; i < n; ++i) {
    if (!l.node(i).is_final() || alpha[i] == kInfCost) continue;
    const double c = alpha[i] + l.node(i).final_weight.value();
    if (best < 0 || c < best_cost ||
        (c == best_cost && l.node(i).state < l.node(best).state)) {
      best = i;
      best_cost = c;
    }
  }
  if (best < 0) throw std::invalid_argument("lattice_best_path: no final node reachable");
  LatticePath path;
  path.cost = best_cost;
  for (NodeId i = best; i != 0; i = l.arcs()[back[i]].from) {
    path.nodes.push_back(i);
    const LatticeArc& a = l.arcs()[back[i]];
    if (a.olabel != kEpsilon) path.olabels.push_back(a.olabel);
    if (a.ilabel != kEpsilon) path.ilabels.push_back(a.ilabel);
  }
  path.nodes.push_back(0);
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.olabels.begin(), path.olabels.end());
  std::reverse(path.ilabels.begin(), path.ilabels.end());
  return path;
}

/// Text form:
///   LATTICE nodes=<n> arcs=<m>
///   N id state step [final <w>]
///   A from to ilabel olabel graph_cost acoustic_cost
inline void write_lattice_text(std::ostream& out, const Lattice& l) {
  out << "LATTICE nodes=" << l.num_nodes() << " arcs=" << l.num_arcs() << '\n';
  for (NodeId i = 0; i < l.num_nodes(); ++i) {
    const LatticeNode& nd = l.node(i);
    out << "N " << i << ' ' << nd.state << ' ' << nd.step;
    if (nd.is_final()) out << " final " << detail::FormatCost(nd.final_weight.value());
    out << '\n';
  }
  for (const LatticeArc& a : l.arcs())
    out << "A " << a.from << ' ' << a.to << ' ' << a.ilabel << ' ' << a.olabel << ' '
        << detail::FormatCost(a.graph_cost.value()) << ' '
        << detail::FormatCost(a.acoustic_cost.value()) << '\n';
}

inline Lattice parse_lattice_text(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!detail::SplitFields(line).empty()) return true;
    }
    return false;
  };
  auto index = [&](std::string_view f) {
    std::int64_t v;
    if (!detail::ParseIndex(f, &v)) throw ParseError(line_no, "bad integer '" + std::string(f) + "'");
    return v;
  };
  auto cost = [&](std::string_view f) {
    double v;
    if (!detail::ParseDouble(f, &v)) throw ParseError(line_no, "bad cost '" + std::string(f) + "'");
    return Weight(v);
  };
  if (!next_line()) throw ParseError(line_no, "missing LATTICE header");
  auto h = detail::SplitFields(line);
  if (h.size() != 3 || h[0] != "LATTICE" || h[1].substr(0, 6) != "nodes=" || h[2].substr(0, 5) != "arcs=")
    throw ParseError(line_no, "expected 'LATTICE nodes=<n> arcs=<m>'");
  const auto n = index(h[1].substr(6));
  const auto m = index(h[2].substr(5));
  std::vector<LatticeNode> nodes;
  std::vector<LatticeArc> arcs;
  while (next_line()) {
    auto f = detail::SplitFields(line);
    if (f[0] == "N") {
      if (f.size() != 4 && !(f.size() == 6 && f[4] == "final"))
        throw ParseError(line_no, "expected 'N id state step [final <w>]'");
      if (index(f[1]) != static_cast<std::int64_t>(nodes.size()))
        throw ParseError(line_no, "node ids must be consecutive from 0");
      LatticeNode nd;
      nd.state = static_cast<StateId>(index(f[2]));
      nd.step = static_cast<std::uint32_t>(index(f[3]));
      if (f.size() == 6) nd.final_weight = cost(f[5]);
      nodes.push_back(nd);
    } else if (f[0] == "A") {
      if (f.size() != 7) throw ParseError(line_no, "expected 'A from to ilabel olabel graph acoustic'");
      arcs.push_back({static_cast<NodeId>(index(f[1])), static_cast<NodeId>(index(f[2])),
                      static_cast<Label>(index(f[3])), static_cast<Label>(index(f[4])), cost(f[5]),
                      cost(f[6])});
    } else {
      throw ParseError(line_no, "unknown record '" + std::string(f[0]) + "'");
    }
  }
  if (static_cast<std::int64_t>(nodes.size()) != n || static_cast<std::int64_t>(arcs.size()) != m)
    throw ParseError(line_no, "record counts do not match the LATTICE header");
  try {
    return Lattice(std::move(nodes), std::move(arcs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
}

}  // namespace lsdwfst

// lsdwfst/search.hpp

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
#include <utility>
#include <vector>

#include "lsdwfst/posterior.hpp"
#include "lsdwfst/weight.hpp"
#include "lsdwfst/wfst.hpp"

// Pieces shared by the serial and parallel search engines: configuration,
// tokens, the traceback arena, survivor pruning and final selection.

namespace lsdwfst {

enum class DecodeMode { kFsd, kLsd };

inline const char* ToString(DecodeMode m) { return m == DecodeMode::kFsd ? "fsd" : "lsd"; }

struct DecodeConfig {
  double beam = kInfCost;
  std::size_t max_active = std::numeric_limits<std::size_t>::max();
  double blank_threshold = 0.98;
  double acoustic_scale = 1.0;
  DecodeMode mode = DecodeMode::kLsd;

  void Check() const {
    if (!(beam >= 0.0)) throw std::invalid_argument("beam must be >= 0");
    if (max_active < 1) throw std::invalid_argument("max_active must be >= 1");
    if (!(acoustic_scale > 0.0) || !std::isfinite(acoustic_scale))
      throw std::invalid_argument("acoustic scale must be positive");
    if (std::isnan(blank_threshold)) throw std::invalid_argument("blank threshold is NaN");
  }
};

using TraceIndex = std::int32_t;
inline constexpr TraceIndex kNoTrace = -1;

struct Token {
  StateId state = kNoState;
  double cost = kInfCost;
  TraceIndex trace = kNoTrace;

  friend bool operator==(const Token&, const Token&) = default;
};

struct TraceRecord {
  TraceIndex prev = kNoTrace;
  StateId state = kNoState;
  Label ilabel = kEpsilon;
  Label olabel = kEpsilon;
  std::uint32_t step = 0;
  std::uint32_t eps_depth = 0;  // epsilon hops since the last emitting arc
  Weight arc_weight{};
  Weight acoustic{};

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Append-only backpointer store; `prev` always refers to an older record.
class TraceArena {
 public:
  TraceIndex add(const TraceRecord& r) {
    if (r.prev != kNoTrace && (r.prev < 0 || r.prev >= size()))
      throw std::logic_error("trace record must point to an older record");
    records_.push_back(r);
    return size() - 1;
  }
  const TraceRecord& operator[](TraceIndex i) const { return records_.at(i); }
  TraceIndex size() const { return static_cast<TraceIndex>(records_.size()); }
  void clear() { records_.clear(); }

  /// Drops records unreachable from `live` and rewrites their trace indices.
  /// Relative order of kept records is preserved.
  void compact(std::span<Token> live) {
    std::vector<char> keep(records_.size(), 0);
    for (const Token& t : live)
      for (TraceIndex i = t.trace; i != kNoTrace && !keep[i]; i = records_[i].prev) keep[i] = 1;
    std::vector<TraceIndex> remap(records_.size(), kNoTrace);
    TraceIndex next = 0;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (!keep[i]) continue;
      TraceRecord r = records_[i];
      if (r.prev != kNoTrace) r.prev = remap[r.prev];
      remap[i] = next;
      records_[next++] = r;
    }
    records_.resize(next);
    for (Token& t : live) t.trace = remap[t.trace];
  }

  /// Compacts once the arena has grown well past its last compacted size.
  void maybe_compact(std::span<Token> live) {
    if (records_.size() < compact_at_) return;
    compact(live);
    compact_at_ = std::max<std::size_t>(kMinCompactSize, 2 * records_.size());
  }

 private:
  static constexpr std::size_t kMinCompactSize = 1 << 20;
  std::vector<TraceRecord> records_;
  std::size_t compact_at_ = kMinCompactSize;
};

struct DecodeResult {
  Weight total_cost = Weight::Zero();
  std::vector<Label> olabels;
  std::vector<Label> ilabels;
  std::size_t search_steps = 0;
  std::size_t tokens_expanded = 0;
  bool reached_final = false;
  bool search_died = false;  // every hypothesis was lost before the last frame
  StateId final_state = kNoState;

  friend bool operator==(const DecodeResult&, const DecodeResult&) = default;
};

/// One relaxation inside a search step. Candidates are compared by
/// (cost, arc index); arcs are stored grouped by ascending source state, so
/// this is the (cost, predecessor state, arc) total order.
struct Candidate {
  double cost = kInfCost;
  ArcIndex arc = kRootArc;
  TraceIndex pred_trace = kNoTrace;   // emitting: trace of the source token
  std::uint32_t pred_cand = kNoCand;  // epsilon: source candidate in this step
  double acoustic = 0.0;

  static constexpr ArcIndex kRootArc = std::numeric_limits<ArcIndex>::max();
  static constexpr std::uint32_t kNoCand = std::numeric_limits<std::uint32_t>::max();
};

inline bool Better(const Candidate& a, const Candidate& b) {
  return a.cost < b.cost || (a.cost == b.cost && a.arc < b.arc);
}

struct Survivor {
  StateId state;
  std::uint32_t cand;
  double cost;
};

/// Survivors of a finished step as handed to lattice generation.
struct StepSnapshot {
  std::uint32_t step = 0;
  std::vector<double> frame_costs;  // indexed by ilabel; empty for step 0
  std::vector<Token> tokens;        // ascending state id
  std::vector<std::uint32_t> eps_depth;
};

/// Receives one snapshot per search step, in order.
class LatticeSink {
 public:
  virtual ~LatticeSink() = default;
  virtual void add_step(StepSnapshot snapshot) = 0;
};

/// Per-label acoustic costs of frame `u`; index 0 (epsilon) is unused.
inline std::vector<double> FrameCosts(const PosteriorMatrix& p, std::size_t u, double scale) {
  std::vector<double> costs(p.num_labels() + 1, kInfCost);
  for (Label l = 1; l <= static_cast<Label>(p.num_labels()); ++l)
    costs[l] = acoustic_cost(p, u, l, scale).value();
  return costs;
}

inline void CheckCompatible(const Wfst& w, const PosteriorMatrix& p) {
  if (w.num_states() == 0) throw std::invalid_argument("empty WFST");
  if (static_cast<std::size_t>(w.max_ilabel()) > p.num_labels())
    throw std::invalid_argument("WFST input label " + std::to_string(w.max_ilabel()) +
                                " exceeds posterior label count " + std::to_string(p.num_labels()));
}

inline void CheckSearchable(const Wfst& w) {
  auto report = validate_epsilon_acyclic(w);
  if (!report.ok())
    throw std::invalid_argument("WFST has an epsilon cycle of non-positive weight through state " +
                                std::to_string(report.cycle.front()));
}

/// Beam then max-active pruning. Input and output are in ascending state order.
inline void PruneSurvivors(std::vector<Survivor>& survivors, const DecodeConfig& cfg) {
  if (survivors.empty()) return;
  double best = kInfCost;
  for (const Survivor& s : survivors) best = std::min(best, s.cost);
  const double cutoff = best + cfg.beam;
  std::erase_if(survivors, [cutoff](const Survivor& s) { return !(s.cost <= cutoff); });
  if (survivors.size() > cfg.max_active) {
    auto by_cost = [](const Survivor& a, const Survivor& b) {
      return std::tie(a.cost, a.state) < std::tie(b.cost, b.state);
    };
    std::nth_element(survivors.begin(), survivors.begin() + static_cast<std::ptrdiff_t>(cfg.max_active),
                     survivors.end(), by_cost);
    survivors.resize(cfg.max_active);
    std::sort(survivors.begin(), survivors.end(),
              [](const Survivor& a, const Survivor& b) { return a.state < b.state; });
  }
}

/// Turns the winning candidates of a step into trace records and tokens.
/// Epsilon chains are followed back to their emitting (or root) candidate;
/// each candidate gets at most one record. Processing order is ascending
/// state id, so the resulting trace indices depend only on the winners.
inline std::vector<Token> MaterializeSurvivors(const Wfst& w, std::span<const Candidate> pool,
                                               const std::vector<Survivor>& survivors,
                                               std::uint32_t step, TraceArena& arena,
                                               std::vector<std::uint32_t>* eps_depth = nullptr) {
  std::vector<Token> tokens;
  tokens.reserve(survivors.size());
  if (eps_depth) eps_depth->clear();
  std::vector<TraceIndex> memo(pool.size(), kNoTrace);  // candidate -> record
  std::vector<std::uint32_t> chain;
  for (const Survivor& s : survivors) {
    chain.clear();
    std::uint32_t c = s.cand;
    TraceIndex base = kNoTrace;
    // Walk back through in-step epsilon predecessors.
    while (true) {
      TraceIndex known = memo[c];
      if (known != kNoTrace) {
        base = known;
        break;
      }
      chain.push_back(c);
      if (pool[c].pred_cand == Candidate::kNoCand) break;
      c = pool[c].pred_cand;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const Candidate& cand = pool[*it];
      TraceRecord r;
      r.step = step;
      if (cand.arc == Candidate::kRootArc) {
        r.prev = cand.pred_trace;
        r.state = w.start();
      } else {
        const Arc& a = w.arcs()[cand.arc];
        r.state = a.dst;
        r.ilabel = a.ilabel;
        r.olabel = a.olabel;
        r.arc_weight = a.weight;
        r.acoustic = Weight(cand.acoustic);
        if (cand.pred_cand != Candidate::kNoCand) {
          r.prev = base;
          r.eps_depth = arena[base].eps_depth + 1;
        } else {
          r.prev = cand.pred_trace;
        }
      }
      base = arena.add(r);
      memo[*it] = base;
    }
    tokens.push_back({s.state, s.cost, base});
    if (eps_depth) eps_depth->push_back(arena[base].eps_depth);
  }
  return tokens;
}

struct FinalChoice {
  Token token;
  double total_cost = kInfCost;
  bool reached_final = false;
};

/// Adds final weights and returns the argmin over final states (ties: lower
/// state id). Without any final token, falls back to the cheapest token.
inline FinalChoice final_transition(const Wfst& w, std::span<const Token> live) {
  FinalChoice best;
  for (const Token& t : live) {
    Weight f = w.final_weight(t.state);
    if (!f.is_finite()) continue;
    double c = t.cost + f.value();
    if (!best.reached_final || c < best.total_cost ||
        (c == best.total_cost && t.state < best.token.state)) {
      best = {t, c, true};
    }
  }
  if (best.reached_final) return best;
  for (const Token& t : live)
    if (best.token.state == kNoState || t.cost < best.total_cost ||
        (t.cost == best.total_cost && t.state < best.token.state))
      best = {t, t.cost, false};
  return best;
}

/// Non-epsilon output and input labels along the trace, oldest first.
inline std::pair<std::vector<Label>, std::vector<Label>> backtrace(TraceIndex t,
                                                                   const TraceArena& arena) {
  std::vector<Label> ol, il;
  for (TraceIndex i = t; i != kNoTrace; i = arena[i].prev) {
    if (arena[i].olabel != kEpsilon) ol.push_back(arena[i].olabel);
    if (arena[i].ilabel != kEpsilon) il.push_back(arena[i].ilabel);
  }
  std::reverse(ol.begin(), ol.end());
  std::reverse(il.begin(), il.end());
  return {std::move(ol), std::move(il)};
}

inline DecodeResult FinishDecode(const Wfst& w, std::span<const Token> live, const TraceArena& arena,
                                 std::size_t steps, std::size_t expanded) {
  DecodeResult r;
  r.search_steps = steps;
  r.tokens_expanded = expanded;
  if (live.empty()) {
    r.search_died = true;
    return r;
  }
  FinalChoice best = final_transition(w, live);
  r.total_cost = Weight(best.total_cost);
  r.reached_final = best.reached_final;
  r.final_state = best.token.state;
  std::tie(r.olabels, r.ilabels) = backtrace(best.token.trace, arena);
  return r;
}

}  // namespace lsdwfst

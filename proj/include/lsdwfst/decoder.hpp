// lsdwfst/decoder.hpp

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
#include <span>
#include <vector>

#include "lsdwfst/posterior.hpp"
#include "lsdwfst/search.hpp"
#include "lsdwfst/wfst.hpp"

namespace lsdwfst {

namespace detail {

// Reference token passing over a dense per-state slot array. Each step relaxes
// the emitting arcs of the live tokens, then runs epsilon rounds: every round
// expands the states whose winner changed in the previous round, reading the
// winners as they stood when the round began.
class SerialSearch {
 public:
  SerialSearch(const Wfst& w, const DecodeConfig& cfg, TraceArena& arena)
      : wfst_(w), cfg_(cfg), arena_(arena), winner_(w.num_states(), Candidate::kNoCand),
        round_tag_(w.num_states(), 0) {}

  std::vector<Token> Initial(LatticeSink* sink) {
    BeginStep();
    Candidate root;
    root.cost = 0.0;
    Relax(wfst_.start(), Push(root));
    CloseEpsilon({wfst_.start()});
    return EndStep(0, {}, sink);
  }

  std::vector<Token> Step(std::span<const Token> live, std::span<const double> frame_costs,
                          std::uint32_t step, LatticeSink* sink) {
    BeginStep();
    std::vector<StateId> frontier;
    for (const Token& t : live) {
      ++expanded_;
      const ArcIndex base = wfst_.emitting_offset(t.state);
      auto arcs = wfst_.emitting_arcs(t.state);
      for (std::size_t i = 0; i < arcs.size(); ++i) {
        const Arc& a = arcs[i];
        const double ac = frame_costs[a.ilabel];
        if (ac == kInfCost) continue;
        Candidate c;
        c.cost = t.cost + a.weight.value() + ac;
        c.arc = base + static_cast<ArcIndex>(i);
        c.pred_trace = t.trace;
        c.acoustic = ac;
        if (Relax(a.dst, Push(c)) && round_tag_[a.dst] != round_) {
          round_tag_[a.dst] = round_;
          frontier.push_back(a.dst);
        }
      }
    }
    std::sort(frontier.begin(), frontier.end());
    CloseEpsilon(std::move(frontier));
    return EndStep(step, frame_costs, sink);
  }

  std::size_t tokens_expanded() const { return expanded_; }

 private:
  std::uint32_t Push(const Candidate& c) {
    pool_.push_back(c);
    return static_cast<std::uint32_t>(pool_.size() - 1);
  }

  bool Relax(StateId d, std::uint32_t idx) {
    std::uint32_t& w = winner_[d];
    if (w != Candidate::kNoCand && !Better(pool_[idx], pool_[w])) return false;
    if (w == Candidate::kNoCand) touched_.push_back(d);
    w = idx;
    return true;
  }

  void BeginStep() {
    pool_.clear();
    touched_.clear();
    ++round_;
  }

  void CloseEpsilon(std::vector<StateId> frontier) {
    if (!wfst_.has_epsilon_arcs()) return;
    std::vector<std::pair<StateId, std::uint32_t>> snapshot;
    while (!frontier.empty()) {
      snapshot.clear();
      for (StateId s : frontier) snapshot.emplace_back(s, winner_[s]);
      frontier.clear();
      ++round_;
      for (auto [s, cidx] : snapshot) {
        ++expanded_;
        const double cost = pool_[cidx].cost;
        const ArcIndex base = wfst_.arc_offset(s);
        auto eps = wfst_.epsilon_arcs(s);
        for (std::size_t i = 0; i < eps.size(); ++i) {
          Candidate c;
          c.cost = cost + eps[i].weight.value();
          c.arc = base + static_cast<ArcIndex>(i);
          c.pred_cand = cidx;
          const StateId d = eps[i].dst;
          if (Relax(d, Push(c)) && round_tag_[d] != round_) {
            round_tag_[d] = round_;
            frontier.push_back(d);
          }
        }
      }
      std::sort(frontier.begin(), frontier.end());
    }
  }

  std::vector<Token> EndStep(std::uint32_t step, std::span<const double> frame_costs,
                             LatticeSink* sink) {
    std::sort(touched_.begin(), touched_.end());
    std::vector<Survivor> survivors;
    survivors.reserve(touched_.size());
    for (StateId s : touched_) survivors.push_back({s, winner_[s], pool_[winner_[s]].cost});
    PruneSurvivors(survivors, cfg_);
    std::vector<std::uint32_t> depth;
    auto tokens = MaterializeSurvivors(wfst_, pool_, survivors, step, arena_, sink ? &depth : nullptr);
    for (StateId s : touched_) winner_[s] = Candidate::kNoCand;
    if (sink) {
      StepSnapshot snap;
      snap.step = step;
      snap.frame_costs.assign(frame_costs.begin(), frame_costs.end());
      snap.tokens = tokens;
      snap.eps_depth = std::move(depth);
      sink->add_step(std::move(snap));
    }
    return tokens;
  }

  const Wfst& wfst_;
  const DecodeConfig& cfg_;
  TraceArena& arena_;
  std::vector<std::uint32_t> winner_;
  std::vector<std::uint32_t> round_tag_;
  std::vector<Candidate> pool_;
  std::vector<StateId> touched_;
  std::uint32_t round_ = 0;
  std::size_t expanded_ = 0;
};

}  // namespace detail

/// Serial frame- or label-synchronous Viterbi beam search over a Wfst.
class SerialDecoder {
 public:
  SerialDecoder(const Wfst& w, DecodeConfig cfg) : wfst_(w), cfg_(cfg) {
    cfg_.Check();
    CheckSearchable(wfst_);
  }

  /// Decodes `p`. In LSD mode frames whose blank posterior exceeds the
  /// threshold are skipped; FSD searches every frame. When `sink` is set it
  /// receives the survivors of every step for lattice generation.
  DecodeResult decode(const PosteriorMatrix& p, LatticeSink* sink = nullptr) {
    CheckCompatible(wfst_, p);
    arena_.clear();
    detail::SerialSearch search(wfst_, cfg_, arena_);
    const BlankMask mask = cfg_.mode == DecodeMode::kLsd
                               ? classify_blank_frames(p, cfg_.blank_threshold)
                               : BlankMask(std::vector<bool>(p.num_frames(), false));
    std::vector<Token> live = search.Initial(sink);
    std::uint32_t steps = 0;
    for (std::size_t u = 0; u < p.num_frames(); ++u) {
      if (mask.is_blank(u)) continue;
      ++steps;
      auto costs = FrameCosts(p, u, cfg_.acoustic_scale);
      live = search.Step(live, costs, steps, sink);
      arena_.maybe_compact(live);
    }
    return FinishDecode(wfst_, live, arena_, steps, search.tokens_expanded());
  }

  const TraceArena& arena() const { return arena_; }
  const DecodeConfig& config() const { return cfg_; }

 private:
  const Wfst& wfst_;
  DecodeConfig cfg_;
  TraceArena arena_;
};

/// One search step: relax the emitting arcs of `live` against `frame_costs`
/// (indexed by input label), recombine per destination state, close over
/// epsilon arcs, then apply beam and max-active pruning.
inline std::vector<Token> viterbi_step(const Wfst& w, std::span<const Token> live,
                                       std::span<const double> frame_costs, const DecodeConfig& cfg,
                                       TraceArena& arena, std::uint32_t step = 1) {
  detail::SerialSearch search(w, cfg, arena);
  return search.Step(live, frame_costs, step, nullptr);
}

/// Roots a search at the start state (cost 0, epsilon closure applied).
inline std::vector<Token> initial_tokens(const Wfst& w, const DecodeConfig& cfg, TraceArena& arena) {
  detail::SerialSearch search(w, cfg, arena);
  return search.Initial(nullptr);
}

inline DecodeResult decode_fsd(const Wfst& w, const PosteriorMatrix& p, DecodeConfig cfg,
                               LatticeSink* sink = nullptr) {
  cfg.mode = DecodeMode::kFsd;
  return SerialDecoder(w, cfg).decode(p, sink);
}

inline DecodeResult decode_lsd(const Wfst& w, const PosteriorMatrix& p, DecodeConfig cfg,
                               LatticeSink* sink = nullptr) {
  cfg.mode = DecodeMode::kLsd;
  return SerialDecoder(w, cfg).decode(p, sink);
}

}  // namespace lsdwfst

// lsdwfst/parallel.hpp

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
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "lsdwfst/posterior.hpp"
#include "lsdwfst/search.hpp"
#include "lsdwfst/wfst.hpp"

// Parallel token passing. Within a step, groups of N logical lanes each claim
// one token at a time from a shared dispatcher and relax that token's arcs
// lane-strided; recombination is an indivisible compare-and-minimize on the
// destination state's slot. Steps and epsilon rounds are separated by a full
// barrier (WorkerPool::run returns only when every worker is done).

namespace lsdwfst {

/// Hands out queue indices 0..n-1, each exactly once, via fetch-and-increment.
class Dispatcher {
 public:
  explicit Dispatcher(std::size_t group_size = 32) : group_size_(group_size) {
    if (group_size_ == 0) throw std::invalid_argument("group size must be >= 1");
  }

  void reset(std::size_t queue_length) {
    size_ = queue_length;
    next_.store(0, std::memory_order_relaxed);
  }

  std::optional<std::size_t> claim_next() {
    std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
    if (i >= size_) return std::nullopt;
    return i;
  }

  std::size_t group_size() const { return group_size_; }
  std::size_t queue_length() const { return size_; }

 private:
  std::size_t group_size_;
  std::size_t size_ = 0;
  std::atomic<std::size_t> next_{0};
};

/// Test hook: records every dispatcher claim so callers can check that each
/// queue was partitioned exactly.
class ClaimLedger {
 public:
  void begin_queue(std::size_t length) {
    std::lock_guard lock(mu_);
    queues_.push_back({length, {}});
  }
  void record(std::size_t group, std::size_t index) {
    std::lock_guard lock(mu_);
    queues_.back().claims.emplace_back(group, index);
  }
  std::size_t num_queues() const { return queues_.size(); }
  std::size_t total_claims() const {
    std::size_t n = 0;
    for (const auto& q : queues_) n += q.claims.size();
    return n;
  }
  /// True when every queue's claims are exactly {0, ..., length-1}.
  bool exact_partition() const {
    for (const auto& q : queues_) {
      std::vector<std::size_t> idx;
      for (auto [g, i] : q.claims) idx.push_back(i);
      std::sort(idx.begin(), idx.end());
      if (idx.size() != q.length) return false;
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (idx[i] != i) return false;
    }
    return true;
  }

 private:
  struct Queue {
    std::size_t length;
    std::vector<std::pair<std::size_t, std::size_t>> claims;
  };
  mutable std::mutex mu_;
  std::vector<Queue> queues_;
};

/// Per-state recombination slot. Holds the index of the winning candidate in
/// the step's candidate pool; relax() installs a candidate iff it is better
/// under (cost, arc index), as one compare-and-swap loop.
class StateSlot {
 public:
  StateSlot() = default;
  StateSlot(const StateSlot&) = delete;
  StateSlot& operator=(const StateSlot&) = delete;

  bool relax(const Candidate* pool, std::uint32_t idx) {
    std::uint32_t cur = winner_.load(std::memory_order_acquire);
    while (cur == Candidate::kNoCand || Better(pool[idx], pool[cur])) {
      if (winner_.compare_exchange_weak(cur, idx, std::memory_order_acq_rel,
                                        std::memory_order_acquire))
        return true;
    }
    return false;
  }

  std::uint32_t winner() const { return winner_.load(std::memory_order_acquire); }
  bool empty() const { return winner() == Candidate::kNoCand; }
  void reset() { winner_.store(Candidate::kNoCand, std::memory_order_relaxed); }

#ifdef LSDWFST_CHECK_EPOCHS
  void stamp(std::uint32_t epoch) { epoch_.store(epoch, std::memory_order_relaxed); }
  std::uint32_t epoch() const { return epoch_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::uint32_t> epoch_{0};
#endif

 private:
  std::atomic<std::uint32_t> winner_{Candidate::kNoCand};
};

/// Fixed set of worker threads. run(fn) calls fn(worker) on every worker
/// (worker 0 is the calling thread) and returns once all calls have finished.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers) : size_(workers) {
    if (workers == 0) throw std::invalid_argument("worker count must be >= 1");
    for (std::size_t w = 1; w < workers; ++w) threads_.emplace_back([this, w] { Loop(w); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return size_; }

  void run(const std::function<void(std::size_t)>& fn) {
    if (size_ == 1) {
      fn(0);
      return;
    }
    {
      std::lock_guard lock(mu_);
      job_ = &fn;
      pending_ = size_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    start_cv_.notify_all();
    std::exception_ptr mine;
    try {
      fn(0);
    } catch (...) {
      mine = std::current_exception();
    }
    std::unique_lock lock(mu_);
    done_cv_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (mine) std::rethrow_exception(mine);
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void Loop(std::size_t w) {
    std::uint64_t seen = 0;
    while (true) {
      const std::function<void(std::size_t)>* job;
      {
        std::unique_lock lock(mu_);
        start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
        job = job_;
      }
      std::exception_ptr err;
      try {
        (*job)(w);
      } catch (...) {
        err = std::current_exception();
      }
      std::lock_guard lock(mu_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_cv_.notify_one();
    }
  }

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable start_cv_, done_cv_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

/// Compacts the non-empty slots into survivors ordered by state id (workers
/// scan contiguous state ranges), applies the shared pruning rule and clears
/// the slots for the next step.
inline std::vector<Survivor> aggregate_survivors(std::span<StateSlot> slots, const Candidate* pool,
                                                 const DecodeConfig& cfg, WorkerPool& workers) {
  const std::size_t n = slots.size();
  const std::size_t parts = workers.size();
  std::vector<std::vector<Survivor>> local(parts);
  workers.run([&](std::size_t w) {
    const std::size_t lo = n * w / parts, hi = n * (w + 1) / parts;
    for (std::size_t s = lo; s < hi; ++s) {
      std::uint32_t c = slots[s].winner();
      if (c == Candidate::kNoCand) continue;
      local[w].push_back({static_cast<StateId>(s), c, pool[c].cost});
      slots[s].reset();
    }
  });
  std::vector<Survivor> out;
  for (auto& part : local) out.insert(out.end(), part.begin(), part.end());
  PruneSurvivors(out, cfg);
  return out;
}

/// Forwards step snapshots to another sink on a dedicated thread, so lattice
/// construction for step k overlaps the search of step k+1.
class PipelinedLatticeSink : public LatticeSink {
 public:
  explicit PipelinedLatticeSink(LatticeSink& target)
      : target_(target), thread_([this] { Drain(); }) {}
  ~PipelinedLatticeSink() override { finish(); }

  void add_step(StepSnapshot snapshot) override {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(snapshot));
    }
    cv_.notify_one();
  }

  /// Blocks until every queued snapshot has been delivered.
  void finish() {
    if (!thread_.joinable()) return;
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_one();
    thread_.join();
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void Drain() {
    while (true) {
      StepSnapshot snap;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return closed_ || !queue_.empty(); });
        if (queue_.empty()) return;
        snap = std::move(queue_.front());
        queue_.pop_front();
      }
      try {
        if (!error_) target_.add_step(std::move(snap));
      } catch (...) {
        error_ = std::current_exception();
      }
    }
  }

  LatticeSink& target_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StepSnapshot> queue_;
  bool closed_ = false;
  std::exception_ptr error_;
  std::thread thread_;
};

struct ParallelConfig {
  std::size_t workers = 1;
  std::size_t group_size = 32;
  ClaimLedger* ledger = nullptr;
};

/// Parallel counterpart of SerialDecoder; returns identical DecodeResults.
class ParallelDecoder {
 public:
  ParallelDecoder(const Wfst& w, DecodeConfig cfg, ParallelConfig pcfg)
      : wfst_(w), cfg_(cfg), pcfg_(pcfg), workers_(pcfg.workers), dispatcher_(pcfg.group_size),
        slots_(w.num_states()), tags_(w.num_states()) {
    cfg_.Check();
    CheckSearchable(wfst_);
  }

  DecodeResult decode(const PosteriorMatrix& p, LatticeSink* sink = nullptr) {
    CheckCompatible(wfst_, p);
    arena_.clear();
    expanded_ = 0;
    std::optional<PipelinedLatticeSink> pipe;
    if (sink) pipe.emplace(*sink);
    LatticeSink* out = sink ? &*pipe : nullptr;

    const BlankMask mask = cfg_.mode == DecodeMode::kLsd
                               ? classify_blank_frames(p, cfg_.blank_threshold)
                               : BlankMask(std::vector<bool>(p.num_frames(), false));
    std::vector<Token> live = Initial(out);
    std::uint32_t steps = 0;
    for (std::size_t u = 0; u < p.num_frames(); ++u) {
      if (mask.is_blank(u)) continue;
      ++steps;
      live = Step(live, FrameCosts(p, u, cfg_.acoustic_scale), steps, out);
      arena_.maybe_compact(live);
    }
    if (pipe) pipe->finish();
    return FinishDecode(wfst_, live, arena_, steps, expanded_);
  }

  const TraceArena& arena() const { return arena_; }

 private:
  std::vector<Token> Initial(LatticeSink* sink) {
    pool_.clear();
    NextEpoch();
    Candidate root;
    root.cost = 0.0;
    pool_.push_back(root);
    slots_[wfst_.start()].relax(pool_.data(), 0);
    Stamp(wfst_.start());
    CloseEpsilon({wfst_.start()});
    return EndStep(0, {}, sink);
  }

  std::vector<Token> Step(const std::vector<Token>& live, std::vector<double> frame_costs,
                          std::uint32_t step, LatticeSink* sink) {
    pool_.clear();
    NextEpoch();
    const std::size_t n = live.size();
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
      offsets[i + 1] = offsets[i] + wfst_.emitting_arcs(live[i].state).size();
    pool_.resize(offsets[n]);
    const std::uint32_t round = NextRound();
    RunQueue(n, [&](std::size_t i, std::size_t lane, std::size_t lanes, std::vector<StateId>& changed) {
      const Token& t = live[i];
      const ArcIndex base = wfst_.emitting_offset(t.state);
      auto arcs = wfst_.emitting_arcs(t.state);
      for (std::size_t j = lane; j < arcs.size(); j += lanes) {
        const Arc& a = arcs[j];
        const std::uint32_t idx = static_cast<std::uint32_t>(offsets[i] + j);
        Candidate& c = pool_[idx];
        const double ac = frame_costs[a.ilabel];
        c = Candidate{};
        if (ac == kInfCost) continue;
        c.cost = t.cost + a.weight.value() + ac;
        c.arc = base + static_cast<ArcIndex>(j);
        c.pred_trace = t.trace;
        c.acoustic = ac;
        Relax(a.dst, idx, round, changed);
      }
    });
    expanded_ += n;
    CloseEpsilon(TakeChanged());
    return EndStep(step, frame_costs, sink);
  }

  void CloseEpsilon(std::vector<StateId> frontier) {
    if (!wfst_.has_epsilon_arcs()) return;
    while (!frontier.empty()) {
      const std::size_t n = frontier.size();
      std::vector<std::uint32_t> snap(n);
      std::vector<std::size_t> offsets(n + 1, 0);
      const std::size_t base_idx = pool_.size();
      for (std::size_t i = 0; i < n; ++i) {
        CheckEpoch(frontier[i]);
        snap[i] = slots_[frontier[i]].winner();
        offsets[i + 1] = offsets[i] + wfst_.num_epsilon_arcs(frontier[i]);
      }
      pool_.resize(base_idx + offsets[n]);
      const std::uint32_t round = NextRound();
      RunQueue(n, [&](std::size_t i, std::size_t lane, std::size_t lanes, std::vector<StateId>& changed) {
        const StateId s = frontier[i];
        const double cost = pool_[snap[i]].cost;
        const ArcIndex base = wfst_.arc_offset(s);
        auto eps = wfst_.epsilon_arcs(s);
        for (std::size_t j = lane; j < eps.size(); j += lanes) {
          const std::uint32_t idx = static_cast<std::uint32_t>(base_idx + offsets[i] + j);
          Candidate& c = pool_[idx];
          c = Candidate{};
          c.cost = cost + eps[j].weight.value();
          c.arc = base + static_cast<ArcIndex>(j);
          c.pred_cand = snap[i];
          Relax(eps[j].dst, idx, round, changed);
        }
      });
      expanded_ += n;
      frontier = TakeChanged();
    }
  }

  // Each worker acts as one group: its leader claims a queue entry, then the
  // group's lanes process that entry's arcs before the next claim.
  template <typename Fn>
  void RunQueue(std::size_t n, Fn&& process) {
    dispatcher_.reset(n);
    if (pcfg_.ledger) pcfg_.ledger->begin_queue(n);
    changed_.assign(workers_.size(), {});
    const std::size_t lanes = dispatcher_.group_size();
    workers_.run([&](std::size_t w) {
      auto& changed = changed_[w];
      while (auto i = dispatcher_.claim_next()) {
        if (pcfg_.ledger) pcfg_.ledger->record(w, *i);
        for (std::size_t lane = 0; lane < lanes; ++lane) process(*i, lane, lanes, changed);
      }
    });
  }

  void Relax(StateId d, std::uint32_t idx, std::uint32_t round, std::vector<StateId>& changed) {
    if (slots_[d].relax(pool_.data(), idx)) {
      Stamp(d);
      if (tags_[d].exchange(round, std::memory_order_relaxed) != round) changed.push_back(d);
    }
  }

  std::vector<StateId> TakeChanged() {
    std::vector<StateId> all;
    for (auto& c : changed_) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return all;
  }

  std::vector<Token> EndStep(std::uint32_t step, std::span<const double> frame_costs,
                             LatticeSink* sink) {
#ifdef LSDWFST_CHECK_EPOCHS
    for (StateId s = 0; s < wfst_.num_states(); ++s)
      if (!slots_[s].empty()) CheckEpoch(s);
#endif
    auto survivors = aggregate_survivors(slots_, pool_.data(), cfg_, workers_);
    std::vector<std::uint32_t> depth;
    auto tokens = MaterializeSurvivors(wfst_, pool_, survivors, step, arena_, sink ? &depth : nullptr);
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

  std::uint32_t NextRound() { return ++round_; }
  void NextEpoch() { ++epoch_; }

  void Stamp([[maybe_unused]] StateId s) {
#ifdef LSDWFST_CHECK_EPOCHS
    slots_[s].stamp(epoch_);
#endif
  }
  void CheckEpoch([[maybe_unused]] StateId s) const {
#ifdef LSDWFST_CHECK_EPOCHS
    if (slots_[s].epoch() != epoch_)
      throw std::logic_error("slot of state " + std::to_string(s) + " read outside its step");
#endif
  }

  const Wfst& wfst_;
  DecodeConfig cfg_;
  ParallelConfig pcfg_;
  WorkerPool workers_;
  Dispatcher dispatcher_;
  std::vector<StateSlot> slots_;
  std::vector<std::atomic<std::uint32_t>> tags_;
  std::vector<Candidate> pool_;
  std::vector<std::vector<StateId>> changed_;
  TraceArena arena_;
  std::uint32_t round_ = 0;
  std::uint32_t epoch_ = 0;
  std::size_t expanded_ = 0;
};

inline DecodeResult parallel_decode(const Wfst& w, const PosteriorMatrix& p, const DecodeConfig& cfg,
                                    std::size_t workers, std::size_t group_size,
                                    LatticeSink* sink = nullptr) {
  return ParallelDecoder(w, cfg, {workers, group_size, nullptr}).decode(p, sink);
}

}  // namespace lsdwfst

// tests/acceptance/acceptance.cc

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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lsdwfst/lsdwfst.hpp"
#include "oracle.hpp"

namespace lsdwfst {
namespace {

using testing::OraclePath;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

std::vector<Label> NonEpsilon(const std::vector<Label>& v) {
  std::vector<Label> out;
  for (Label l : v)
    if (l != kEpsilon) out.push_back(l);
  return out;
}

std::vector<bool> SkipMask(const PosteriorMatrix& p, double threshold) {
  std::vector<bool> skip(p.num_frames());
  for (std::size_t u = 0; u < p.num_frames(); ++u) skip[u] = p.blank_prob(u) > threshold;
  return skip;
}

// Instances shared by several criteria.
std::vector<testing::Instance> MakeInstances(std::uint64_t seed, int count, testing::InstanceOptions opts) {
  std::mt19937_64 rng(seed);
  std::vector<testing::Instance> out;
  for (int i = 0; i < count; ++i) out.push_back(testing::RandomInstance(rng, opts));
  return out;
}

std::vector<testing::Instance> MixedInstances() {
  auto a = MakeInstances(101, 300, {});
  auto b = MakeInstances(102, 100, {.tie_heavy = true});
  auto c = MakeInstances(103, 100, {.max_states = 40, .max_arcs = 160, .max_frames = 20});
  a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
  a.insert(a.end(), std::make_move_iterator(c.begin()), std::make_move_iterator(c.end()));
  return a;
}

// 1. Beam-free frame-synchronous decoding equals exhaustive search.
Outcome OracleEquivalence() {
  const int kInstances = 1000;
  auto insts = MakeInstances(1, kInstances, {});
  int bad = 0, with_final = 0;
  for (const auto& inst : insts) {
    DecodeResult r = decode_fsd(inst.wfst, inst.posts, {});
    auto best = testing::EnumerateBest(inst.wfst, testing::FrameCostTable(inst.posts));
    bool ok = r.search_steps == inst.posts.num_frames();
    if (!best.complete.empty()) {
      ++with_final;
      bool found = false;
      for (const OraclePath& p : best.complete)
        if (p.output() == r.olabels && NonEpsilon(p.ilabels) == r.ilabels) found = true;
      ok = ok && r.reached_final && std::fabs(r.total_cost.value() - best.best_complete) <= 1e-9 && found;
    } else if (best.any) {
      ok = ok && !r.reached_final && std::fabs(r.total_cost.value() - best.best_any) <= 1e-9;
    } else {
      ok = ok && r.search_died;
    }
    bad += !ok;
  }
  return {bad == 0, Format("%d instances (%d reach a final state), %d mismatches", kInstances, with_final, bad)};
}

// 2. Step count equals T minus the blank frames, for every threshold.
Outcome StepCountLaw() {
  const std::vector<double> thresholds{0.0, 0.3, 0.5, 0.9, 0.95, 0.98, 0.99, 0.999, 1.0, 1.1};
  auto insts = MixedInstances();
  int bad = 0, runs = 0;
  for (const auto& inst : insts) {
    for (double thr : thresholds) {
      std::size_t blank = 0;
      for (std::size_t u = 0; u < inst.posts.num_frames(); ++u) blank += inst.posts.blank_prob(u) > thr;
      DecodeResult r = decode_lsd(inst.wfst, inst.posts, {.blank_threshold = thr});
      bad += r.search_steps != inst.posts.num_frames() - blank;
      ++runs;
    }
  }
  const std::size_t T = 1000;
  std::string sweep;
  for (double frac : {0.0, 0.5, 0.9}) {
    Fixture f = gen_fixture({.states = 500, .frames = T, .blank_fraction = frac, .seed = 2});
    BenchReport rep = run_bench(f.wfst, f.posteriors, {.beam = 8.0}, 2, 32, 1,
                                {BenchMode::kFsdSerial, BenchMode::kLsdSerial});
    const std::size_t fsd = rep.find(BenchMode::kFsdSerial)->search_steps;
    const std::size_t lsd = rep.find(BenchMode::kLsdSerial)->search_steps;
    const auto expect = static_cast<std::size_t>(std::llround((1.0 - frac) * T));
    bad += fsd != T || lsd != expect;
    sweep += Format(" %.1f->%zu", frac, lsd);
  }
  return {bad == 0, Format("%d decodes, %d violations; sweep T=%zu:%s", runs, bad, T, sweep.c_str())};
}

// 3. A threshold above one disables skipping.
Outcome Degeneracy() {
  auto insts = MixedInstances();
  for (int s = 0; s < 20; ++s) {
    Fixture f = gen_fixture({.states = 50, .frames = 50, .blank_fraction = 0.05 * s, .seed = 300u + s});
    insts.push_back({std::move(f.wfst), std::move(f.posteriors)});
  }
  int bad = 0, runs = 0;
  for (const auto& inst : insts) {
    for (double thr : {1.0000001, 1.1, 2.0, kInfCost}) {
      DecodeConfig cfg{.beam = runs % 2 ? 5.0 : kInfCost, .blank_threshold = thr};
      bad += !(decode_lsd(inst.wfst, inst.posts, cfg) == decode_fsd(inst.wfst, inst.posts, cfg));
      ++runs;
    }
  }
  return {bad == 0, Format("%d comparisons, %d differ", runs, bad)};
}

// Tiny label-loop style instance: every state has one arc per label, every
// state is final, blank frames carry blank mass >= 0.999.
testing::Instance BlankDominatedInstance(std::mt19937_64& rng) {
  using testing::Uniform;
  using testing::UniformInt;
  const int labels = UniformInt(rng, 1, 3);
  const int n = UniformInt(rng, 1, 4);
  WfstBuilder b;
  b.set_start(0);
  b.reserve_states(n);
  for (StateId s = 0; s < n; ++s) {
    for (Label l = 1; l <= labels; ++l)
      b.add_arc(s, UniformInt(rng, 0, n - 1), l, UniformInt(rng, 0, 3), Weight(Uniform(rng, 0, 1)));
    b.set_final(s, Weight(Uniform(rng, 0, 1)));
  }
  const int T = UniformInt(rng, 1, 5);
  PosteriorMatrix p(T, labels + 1, static_cast<std::size_t>(UniformInt(rng, 0, labels)));
  for (int u = 0; u < T; ++u) {
    const bool blank = Uniform(rng, 0, 1) < 0.4;
    const double pb = blank ? Uniform(rng, 0.999, 0.99999) : Uniform(rng, 0.0001, 0.01);
    const Label peak = UniformInt(rng, 1, labels);
    std::vector<double> raw(labels + 1);
    double total = 0;
    for (Label l = 1; l <= labels; ++l) total += (raw[l] = (l == peak ? 10.0 : 1.0) * Uniform(rng, 0.2, 1.0));
    p.at(u, p.blank_col()) = pb;
    for (Label l = 1; l <= labels; ++l) p.at(u, p.column_of(l)) = (1 - pb) * raw[l] / total;
  }
  return {std::move(b).Build(), std::move(p)};
}

// 4. Skipping blank frames approximates the full computation.
Outcome BlankSkipApproximation() {
  const int kTrials = 1000;
  std::mt19937_64 rng(4);
  int bound_bad = 0, flips = 0, word_flips = 0;
  double worst_slack = -kInfCost;
  for (int t = 0; t < kTrials; ++t) {
    auto inst = BlankDominatedInstance(rng);
    DecodeResult r = decode_lsd(inst.wfst, inst.posts, {});
    auto full = testing::EnumerateWithBlanks(inst.wfst, inst.posts);
    const double full_best = testing::BestCost(full);
    double bound = 0;
    for (std::size_t u = 0; u < inst.posts.num_frames(); ++u)
      if (inst.posts.blank_prob(u) > 0.98) bound += -std::log(inst.posts.blank_prob(u));
    const double diff = std::fabs(full_best - r.total_cost.value());
    worst_slack = std::max(worst_slack, diff - bound);
    bound_bad += !(r.reached_final && diff <= bound + 1e-9);
    // Argmax of the full computation: its cheapest path (ties to any).
    bool label_match = false, word_match = false;
    for (const OraclePath& p : full) {
      if (p.cost > full_best + 1e-9) continue;
      if (NonEpsilon(p.ilabels) == r.ilabels) label_match = true;
      if (p.output() == r.olabels) word_match = true;
    }
    flips += !label_match;
    word_flips += !word_match;
  }
  const double match = 1.0 - static_cast<double>(flips) / kTrials;
  return {bound_bad == 0 && match >= 0.99,
          Format("%d trials, bound violations %d (worst slack %.3g), label-sequence flip rate %.4f, "
                 "output flip rate %.4f",
                 kTrials, bound_bad, worst_slack, static_cast<double>(flips) / kTrials,
                 static_cast<double>(word_flips) / kTrials)};
}

// 5. Parallel decoding equals serial decoding field for field.
Outcome ParallelEqualsSerial() {
  auto insts = MakeInstances(5, 100, {.max_states = 30, .max_arcs = 120, .max_frames = 10});
  auto ties = MakeInstances(6, 100, {.max_states = 30, .max_arcs = 120, .max_frames = 10, .tie_heavy = true});
  insts.insert(insts.end(), std::make_move_iterator(ties.begin()), std::make_move_iterator(ties.end()));
  int bad = 0, runs = 0, partition_bad = 0;
  std::size_t claims = 0;
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto& inst = insts[i];
    DecodeConfig cfg{.beam = i % 3 == 0 ? 2.0 : kInfCost,
                     .max_active = i % 4 == 0 ? 6 : std::numeric_limits<std::size_t>::max(),
                     .mode = i % 2 ? DecodeMode::kLsd : DecodeMode::kFsd};
    DecodeResult serial = SerialDecoder(inst.wfst, cfg).decode(inst.posts);
    for (std::size_t w : {1, 2, 4, 8}) {
      for (std::size_t g : {1, 4, 32}) {
        ClaimLedger ledger;
        DecodeResult par = ParallelDecoder(inst.wfst, cfg, {w, g, &ledger}).decode(inst.posts);
        bad += !(par == serial);
        partition_bad += !ledger.exact_partition();
        claims += ledger.total_claims();
        ++runs;
      }
    }
  }
  return {bad == 0 && partition_bad == 0,
          Format("%zu instances x 12 configs = %d runs, %d differ, %d inexact partitions, %zu claims checked",
                 insts.size(), runs, bad, partition_bad, claims)};
}

// 6. Pruned lattices against enumeration; best path against the decoder.
Outcome LatticeSoundness() {
  const std::size_t kMaxPaths = 10000;
  auto insts = MakeInstances(7, 600, {.max_frames = 5});
  std::mt19937_64 rng(8);
  int checked = 0, missing = 0, extra_paths = 0, extra_instances = 0, cost_bad = 0, arc_bad = 0,
      best_bad = 0, best_checked = 0;
  for (const auto& inst : insts) {
    for (DecodeMode mode : {DecodeMode::kFsd, DecodeMode::kLsd}) {
      DecodeConfig cfg{.mode = mode};
      const double lattice_beam = testing::Uniform(rng, 0, 3);
      std::vector<bool> skip = mode == DecodeMode::kLsd ? SkipMask(inst.posts, cfg.blank_threshold)
                                                        : std::vector<bool>(inst.posts.num_frames(), false);
      auto e = testing::EnumeratePaths(inst.wfst, testing::FrameCostTable(inst.posts, 1.0, &skip), kMaxPaths);
      LatticeBuilder sink(inst.wfst);
      DecodeResult r = SerialDecoder(inst.wfst, cfg).decode(inst.posts, &sink);
      Lattice raw = sink.finish();
      if (r.reached_final) {
        ++best_checked;
        LatticePath bp = lattice_best_path(raw);
        best_bad += !(std::fabs(bp.cost - r.total_cost.value()) <= 1e-9 && bp.olabels == r.olabels &&
                      bp.ilabels == r.ilabels);
      } else {
        best_bad += !raw.empty();
      }
      if (e.truncated || e.complete.empty()) continue;
      ++checked;
      Lattice pruned = prune_lattice(raw, lattice_beam);
      const double best = testing::BestCost(e.complete);
      std::vector<OraclePath> within;
      for (const OraclePath& p : e.complete)
        if (p.cost <= best + lattice_beam + 1e-9) within.push_back(p);
      auto kept = testing::LatticePaths(pruned);
      testing::Canonicalize(within);
      testing::Canonicalize(kept);
      auto key = [](const OraclePath& p) { return std::tie(p.states, p.ilabels, p.olabels); };
      std::size_t i = 0, j = 0;
      int extra_here = 0;
      while (i < within.size() || j < kept.size()) {
        if (j == kept.size() || (i < within.size() && key(within[i]) < key(kept[j]))) {
          ++missing;
          ++i;
        } else if (i == within.size() || key(kept[j]) < key(within[i])) {
          ++extra_here;
          ++j;
        } else {
          cost_bad += std::fabs(within[i].cost - kept[j].cost) > 1e-9;
          ++i;
          ++j;
        }
      }
      extra_paths += extra_here;
      extra_instances += extra_here > 0;
      auto fwd = detail::ForwardCosts(pruned);
      auto bwd = detail::BackwardCosts(pruned);
      for (const LatticeArc& a : pruned.arcs())
        arc_bad += !(fwd[a.from] + a.cost() + bwd[a.to] <= best + lattice_beam + 1e-9);
    }
  }
  const bool pass = missing == 0 && extra_paths == 0 && cost_bad == 0 && arc_bad == 0 && best_bad == 0;
  return {pass, Format("%d lattices vs enumeration: %d within-beam paths missing, %d over-beam paths kept "
                       "(in %d lattices), %d cost mismatches, %d arcs off a within-beam path; "
                       "best path vs decoder: %d/%d mismatches",
                       checked, missing, extra_paths, extra_instances, cost_bad, arc_bad, best_bad, best_checked)};
}

// 7. Blank skipping is faster and expands far fewer tokens on the benchmark graph.
Outcome DeskScalePerformance() {
  Fixture f = gen_fixture({.states = 5000, .frames = 1000, .blank_fraction = 0.9, .seed = 1});
  BenchReport rep = run_bench(f.wfst, f.posteriors, {}, 2, 32, 3);
  const auto* fsd = rep.find(BenchMode::kFsdSerial);
  const auto* lsd = rep.find(BenchMode::kLsdSerial);
  const auto* par = rep.find(BenchMode::kLsdParallel);
  const double ratio = static_cast<double>(lsd->tokens_expanded) / static_cast<double>(fsd->tokens_expanded);
  return {lsd->search_wall_time < fsd->search_wall_time && ratio <= 0.15,
          Format("FSD %.3fs / %zu tokens, LSD %.3fs / %zu tokens, token ratio %.4f, speedup %.2fx, "
                 "parallel LSD (2 workers) %.3fs",
                 fsd->search_wall_time, fsd->tokens_expanded, lsd->search_wall_time, lsd->tokens_expanded,
                 ratio, rep.speedup(BenchMode::kFsdSerial, BenchMode::kLsdSerial), par->search_wall_time)};
}

// 8. Text formats reparse to identical objects.
Outcome FormatRoundTrips() {
  std::vector<Fixture> fixtures;
  fixtures.push_back(gen_fixture({.kind = FixtureKind::kChain, .states = 10, .labels = 3}));
  fixtures.push_back(gen_fixture({.kind = FixtureKind::kDiamond, .labels = 2, .frames = 2}));
  for (std::uint64_t s = 1; s <= 20; ++s)
    fixtures.push_back(gen_fixture({.states = 30, .frames = 12, .blank_fraction = 0.3, .seed = s}));
  int wfst_bad = 0, lattice_bad = 0, lattices = 0;
  auto check_wfst = [&](const Wfst& w, const SymbolTable* is, const SymbolTable* os) {
    std::ostringstream out;
    write_wfst_text(out, w, is, os);
    std::istringstream in(out.str());
    wfst_bad += !(parse_wfst_text(in, is, os) == w);
  };
  auto check_lattice = [&](const Wfst& w, const PosteriorMatrix& p) {
    LatticeBuilder sink(w);
    SerialDecoder(w, {}).decode(p, &sink);
    for (const Lattice& l : {sink.finish()}) {
      for (double beam : {kInfCost, 1.0, 0.0}) {
        Lattice x = l.empty() ? l : prune_lattice(l, beam);
        std::ostringstream out;
        write_lattice_text(out, x);
        std::istringstream in(out.str());
        lattice_bad += !(parse_lattice_text(in) == x);
        ++lattices;
      }
    }
  };
  {
    const std::string dir = LSDWFST_SAMPLE_DATA;
    std::ifstream is(dir + "/yesno.isyms"), os(dir + "/yesno.osyms"), g(dir + "/yesno.fst.txt"),
        p(dir + "/yesno.post");
    Fixture sample;
    sample.isyms = SymbolTable::Read(is);
    sample.osyms = SymbolTable::Read(os);
    sample.wfst = parse_wfst_text(g, &sample.isyms, &sample.osyms);
    sample.posteriors = load_posteriors(p);
    fixtures.push_back(std::move(sample));
  }
  for (const Fixture& f : fixtures) {
    check_wfst(f.wfst, &f.isyms, &f.osyms);
    check_wfst(f.wfst, nullptr, nullptr);
    check_lattice(f.wfst, f.posteriors);
  }
  auto insts = MixedInstances();
  for (const auto& inst : insts) {
    check_wfst(inst.wfst, nullptr, nullptr);
    check_lattice(inst.wfst, inst.posts);
  }
  return {wfst_bad == 0 && lattice_bad == 0,
          Format("%zu graphs (%zu with symbols), %d lattices; %d WFST and %d lattice mismatches",
                 fixtures.size() + insts.size(), fixtures.size(), lattices, wfst_bad, lattice_bad)};
}

}  // namespace
}  // namespace lsdwfst

int main() {
  using namespace lsdwfst;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", OracleEquivalence},
      {"step-count law", StepCountLaw},
      {"lsd/fsd degeneracy", Degeneracy},
      {"blank-skip approximation", BlankSkipApproximation},
      {"parallel equals serial", ParallelEqualsSerial},
      {"lattice soundness/completeness", LatticeSoundness},
      {"desk-scale performance", DeskScalePerformance},
      {"format round-trips", FormatRoundTrips},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s [%zu] %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

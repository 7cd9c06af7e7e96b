// lsdwfst/fixtures.hpp

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
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsdwfst/posterior.hpp"
#include "lsdwfst/symbol_table.hpp"
#include "lsdwfst/wfst.hpp"
#include "lsdwfst/wfst_text.hpp"

namespace lsdwfst {

enum class FixtureKind { kChain, kDiamond, kRandom };

struct FixtureParams {
  FixtureKind kind = FixtureKind::kRandom;
  int states = 8;
  int arcs_per_state = 3;
  int labels = 4;
  std::size_t frames = 10;
  double blank_fraction = 0.0;
  double epsilon_fraction = 0.1;  // chance that a state gets a forward epsilon arc
  double final_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct Fixture {
  Wfst wfst;
  SymbolTable isyms;
  SymbolTable osyms;
  PosteriorMatrix posteriors;
};

/// Probability written into the blank column of generated blank frames.
inline constexpr double kGeneratedBlankProb = 0.995;
/// Upper bound of the blank column on generated non-blank frames.
inline constexpr double kGeneratedMaxNonBlankProb = 0.3;

namespace detail {

// Platform-independent draws on top of mt19937_64 (whose output sequence is
// fixed by the standard, unlike the <random> distributions).
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }
  bool chance(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Three-decimal weights keep fixture files short and readable.
inline double RoundWeight(double w) { return std::round(w * 1000.0) / 1000.0; }

inline PosteriorMatrix GeneratePosteriors(const FixtureParams& p, FixtureRng& rng) {
  const std::size_t labels = static_cast<std::size_t>(p.labels);
  PosteriorMatrix m(p.frames, labels + 1, 0);
  const auto blank_count = static_cast<std::size_t>(std::llround(p.blank_fraction * static_cast<double>(p.frames)));
  std::vector<std::size_t> order(p.frames);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<bool> blank(p.frames, false);
  for (std::size_t i = 0; i < blank_count; ++i) blank[order[i]] = true;

  for (std::size_t u = 0; u < p.frames; ++u) {
    const double pb = blank[u] ? kGeneratedBlankProb : rng.uniform(0.0, kGeneratedMaxNonBlankProb);
    std::vector<double> raw(labels);
    const std::size_t peak = rng.below(labels);
    for (std::size_t l = 0; l < labels; ++l) raw[l] = rng.uniform(0.05, 1.0) * (l == peak ? 4.0 : 1.0);
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    m.at(u, 0) = pb;
    for (std::size_t l = 0; l < labels; ++l) m.at(u, l + 1) = (1.0 - pb) * raw[l] / total;
  }
  return m;
}

}  // namespace detail

/// Deterministic synthetic graph + posteriors. Throws std::invalid_argument
/// for infeasible parameters.
inline Fixture gen_fixture(const FixtureParams& p) {
  if (p.labels < 1) throw std::invalid_argument("fixture needs at least one label");
  if (!(p.blank_fraction >= 0.0 && p.blank_fraction <= 1.0))
    throw std::invalid_argument("blank fraction must be in [0, 1]");
  if (p.kind != FixtureKind::kDiamond && p.states < 1)
    throw std::invalid_argument("fixture needs at least one state");
  if (p.kind == FixtureKind::kRandom && p.arcs_per_state < 0)
    throw std::invalid_argument("arcs per state must be >= 0");
  if (p.kind == FixtureKind::kDiamond && p.labels < 2)
    throw std::invalid_argument("diamond fixture needs two labels");

  detail::FixtureRng rng(p.seed);
  Fixture f;
  WfstBuilder b;
  int words = p.labels;
  switch (p.kind) {
    case FixtureKind::kChain:
      b.set_start(0);
      for (StateId s = 0; s + 1 < p.states; ++s) {
        Label l = s % p.labels + 1;
        b.add_arc(s, s + 1, l, l, Weight(0.5));
      }
      b.set_final(p.states - 1);
      break;
    case FixtureKind::kDiamond:
      words = 4;
      b.set_start(0);
      b.add_arc(0, 1, 1, 1, Weight(1.0));
      b.add_arc(1, 3, 2, 2, Weight(0.1));
      b.add_arc(0, 2, 1, 3, Weight(0.5));
      b.add_arc(2, 3, 2, 4, Weight(0.9));
      b.set_final(3);
      break;
    case FixtureKind::kRandom: {
      const StateId n = p.states;
      b.set_start(0);
      auto label = [&] { return static_cast<Label>(rng.below(p.labels) + 1); };
      auto word = [&] { return rng.chance(0.5) ? static_cast<Label>(rng.below(words) + 1) : kEpsilon; };
      for (StateId s = 0; s < n; ++s) {
        if (s + 1 < n) b.add_arc(s, s + 1, label(), word(), Weight(detail::RoundWeight(rng.uniform(0.0, 2.0))));
        for (int k = 0; k < p.arcs_per_state; ++k) {
          StateId d = static_cast<StateId>(rng.below(n));
          b.add_arc(s, d, label(), word(), Weight(detail::RoundWeight(rng.uniform(0.0, 2.0))));
        }
        if (rng.chance(0.5)) b.add_arc(s, s, label(), kEpsilon, Weight(detail::RoundWeight(rng.uniform(0.0, 1.0))));
        if (s + 1 < n && rng.chance(p.epsilon_fraction)) {
          StateId d = static_cast<StateId>(s + 1 + rng.below(n - s - 1));
          b.add_arc(s, d, kEpsilon, word(), Weight(detail::RoundWeight(rng.uniform(0.0, 1.0))));
        }
        if (s == n - 1 || rng.chance(p.final_fraction))
          b.set_final(s, Weight(detail::RoundWeight(rng.uniform(0.0, 1.0))));
      }
      break;
    }
  }
  f.wfst = std::move(b).Build();
  for (int l = 1; l <= p.labels; ++l) f.isyms.add("l" + std::to_string(l), l);
  for (int w = 1; w <= words; ++w) f.osyms.add("w" + std::to_string(w), w);
  f.posteriors = detail::GeneratePosteriors(p, rng);
  return f;
}

struct FixturePaths {
  std::filesystem::path graph, isyms, osyms, posteriors;
};

inline FixturePaths write_fixture(const Fixture& f, const std::filesystem::path& dir,
                                  const std::string& prefix) {
  std::filesystem::create_directories(dir);
  FixturePaths paths{dir / (prefix + ".fst.txt"), dir / (prefix + ".isyms"), dir / (prefix + ".osyms"),
                     dir / (prefix + ".post")};
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(paths.graph);
    write_wfst_text(out, f.wfst, &f.isyms, &f.osyms);
  }
  {
    auto out = open(paths.isyms);
    f.isyms.Write(out);
  }
  {
    auto out = open(paths.osyms);
    f.osyms.Write(out);
  }
  {
    auto out = open(paths.posteriors);
    write_posteriors_text(out, f.posteriors);
  }
  return paths;
}

}  // namespace lsdwfst

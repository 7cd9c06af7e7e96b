// lsdwfst/bench.hpp

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
#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lsdwfst/decoder.hpp"
#include "lsdwfst/parallel.hpp"
#include "lsdwfst/posterior.hpp"

namespace lsdwfst {

/// A decoder output contradicted one of its own accounting laws.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class BenchMode { kFsdSerial, kLsdSerial, kLsdParallel };

inline const char* ToString(BenchMode m) {
  switch (m) {
    case BenchMode::kFsdSerial: return "fsd_serial";
    case BenchMode::kLsdSerial: return "lsd_serial";
    case BenchMode::kLsdParallel: return "lsd_parallel";
  }
  return "?";
}

struct BenchModeResult {
  BenchMode mode;
  std::size_t search_steps = 0;
  std::size_t tokens_expanded = 0;
  double search_wall_time = 0.0;  // median over repeats, seconds
  std::vector<double> samples;
  DecodeResult result;
};

struct BenchReport {
  std::size_t frames = 0;
  std::size_t blank_frames = 0;
  DecodeConfig config;
  std::size_t workers = 1;
  std::size_t group_size = 32;
  std::size_t repeats = 1;
  std::vector<BenchModeResult> modes;

  const BenchModeResult* find(BenchMode m) const {
    for (const auto& r : modes)
      if (r.mode == m) return &r;
    return nullptr;
  }
  /// wall_time(baseline) / wall_time(variant); 0 when either mode is missing.
  double speedup(BenchMode baseline, BenchMode variant) const {
    const auto* b = find(baseline);
    const auto* v = find(variant);
    if (!b || !v) return 0.0;
    return std::max(b->search_wall_time, kMinTime) / std::max(v->search_wall_time, kMinTime);
  }

  static constexpr double kMinTime = 1e-9;
};

inline double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Times each requested mode `repeats` times (median reported) and checks
/// the step-count law search_steps(LSD) = T - |U| before returning.
inline BenchReport run_bench(const Wfst& w, const PosteriorMatrix& p, const DecodeConfig& cfg,
                             std::size_t workers, std::size_t group_size, std::size_t repeats,
                             std::vector<BenchMode> modes = {BenchMode::kFsdSerial, BenchMode::kLsdSerial,
                                                             BenchMode::kLsdParallel}) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  BenchReport report;
  report.frames = p.num_frames();
  report.blank_frames = classify_blank_frames(p, cfg.blank_threshold).count();
  report.config = cfg;
  report.workers = workers;
  report.group_size = group_size;
  report.repeats = repeats;

  for (BenchMode mode : modes) {
    DecodeConfig c = cfg;
    c.mode = mode == BenchMode::kFsdSerial ? DecodeMode::kFsd : DecodeMode::kLsd;
    BenchModeResult r;
    r.mode = mode;
    std::optional<SerialDecoder> serial;
    std::optional<ParallelDecoder> parallel;
    if (mode == BenchMode::kLsdParallel)
      parallel.emplace(w, c, ParallelConfig{workers, group_size, nullptr});
    else
      serial.emplace(w, c);
    for (std::size_t k = 0; k < repeats; ++k) {
      auto t0 = std::chrono::steady_clock::now();
      DecodeResult res = parallel ? parallel->decode(p) : serial->decode(p);
      auto t1 = std::chrono::steady_clock::now();
      r.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
      if (k > 0 && !(res == r.result)) throw InvariantError("decoder output changed between repeats");
      r.result = std::move(res);
    }
    r.search_wall_time = Median(r.samples);
    r.search_steps = r.result.search_steps;
    r.tokens_expanded = r.result.tokens_expanded;
    const std::size_t expected =
        c.mode == DecodeMode::kLsd ? report.frames - report.blank_frames : report.frames;
    if (r.search_steps != expected)
      throw InvariantError(std::string(ToString(mode)) + ": search_steps " + std::to_string(r.search_steps) +
                           " != " + std::to_string(expected));
    report.modes.push_back(std::move(r));
  }
  const auto* ls = report.find(BenchMode::kLsdSerial);
  const auto* lp = report.find(BenchMode::kLsdParallel);
  if (ls && lp && !(ls->result == lp->result))
    throw InvariantError("parallel LSD result differs from serial LSD");
  return report;
}

inline nlohmann::json to_json(const BenchReport& r) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return "inf";
    return v;
  };
  nlohmann::json j;
  j["schema"] = "v1";
  j["frames"] = r.frames;
  j["blank_frames"] = r.blank_frames;
  j["config"] = {{"blank_threshold", num(r.config.blank_threshold)},
                 {"beam", num(r.config.beam)},
                 {"max_active", r.config.max_active == std::numeric_limits<std::size_t>::max()
                                    ? nlohmann::json("inf")
                                    : nlohmann::json(r.config.max_active)},
                 {"acoustic_scale", r.config.acoustic_scale},
                 {"workers", r.workers},
                 {"group_size", r.group_size},
                 {"repeats", r.repeats}};
  nlohmann::json modes = nlohmann::json::object();
  for (const auto& m : r.modes) {
    modes[ToString(m.mode)] = {{"search_steps", m.search_steps},
                               {"tokens_expanded", m.tokens_expanded},
                               {"search_wall_time_s", m.search_wall_time},
                               {"total_cost", num(m.result.total_cost.value())},
                               {"reached_final", m.result.reached_final}};
  }
  j["modes"] = modes;
  j["speedup"] = {{"lsd_vs_fsd", r.speedup(BenchMode::kFsdSerial, BenchMode::kLsdSerial)},
                  {"parallel_vs_serial_lsd", r.speedup(BenchMode::kLsdSerial, BenchMode::kLsdParallel)}};
  return j;
}

inline void write_bench_text(std::ostream& out, const BenchReport& r) {
  out << "frames T=" << r.frames << "  blank |U|=" << r.blank_frames
      << "  threshold=" << r.config.blank_threshold << "  beam=" << r.config.beam
      << "  workers=" << r.workers << "  group=" << r.group_size << "  repeats=" << r.repeats << '\n';
  for (const auto& m : r.modes)
    out << ToString(m.mode) << ": search_steps=" << m.search_steps
        << " tokens_expanded=" << m.tokens_expanded << " search_wall_time=" << m.search_wall_time << "s\n";
  out << "speedup lsd_vs_fsd=" << r.speedup(BenchMode::kFsdSerial, BenchMode::kLsdSerial)
      << " parallel_vs_serial_lsd=" << r.speedup(BenchMode::kLsdSerial, BenchMode::kLsdParallel) << '\n';
}

}  // namespace lsdwfst

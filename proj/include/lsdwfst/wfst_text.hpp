// lsdwfst/wfst_text.hpp

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

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lsdwfst/symbol_table.hpp"
#include "lsdwfst/wfst.hpp"

namespace lsdwfst {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct WfstParseOptions {
  bool allow_negative_weights = false;
  // State ids index dense per-state storage, so a stray huge id is rejected.
  StateId max_state_id = (1 << 26) - 1;
};

namespace detail {

inline std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool ParseDouble(std::string_view s, double* out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size() && !std::isnan(*out);
}

inline bool ParseIndex(std::string_view s, std::int64_t* out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), *out);
  return ec == std::errc() && p == s.data() + s.size() && *out >= 0 && *out <= INT32_MAX;
}

// Shortest representation that reads back to the same double.
inline std::string FormatCost(double v) {
  if (v == kInfCost) return "inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace detail

/// Parses the line-oriented transducer text format:
///   src dst ilabel olabel [weight]   (arc)
///   state [weight]                   (final state)
/// Missing weights are 0. '#' starts a comment line. The first state mentioned
/// is the start state. With a symbol table, label fields are symbols;
/// without one they are non-negative integers.
inline Wfst parse_wfst_text(std::istream& in, const SymbolTable* isyms = nullptr,
                            const SymbolTable* osyms = nullptr,
                            const WfstParseOptions& opts = {}) {
  WfstBuilder builder;
  bool have_start = false;
  std::string line;
  std::size_t line_no = 0;

  auto state_field = [&](std::string_view f) {
    std::int64_t v;
    if (!detail::ParseIndex(f, &v)) throw ParseError(line_no, "bad state id '" + std::string(f) + "'");
    if (v > opts.max_state_id)
      throw ParseError(line_no, "state id " + std::string(f) + " exceeds limit " + std::to_string(opts.max_state_id));
    return static_cast<StateId>(v);
  };
  auto label_field = [&](std::string_view f, const SymbolTable* syms) -> Label {
    if (syms != nullptr) {
      auto id = syms->find(std::string(f));
      if (!id) throw SymbolError("line " + std::to_string(line_no) + ": unknown symbol '" + std::string(f) + "'");
      return *id;
    }
    std::int64_t v;
    if (!detail::ParseIndex(f, &v)) throw ParseError(line_no, "bad label '" + std::string(f) + "'");
    return static_cast<Label>(v);
  };
  auto weight_field = [&](std::string_view f) {
    double v;
    if (!detail::ParseDouble(f, &v)) throw ParseError(line_no, "bad weight '" + std::string(f) + "'");
    if (v < 0.0 && !opts.allow_negative_weights)
      throw ParseError(line_no, "negative weight " + std::string(f));
    return Weight(v);
  };
  auto mention = [&](StateId s) {
    if (!have_start) {
      builder.set_start(s);
      have_start = true;
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::SplitFields(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    switch (fields.size()) {
      case 1:
      case 2: {
        StateId s = state_field(fields[0]);
        mention(s);
        builder.set_final(s, fields.size() == 2 ? weight_field(fields[1]) : Weight::One());
        break;
      }
      case 4:
      case 5: {
        StateId src = state_field(fields[0]);
        StateId dst = state_field(fields[1]);
        mention(src);
        Label il = label_field(fields[2], isyms);
        Label ol = label_field(fields[3], osyms);
        Weight w = fields.size() == 5 ? weight_field(fields[4]) : Weight::One();
        if (!w.is_finite()) throw ParseError(line_no, "arc weight must be finite");
        builder.add_arc(src, dst, il, ol, w);
        break;
      }
      default:
        throw ParseError(line_no, "expected 1, 2, 4 or 5 fields, got " + std::to_string(fields.size()));
    }
  }
  return std::move(builder).Build();
}

/// Writes `w` in the text format read by parse_wfst_text. The output reparses
/// to an identical Wfst (same start, arcs and final weights).
inline void write_wfst_text(std::ostream& out, const Wfst& w, const SymbolTable* isyms = nullptr,
                            const SymbolTable* osyms = nullptr) {
  const StateId n = w.num_states();
  if (n == 0) return;
  auto label = [](Label l, const SymbolTable* syms) {
    return syms != nullptr ? syms->symbol(l) : std::to_string(l);
  };
  std::vector<char> mentioned(n, 0);
  auto emit_state = [&](StateId s) {
    for (const Arc& a : w.out_arcs(s)) {
      out << a.src << ' ' << a.dst << ' ' << label(a.ilabel, isyms) << ' ' << label(a.olabel, osyms)
          << ' ' << detail::FormatCost(a.weight.value()) << '\n';
      mentioned[a.src] = mentioned[a.dst] = 1;
    }
  };
  const StateId start = w.start();
  if (w.out_degree(start) == 0) {
    out << start << ' ' << detail::FormatCost(w.final_weight(start).value()) << '\n';
    mentioned[start] = 1;
  }
  emit_state(start);
  for (StateId s = 0; s < n; ++s)
    if (s != start) emit_state(s);
  for (StateId s = 0; s < n; ++s) {
    if (s == start && w.out_degree(start) == 0) continue;
    if (w.is_final(s)) {
      out << s << ' ' << detail::FormatCost(w.final_weight(s).value()) << '\n';
      mentioned[s] = 1;
    }
  }
  // Keeps trailing isolated states so the state count survives a round trip.
  if (!mentioned[n - 1]) out << (n - 1) << " inf\n";
}

}  // namespace lsdwfst

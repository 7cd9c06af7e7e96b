// lsdwfst/symbol_table.hpp

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

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace lsdwfst {

using Label = std::int32_t;
inline constexpr Label kEpsilon = 0;
inline constexpr const char* kEpsilonSymbol = "<eps>";

class SymbolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bijective label-id <-> symbol map. Id 0 is always "<eps>".
class SymbolTable {
 public:
  SymbolTable() { add(kEpsilonSymbol, kEpsilon); }

  void add(const std::string& symbol, Label id) {
    if (id < 0) throw SymbolError("negative symbol id for '" + symbol + "'");
    if (id == kEpsilon && symbol != kEpsilonSymbol)
      throw SymbolError("id 0 must be <eps>, got '" + symbol + "'");
    auto it = ids_.find(symbol);
    if (it != ids_.end()) {
      if (it->second == id) return;
      throw SymbolError("symbol '" + symbol + "' bound to two ids");
    }
    if (static_cast<std::size_t>(id) >= symbols_.size()) symbols_.resize(id + 1);
    if (symbols_[id]) throw SymbolError("id " + std::to_string(id) + " bound to two symbols");
    symbols_[id] = symbol;
    ids_.emplace(symbol, id);
  }

  std::optional<Label> find(const std::string& symbol) const {
    auto it = ids_.find(symbol);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& symbol(Label id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= symbols_.size() || !symbols_[id])
      throw SymbolError("no symbol for id " + std::to_string(id));
    return *symbols_[id];
  }

  bool contains(Label id) const {
    return id >= 0 && static_cast<std::size_t>(id) < symbols_.size() && symbols_[id].has_value();
  }

  std::size_t size() const { return ids_.size(); }
  Label max_id() const { return static_cast<Label>(symbols_.size()) - 1; }

  // Blank lives in the posterior columns only; it is never a graph label.
  void set_blank(Label id) { blank_ = id; }
  std::optional<Label> blank() const { return blank_; }

  /// Reads "symbol id" lines. Blank lines and '#' comments are skipped.
  static SymbolTable Read(std::istream& in) {
    SymbolTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream ls(line);
      std::string sym;
      if (!(ls >> sym) || sym[0] == '#') continue;
      long long id = 0;
      std::string extra;
      if (!(ls >> id) || (ls >> extra))
        throw SymbolError("symbol table line " + std::to_string(line_no) + ": expected 'symbol id'");
      if (id < 0 || id > INT32_MAX)
        throw SymbolError("symbol table line " + std::to_string(line_no) + ": id out of range");
      table.add(sym, static_cast<Label>(id));
    }
    return table;
  }

  void Write(std::ostream& out) const {
    for (std::size_t id = 0; id < symbols_.size(); ++id)
      if (symbols_[id]) out << *symbols_[id] << ' ' << id << '\n';
  }

 private:
  std::vector<std::optional<std::string>> symbols_;
  std::unordered_map<std::string, Label> ids_;
  std::optional<Label> blank_;
};

}  // namespace lsdwfst

// lsdwfst/posterior.hpp

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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsdwfst/log.hpp"
#include "lsdwfst/symbol_table.hpp"
#include "lsdwfst/weight.hpp"
#include "lsdwfst/wfst_text.hpp"

namespace lsdwfst {

class PosteriorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-frame label posteriors, T rows by (L'+1) columns. One column holds
/// the blank probability; the remaining columns, in order, belong to graph
/// input labels 1..L'.
class PosteriorMatrix {
 public:
  PosteriorMatrix() = default;
  PosteriorMatrix(std::size_t num_frames, std::size_t num_cols, std::size_t blank_col)
      : frames_(num_frames), cols_(num_cols), blank_col_(blank_col), data_(num_frames * num_cols, 0.0) {
    if (num_cols == 0) throw PosteriorError("posterior matrix needs at least the blank column");
    if (blank_col >= num_cols) throw PosteriorError("blank column out of range");
  }

  std::size_t num_frames() const { return frames_; }
  std::size_t num_cols() const { return cols_; }
  /// L', the number of non-blank labels.
  std::size_t num_labels() const { return cols_ == 0 ? 0 : cols_ - 1; }
  std::size_t blank_col() const { return blank_col_; }

  std::span<const double> row(std::size_t u) const { return {data_.data() + u * cols_, cols_}; }
  std::span<double> row(std::size_t u) { return {data_.data() + u * cols_, cols_}; }
  double at(std::size_t u, std::size_t col) const { return data_[u * cols_ + col]; }
  double& at(std::size_t u, std::size_t col) { return data_[u * cols_ + col]; }

  double blank_prob(std::size_t u) const { return at(u, blank_col_); }

  /// Column holding label `l` (1-based non-blank label).
  std::size_t column_of(Label l) const {
    std::size_t c = static_cast<std::size_t>(l) - 1;
    return c >= blank_col_ ? c + 1 : c;
  }
  double label_prob(std::size_t u, Label l) const { return at(u, column_of(l)); }

  friend bool operator==(const PosteriorMatrix&, const PosteriorMatrix&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t cols_ = 1;
  std::size_t blank_col_ = 0;
  std::vector<double> data_;
};

/// Frames whose blank posterior strictly exceeds the threshold.
class BlankMask {
 public:
  BlankMask() = default;
  explicit BlankMask(std::vector<bool> bits) : bits_(std::move(bits)) {
    for (bool b : bits_) count_ += b ? 1 : 0;
  }
  std::size_t size() const { return bits_.size(); }
  bool is_blank(std::size_t u) const { return bits_[u]; }
  /// |U|
  std::size_t count() const { return count_; }
  std::vector<std::size_t> blank_frames() const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < bits_.size(); ++u)
      if (bits_[u]) out.push_back(u);
    return out;
  }
  friend bool operator==(const BlankMask&, const BlankMask&) = default;

 private:
  std::vector<bool> bits_;
  std::size_t count_ = 0;
};

struct PosteriorLoadOptions {
  bool strict = true;           // reject (vs. warn on) rows that do not sum to 1
  double row_sum_tolerance = 1e-4;
};

inline constexpr char kPosteriorMagic[5] = {'P', 'O', 'S', 'T', '1'};

namespace detail {

inline void ValidatePosteriors(const PosteriorMatrix& p, const PosteriorLoadOptions& opts) {
  for (std::size_t u = 0; u < p.num_frames(); ++u) {
    double sum = 0.0;
    for (double v : p.row(u)) {
      if (!std::isfinite(v)) throw PosteriorError("frame " + std::to_string(u) + ": non-finite value");
      if (v < 0.0 || v > 1.0)
        throw PosteriorError("frame " + std::to_string(u) + ": probability outside [0, 1]");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > opts.row_sum_tolerance) {
      std::ostringstream msg;
      msg << "frame " << u << ": row sums to " << sum;
      if (opts.strict) throw PosteriorError(msg.str());
      LSDWFST_WARN << msg.str();
    }
  }
}

inline std::uint32_t ReadLeU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw PosteriorError("truncated binary posterior header");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

inline void WriteLeU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline PosteriorMatrix ReadBinaryPosteriors(std::istream& in) {
  std::uint32_t t = ReadLeU32(in), cols = ReadLeU32(in), blank = ReadLeU32(in);
  PosteriorMatrix p(t, cols, blank);
  for (std::size_t u = 0; u < t; ++u)
    for (std::size_t c = 0; c < cols; ++c) {
      unsigned char b[8];
      if (!in.read(reinterpret_cast<char*>(b), 8))
        throw PosteriorError("dimension mismatch: binary body shorter than T x cols");
      std::uint64_t bits = 0;
      for (int i = 7; i >= 0; --i) bits = bits << 8 | b[i];
      p.at(u, c) = std::bit_cast<double>(bits);
    }
  return p;
}

inline PosteriorMatrix ReadTextPosteriors(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw PosteriorError("missing posterior header");
  auto fields = SplitFields(header);
  std::int64_t t = 0, cols = 0, blank = 0;
  if (fields.size() != 3 || !ParseIndex(fields[0], &t) || !ParseIndex(fields[1], &cols) ||
      fields[2].substr(0, 6) != "blank=" || !ParseIndex(fields[2].substr(6), &blank))
    throw PosteriorError("bad posterior header '" + header + "', expected 'T cols blank=<col>'");
  PosteriorMatrix p(static_cast<std::size_t>(t), static_cast<std::size_t>(cols),
                    static_cast<std::size_t>(blank));
  std::string line;
  std::size_t u = 0;
  while (std::getline(in, line)) {
    auto row = SplitFields(line);
    if (row.empty()) continue;
    if (u >= p.num_frames()) throw PosteriorError("dimension mismatch: more rows than T");
    if (row.size() != p.num_cols())
      throw PosteriorError("dimension mismatch: frame " + std::to_string(u) + " has " +
                           std::to_string(row.size()) + " values");
    for (std::size_t c = 0; c < row.size(); ++c) {
      double v;
      auto f = row[c];
      if (!ParseDouble(f, &v))
        throw PosteriorError("frame " + std::to_string(u) + ": non-finite or unparseable value '" +
                             std::string(f) + "'");
      p.at(u, c) = v;
    }
    ++u;
  }
  if (u != p.num_frames()) throw PosteriorError("dimension mismatch: fewer rows than T");
  return p;
}

}  // namespace detail

/// Reads either the text format ("T cols blank=<col>" header then T rows) or
/// the binary format (magic "POST1", u32 T, u32 cols, u32 blank_col, then
/// little-endian float64 values row-major).
inline PosteriorMatrix load_posteriors(std::istream& in, const PosteriorLoadOptions& opts = {}) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::istringstream body(bytes);
  PosteriorMatrix p;
  if (bytes.size() >= 5 && std::memcmp(bytes.data(), kPosteriorMagic, 5) == 0) {
    body.seekg(5);
    p = detail::ReadBinaryPosteriors(body);
  } else {
    p = detail::ReadTextPosteriors(body);
  }
  detail::ValidatePosteriors(p, opts);
  return p;
}

inline void write_posteriors_text(std::ostream& out, const PosteriorMatrix& p) {
  out << p.num_frames() << ' ' << p.num_cols() << " blank=" << p.blank_col() << '\n';
  for (std::size_t u = 0; u < p.num_frames(); ++u) {
    auto r = p.row(u);
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? " " : "") << detail::FormatCost(r[c]);
    out << '\n';
  }
}

inline void write_posteriors_binary(std::ostream& out, const PosteriorMatrix& p) {
  out.write(kPosteriorMagic, 5);
  detail::WriteLeU32(out, static_cast<std::uint32_t>(p.num_frames()));
  detail::WriteLeU32(out, static_cast<std::uint32_t>(p.num_cols()));
  detail::WriteLeU32(out, static_cast<std::uint32_t>(p.blank_col()));
  for (std::size_t u = 0; u < p.num_frames(); ++u)
    for (double v : p.row(u)) {
      std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
}

/// U = {u : y_blank(u) > threshold}.
inline BlankMask classify_blank_frames(const PosteriorMatrix& p, double threshold) {
  std::vector<bool> bits(p.num_frames());
  for (std::size_t u = 0; u < p.num_frames(); ++u) bits[u] = p.blank_prob(u) > threshold;
  return BlankMask(std::move(bits));
}

/// -scale * log(p(u, l)); probability 0 maps to +inf.
inline Weight acoustic_cost(const PosteriorMatrix& p, std::size_t u, Label l, double scale) {
  double prob = p.label_prob(u, l);
  if (prob <= 0.0) return Weight::Zero();
  return Weight(0.0 - scale * std::log(prob));
}

/// Copy of `p` without the frames flagged in `mask`.
inline PosteriorMatrix filter_frames(const PosteriorMatrix& p, const BlankMask& mask) {
  PosteriorMatrix out(p.num_frames() - mask.count(), p.num_cols(), p.blank_col());
  std::size_t k = 0;
  for (std::size_t u = 0; u < p.num_frames(); ++u) {
    if (mask.is_blank(u)) continue;
    auto src = p.row(u);
    std::copy(src.begin(), src.end(), out.row(k++).begin());
  }
  return out;
}

}  // namespace lsdwfst

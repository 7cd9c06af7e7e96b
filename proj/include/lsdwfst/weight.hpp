// lsdwfst/weight.hpp

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

#include <cmath>
#include <compare>
#include <limits>

namespace lsdwfst {

/// Tropical-semiring weight: a cost in the negative-log domain.
/// Plus is min, Times is addition, Zero is +inf and One is 0.
class Weight {
 public:
  constexpr Weight() = default;
  constexpr explicit Weight(double cost) : value_(cost) {}

  static constexpr Weight Zero() { return Weight(std::numeric_limits<double>::infinity()); }
  static constexpr Weight One() { return Weight(0.0); }

  constexpr double value() const { return value_; }
  bool is_finite() const { return std::isfinite(value_); }
  bool is_zero() const { return value_ == std::numeric_limits<double>::infinity(); }

  friend constexpr Weight Plus(Weight a, Weight b) { return a.value_ <= b.value_ ? a : b; }
  friend constexpr Weight Times(Weight a, Weight b) { return Weight(a.value_ + b.value_); }

  friend constexpr bool operator==(Weight a, Weight b) = default;
  friend constexpr auto operator<=>(Weight a, Weight b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

}  // namespace lsdwfst

// tests/wfst_test.cc

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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lsdwfst/wfst.hpp"
#include "lsdwfst/wfst_text.hpp"
#include "oracle.hpp"

namespace lsdwfst {
namespace {

Wfst Parse(const std::string& text, const WfstParseOptions& opts = {}) {
  std::istringstream in(text);
  return parse_wfst_text(in, nullptr, nullptr, opts);
}

TEST(WeightTest, TropicalOperations) {
  Weight a(1.5), b(0.25);
  EXPECT_EQ(Plus(a, b), b);
  EXPECT_DOUBLE_EQ(Times(a, b).value(), 1.75);
  EXPECT_EQ(Times(a, Weight::One()), a);
  EXPECT_TRUE(Times(a, Weight::Zero()).is_zero());
  EXPECT_EQ(Plus(a, Weight::Zero()), a);
}

TEST(ParseWfstText, OneArc) {
  Wfst w = Parse("0 1 1 1 0.5\n1 0.0\n");
  EXPECT_EQ(w.num_states(), 2);
  EXPECT_EQ(w.start(), 0);
  ASSERT_EQ(w.num_arcs(), 1u);
  EXPECT_EQ(w.arcs()[0], (Arc{0, 1, 1, 1, Weight(0.5)}));
  EXPECT_EQ(w.final_weight(1), Weight(0.0));
  EXPECT_FALSE(w.is_final(0));
}

TEST(ParseWfstText, SingleFinalLineDefaultsToZeroWeight) {
  Wfst w = Parse("0\n");
  EXPECT_EQ(w.num_states(), 1);
  EXPECT_EQ(w.num_arcs(), 0u);
  EXPECT_EQ(w.final_weight(0), Weight::One());
}

TEST(ParseWfstText, FirstMentionedStateIsStart) {
  Wfst w = Parse("# comment\n\n3 1 2 2\n1 3 1 1 0.25\n1\n");
  EXPECT_EQ(w.start(), 3);
  EXPECT_EQ(w.num_states(), 4);
}

TEST(ParseWfstText, IncomingArcsOfRecombinationState) {
  // States 2, 5 and 7 all feed state 7 (7 via its self-loop).
  Wfst w = Parse("0 2 1 1 1.0\n0 5 2 2 1.0\n2 7 1 1 1.0\n5 7 2 2 0.5\n7 7 1 0 0.4\n7 0.0\n");
  auto in = w.incoming_arcs(7);
  ASSERT_EQ(in.size(), 3u);
  std::vector<StateId> srcs;
  for (const Arc& a : in) srcs.push_back(a.src);
  std::sort(srcs.begin(), srcs.end());
  EXPECT_EQ(srcs, (std::vector<StateId>{2, 5, 7}));
  auto out = w.out_arcs(7);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].dst, 7);
}

TEST(ParseWfstText, ArcsSortedByIlabelThenDst) {
  Wfst w = Parse("0 3 2 0\n0 1 2 0\n0 2 0 0\n0 1 1 0\n3\n");
  auto out = w.out_arcs(0);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_EQ(std::make_pair(out[0].ilabel, out[0].dst), std::make_pair(0, 2));
  EXPECT_EQ(std::make_pair(out[1].ilabel, out[1].dst), std::make_pair(1, 1));
  EXPECT_EQ(std::make_pair(out[2].ilabel, out[2].dst), std::make_pair(2, 1));
  EXPECT_EQ(std::make_pair(out[3].ilabel, out[3].dst), std::make_pair(2, 3));
  EXPECT_EQ(w.num_epsilon_arcs(0), 1u);
  EXPECT_EQ(w.emitting_arcs(0).size(), 3u);
}

TEST(ParseWfstText, Errors) {
  try {
    Parse("0 1 1 1 0.5\n0 1 1\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(Parse("0 1 1 1 abc\n"), ParseError);
  EXPECT_THROW(Parse("0 1 x 1\n"), ParseError);
  EXPECT_THROW(Parse("-1 1 1 1\n"), ParseError);
  EXPECT_THROW(Parse("0 1 1 1 -0.5\n"), ParseError);
  EXPECT_THROW(Parse("0 1 1 1 nan\n"), ParseError);
  EXPECT_NO_THROW(Parse("0 1 1 1 -0.5\n1\n", {.allow_negative_weights = true}));
}

TEST(ParseWfstText, UnknownSymbol) {
  SymbolTable syms;
  syms.add("a", 1);
  std::istringstream in("0 1 a b 0.5\n1\n");
  EXPECT_THROW(parse_wfst_text(in, &syms, &syms), SymbolError);
  std::istringstream ok("0 1 a a 0.5\n1\n");
  EXPECT_EQ(parse_wfst_text(ok, &syms, &syms).arcs()[0].ilabel, 1);
}

TEST(OutArcs, BoundsAndEmptySlice) {
  Wfst w = Parse("0 1 1 1 0.5\n1 0.0\n");
  EXPECT_TRUE(w.out_arcs(1).empty());
  ASSERT_EQ(w.out_arcs(0).size(), 1u);
  EXPECT_EQ(w.out_arcs(0)[0], w.arcs()[0]);
  EXPECT_THROW(w.out_arcs(2), std::out_of_range);
  EXPECT_THROW(w.out_arcs(-1), std::out_of_range);
}

TEST(ValidateEpsilonAcyclic, Cases) {
  EXPECT_TRUE(validate_epsilon_acyclic(Parse("0 1 1 1 0.5\n1 0.0\n")).ok());

  auto mutual = validate_epsilon_acyclic(Parse("0 1 0 0 0\n1 0 0 0 0\n1\n"));
  ASSERT_FALSE(mutual.ok());
  std::vector<StateId> cyc = mutual.cycle;
  std::sort(cyc.begin(), cyc.end());
  EXPECT_EQ(cyc, (std::vector<StateId>{0, 1}));

  EXPECT_TRUE(validate_epsilon_acyclic(Parse("0 0 0 0 0.3\n0 1 1 1\n1\n")).ok());
  EXPECT_FALSE(validate_epsilon_acyclic(Parse("0 0 0 0 0\n0\n")).ok());
  // A zero-weight epsilon cycle hidden inside a larger positive component.
  auto mixed = validate_epsilon_acyclic(
      Parse("0 1 0 0 1\n1 2 0 0 0\n2 1 0 0 0\n2 0 0 0 1\n2\n"));
  ASSERT_FALSE(mixed.ok());
  EXPECT_LE(mixed.total_weight, 0.0);
  // Negative and positive arcs summing to zero.
  auto neg = validate_epsilon_acyclic(Parse("0 1 0 0 -1\n1 0 0 0 1\n1\n", {.allow_negative_weights = true}));
  EXPECT_FALSE(neg.ok());
  EXPECT_TRUE(validate_epsilon_acyclic(Parse("0 1 0 0 1\n1 0 0 0 1\n1\n")).ok());
  // Emitting cycles are irrelevant.
  EXPECT_TRUE(validate_epsilon_acyclic(Parse("0 1 1 0 0\n1 0 1 0 0\n1\n")).ok());
}

TEST(WfstProperties, OffsetsPartitionArcsAndTextRoundTrips) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = testing::RandomInstance(rng);
    const Wfst& w = inst.wfst;
    std::size_t visited = 0;
    for (StateId s = 0; s < w.num_states(); ++s) {
      EXPECT_EQ(w.out_arcs(s).data(), w.arcs().data() + w.arc_offset(s));
      for (const Arc& a : w.out_arcs(s)) EXPECT_EQ(a.src, s);
      visited += w.out_degree(s);
    }
    EXPECT_EQ(visited, w.num_arcs());

    std::ostringstream out;
    write_wfst_text(out, w);
    std::istringstream in(out.str());
    Wfst back = parse_wfst_text(in);
    EXPECT_EQ(back, w) << out.str();
    EXPECT_EQ(back.num_states(), w.num_states());
  }
}

TEST(WfstProperties, CorruptedInputGivesStructuredErrors) {
  std::mt19937_64 rng(5);
  const std::string alphabet = "0123456789 .-#\nabx";
  for (int trial = 0; trial < 500; ++trial) {
    auto inst = testing::RandomInstance(rng);
    std::ostringstream out;
    write_wfst_text(out, inst.wfst);
    std::string text = out.str();
    for (int k = 0; k < 3 && !text.empty(); ++k)
      text[rng() % text.size()] = alphabet[rng() % alphabet.size()];
    std::istringstream in(text);
    try {
      parse_wfst_text(in, nullptr, nullptr, {.max_state_id = 100000});
    } catch (const ParseError&) {
    } catch (const std::invalid_argument&) {
    }
  }
}

TEST(ParseWfstText, StateIdLimit) {
  EXPECT_THROW(Parse("0 5000 1 1\n", {.max_state_id = 4999}), ParseError);
  EXPECT_EQ(Parse("0 4999 1 1\n4999\n", {.max_state_id = 4999}).num_states(), 5000);
}

TEST(SymbolTableTest, ReadWriteAndErrors) {
  std::istringstream in("<eps> 0\na 1\nb 2\n");
  SymbolTable t = SymbolTable::Read(in);
  EXPECT_EQ(t.symbol(2), "b");
  EXPECT_EQ(*t.find("a"), 1);
  std::ostringstream out;
  t.Write(out);
  EXPECT_EQ(out.str(), "<eps> 0\na 1\nb 2\n");
  std::istringstream bad("x 0\n");
  EXPECT_THROW(SymbolTable::Read(bad), SymbolError);
  std::istringstream dup("<eps> 0\na 1\nb 1\n");
  EXPECT_THROW(SymbolTable::Read(dup), SymbolError);
  std::istringstream short_line("a\n");
  EXPECT_THROW(SymbolTable::Read(short_line), SymbolError);
}

}  // namespace
}  // namespace lsdwfst

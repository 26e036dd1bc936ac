// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "longseg/align.hpp"
#include "support/oracles.hpp"

using namespace longseg;

namespace {

using V = std::vector<std::string>;
const std::string D(kDelimiter);

DelimitedText gen(const std::string& text) { return parse_generated(text); }

}  // namespace

TEST(Levenshtein, CostMatchesIndependentOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = oracle::random_tokens(rng, rng() % 25, 4);
    auto b = oracle::random_tokens(rng, rng() % 25, 4);
    EXPECT_EQ(levenshtein_align(a, b).total_cost, oracle::edit_distance(a, b));
  }
}

TEST(Levenshtein, LinksAreMonotoneAndCostConsistent) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = oracle::random_tokens(rng, rng() % 20, 3);
    auto b = oracle::random_tokens(rng, rng() % 20, 3);
    auto al = levenshtein_align(a, b);
    std::size_t i = 0, j = 0, cost = 0;
    for (const auto& l : al.links) {
      switch (l.op) {
        case EditOp::kMatch:
          ASSERT_EQ(l.ref, i);
          ASSERT_EQ(l.gen, j);
          ASSERT_EQ(a[i], b[j]);
          ++i, ++j;
          break;
        case EditOp::kSubst:
          ASSERT_EQ(l.ref, i);
          ASSERT_EQ(l.gen, j);
          ASSERT_NE(a[i], b[j]);
          ++i, ++j, ++cost;
          break;
        case EditOp::kDelete:
          ASSERT_EQ(l.ref, i);
          ASSERT_EQ(l.gen, kNoIndex);
          ++i, ++cost;
          break;
        case EditOp::kInsert:
          ASSERT_EQ(l.ref, kNoIndex);
          ASSERT_EQ(l.gen, j);
          ++j, ++cost;
          break;
      }
    }
    EXPECT_EQ(i, a.size());
    EXPECT_EQ(j, b.size());
    EXPECT_EQ(cost, al.total_cost);
  }
}

TEST(Levenshtein, TieBreakPrefersSubstitutionOverIndel) {
  // "a b" vs "a c": one substitution rather than delete + insert.
  auto al = levenshtein_align(V{"a", "b"}, V{"a", "c"});
  ASSERT_EQ(al.links.size(), 2u);
  EXPECT_EQ(al.links[1].op, EditOp::kSubst);
  // "x" vs "y x": the match is kept; the extra token is an insertion.
  al = levenshtein_align(V{"x"}, V{"y", "x"});
  ASSERT_EQ(al.links.size(), 2u);
  EXPECT_EQ(al.links[0].op, EditOp::kInsert);
  EXPECT_EQ(al.links[1].op, EditOp::kMatch);
}

TEST(Levenshtein, EmptySides) {
  EXPECT_EQ(levenshtein_align(V{}, V{}).total_cost, 0u);
  EXPECT_EQ(levenshtein_align(V{"a", "b"}, V{}).total_cost, 2u);
  EXPECT_EQ(levenshtein_align(V{}, V{"a"}).links.front().op, EditOp::kInsert);
}

TEST(Projection, IdentityForWellFormedText) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    Transcript t(oracle::random_tokens(rng, n));
    auto y = oracle::random_labels(rng, n);
    EXPECT_EQ(project_boundaries(t, gen(render(encode_delimited(t, y)))), y);
  }
}

TEST(Projection, DelimiterFallsForwardPastInsertions) {
  V ref{"a", "b", "c", "d"};
  // Inserted "uh" carries the delimiter; it lands on the next aligned token.
  EXPECT_EQ(project_boundaries(V{"a", "b", "c"}, gen("a " + D + " uh b c")),
            SegmentationLabels::from_splits(3, {1}));
  EXPECT_EQ(project_boundaries(ref, gen("a b " + D + " uh c d")),
            SegmentationLabels::from_splits(4, {2}));
}

TEST(Projection, SubstitutedTokenKeepsItsBoundary) {
  V ref{"a", "b", "c"};
  EXPECT_EQ(project_boundaries(ref, gen("a " + D + " x c")),
            SegmentationLabels::from_splits(3, {1}));
}

TEST(Projection, TrailingAndInitialDelimitersAreIgnored) {
  V ref{"a", "b"};
  EXPECT_EQ(project_boundaries(ref, gen(D + " a b " + D)), SegmentationLabels::from_splits(2, {}));
  // Leading inserted word with a delimiter before the first real token.
  EXPECT_EQ(project_boundaries(ref, gen("uh " + D + " a b")),
            SegmentationLabels::from_splits(2, {}));
}

TEST(Projection, TotalOnGarbage) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = rng() % 30;
    auto ref = oracle::random_tokens(rng, n, 6);
    std::string text;
    for (std::size_t k = rng() % 40; k > 0; --k)
      text += (rng() % 3 == 0 ? D : "w" + std::to_string(rng() % 9)) + (rng() % 4 ? " " : "");
    auto l = project_boundaries(ref, gen(text));
    ASSERT_EQ(l.size(), n);
    if (n) {
      ASSERT_TRUE(l.is_split(0));
    }
  }
}

TEST(Oracle, ProjectsPunctuationOntoAsr) {
  const std::string ref = "Hello there. How are you? Dr. Smith is fine!";
  auto asr = Transcript::from_text("hello there how are you doctor smith is fine", "d", true);
  // "dr" vs "doctor" is a substitution; the boundary before it survives.
  EXPECT_EQ(project_oracle(ref, asr), SegmentationLabels::from_splits(9, {2, 5}));
  auto same = Transcript::from_text(ref, "d", true);
  EXPECT_EQ(project_oracle(ref, same), SegmentationLabels::from_splits(9, {2, 5}));
}

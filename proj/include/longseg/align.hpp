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

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longseg/core.hpp"
#include "longseg/segmenters/rule_punctuation.hpp"

namespace longseg {

enum class EditOp : unsigned char { kMatch, kSubst, kInsert, kDelete };

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// One alignment column. INSERT has no reference index, DELETE no generated
/// index (kNoIndex).
struct AlignLink {
  EditOp op = EditOp::kMatch;
  std::size_t ref = kNoIndex;
  std::size_t gen = kNoIndex;
  friend bool operator==(const AlignLink&, const AlignLink&) = default;
};

struct Alignment {
  std::vector<AlignLink> links;
  std::size_t total_cost = 0;
};

/// Unit-cost Levenshtein alignment. Among optimal alignments the backtrace
/// prefers MATCH, then SUBST, then DELETE, then INSERT at every cell.
inline Alignment levenshtein_align(std::span<const std::string> reference,
                                   std::span<const std::string> generated) {
  const std::size_t m = reference.size();
  const std::size_t g = generated.size();
  const std::size_t cols = g + 1;
  std::vector<std::size_t> cost((m + 1) * cols);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * cols + j]; };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= g; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= g; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (reference[i - 1] == generated[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  Alignment out;
  out.total_cost = at(m, g);
  std::size_t i = m, j = g;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == generated[j - 1];
      if (same && at(i - 1, j - 1) == here) {
        out.links.push_back({EditOp::kMatch, i - 1, j - 1});
        --i, --j;
        continue;
      }
      if (!same && at(i - 1, j - 1) + 1 == here) {
        out.links.push_back({EditOp::kSubst, i - 1, j - 1});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i - 1, j) + 1 == here) {
      out.links.push_back({EditOp::kDelete, i - 1, kNoIndex});
      --i;
      continue;
    }
    out.links.push_back({EditOp::kInsert, kNoIndex, j - 1});
    --j;
  }
  std::reverse(out.links.begin(), out.links.end());
  return out;
}

/// Maps the delimiters of freely generated text onto the reference tokens.
///
/// A delimiter belongs to the generated token that follows it and lands on
/// that token's aligned reference position. Tokens without a counterpart
/// pass their delimiter forward to the next aligned token; delimiters with
/// nothing aligned after them are dropped. Total for any input.
inline SegmentationLabels project_boundaries(std::span<const std::string> reference,
                                             const DelimitedText& generated) {
  const auto gen_tokens = generated.tokens();
  const auto alignment = levenshtein_align(reference, gen_tokens);

  std::vector<std::size_t> ref_of(gen_tokens.size(), kNoIndex);
  for (const auto& link : alignment.links)
    if (link.op == EditOp::kMatch || link.op == EditOp::kSubst) ref_of[link.gen] = link.ref;

  // The delimiter on generated token 0 is the implied initial boundary.
  std::vector<std::size_t> splits;
  bool carry = false;
  for (std::size_t j = 0; j < gen_tokens.size(); ++j) {
    carry = carry || (j > 0 && generated.items[j].delimiter);
    if (carry && ref_of[j] != kNoIndex) {
      splits.push_back(ref_of[j]);
      carry = false;
    }
  }
  return SegmentationLabels::from_splits(reference.size(), splits);
}

inline SegmentationLabels project_boundaries(const Transcript& reference,
                                             const DelimitedText& generated) {
  return project_boundaries(std::span<const std::string>(reference.tokens()), generated);
}

/// Oracle segmentation: sentence boundaries of a punctuated reference
/// transcript, carried onto the (normalized) ASR tokens through a
/// Levenshtein alignment of the normalized reference against the ASR.
inline SegmentationLabels project_oracle(std::string_view reference_punctuated,
                                         const Transcript& asr,
                                         const RulePunctuation& rules = {}) {
  const auto derived = rules.derive_labels(reference_punctuated);
  return project_boundaries(asr, encode_delimited(derived.transcript, derived.labels));
}

}  // namespace longseg

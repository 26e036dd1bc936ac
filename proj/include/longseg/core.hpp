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
#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace longseg {

// U+25A0 BLACK SQUARE, UTF-8 encoded.
inline constexpr std::string_view kDelimiter = "\xE2\x96\xA0";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ─── Tokens ──────────────────────────────────────────────────────────────────

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool valid_token(std::string_view tok,
                        std::string_view delimiter = kDelimiter) {
  if (tok.empty()) return false;
  if (std::any_of(tok.begin(), tok.end(), is_space)) return false;
  return tok.find(delimiter) == std::string_view::npos;
}

/// Lowercases ASCII letters and removes ASCII punctuation. Non-ASCII bytes
/// pass through unchanged. May return an empty string.
inline std::string normalize_token(std::string_view tok) {
  std::string out;
  out.reserve(tok.size());
  for (char c : tok) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80) {
      if (std::ispunct(u)) continue;
      out.push_back(static_cast<char>(std::tolower(u)));
    } else {
      out.push_back(c);
    }
  }
  return out;
}

// ─── Domain types ────────────────────────────────────────────────────────────

enum class Decision : unsigned char { kContinue = 0, kSplit = 1 };

class Transcript {
 public:
  Transcript() = default;
  explicit Transcript(std::vector<std::string> tokens, std::string source_id = {})
      : tokens_(std::move(tokens)), source_id_(std::move(source_id)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!valid_token(tokens_[i]))
        throw Error("invalid token at position " + std::to_string(i) +
                    " in transcript '" + source_id_ + "'");
    }
  }

  static Transcript from_text(std::string_view text, std::string source_id = {},
                              bool normalize = false) {
    auto toks = split_whitespace(text);
    if (normalize) {
      std::vector<std::string> kept;
      kept.reserve(toks.size());
      for (auto& t : toks) {
        auto n = normalize_token(t);
        if (!n.empty()) kept.push_back(std::move(n));
      }
      toks = std::move(kept);
    }
    return Transcript(std::move(toks), std::move(source_id));
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& source_id() const { return source_id_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<std::string> tokens_;
  std::string source_id_;
};

/// One decision per token; position 0 is always SPLIT.
class SegmentationLabels {
 public:
  SegmentationLabels() = default;
  explicit SegmentationLabels(std::vector<Decision> decisions)
      : decisions_(std::move(decisions)) {
    if (!decisions_.empty() && decisions_.front() != Decision::kSplit)
      throw Error("segmentation labels must start with SPLIT");
  }

  /// All CONTINUE except position 0 and the listed positions.
  static SegmentationLabels from_splits(std::size_t n,
                                        const std::vector<std::size_t>& splits) {
    std::vector<Decision> d(n, Decision::kContinue);
    if (n > 0) d[0] = Decision::kSplit;
    for (auto p : splits) {
      if (p >= n)
        throw Error("split position " + std::to_string(p) +
                    " out of range for length " + std::to_string(n));
      d[p] = Decision::kSplit;
    }
    return SegmentationLabels(std::move(d));
  }

  std::size_t size() const { return decisions_.size(); }
  bool empty() const { return decisions_.empty(); }
  Decision operator[](std::size_t i) const { return decisions_[i]; }
  bool is_split(std::size_t i) const { return decisions_[i] == Decision::kSplit; }
  const std::vector<Decision>& decisions() const { return decisions_; }

  /// SPLIT positions including 0.
  std::vector<std::size_t> split_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < decisions_.size(); ++i)
      if (is_split(i)) out.push_back(i);
    return out;
  }

  std::size_t split_count() const {
    return static_cast<std::size_t>(
        std::count(decisions_.begin(), decisions_.end(), Decision::kSplit));
  }

  friend bool operator==(const SegmentationLabels&,
                         const SegmentationLabels&) = default;

 private:
  std::vector<Decision> decisions_;
};

struct DelimitedItem {
  bool delimiter = false;
  std::string token;
  friend bool operator==(const DelimitedItem&, const DelimitedItem&) = default;
};

struct DelimitedText {
  std::vector<DelimitedItem> items;

  std::vector<std::string> tokens() const {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& it : items) out.push_back(it.token);
    return out;
  }
  friend bool operator==(const DelimitedText&, const DelimitedText&) = default;
};

struct Segment {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  std::size_t length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

// ─── Delimiter-insertion encoding ────────────────────────────────────────────

inline DelimitedText encode_delimited(const Transcript& transcript,
                                      const SegmentationLabels& labels) {
  if (labels.size() != transcript.size())
    throw Error("labels length " + std::to_string(labels.size()) +
                " does not match transcript length " +
                std::to_string(transcript.size()));
  DelimitedText out;
  out.items.reserve(transcript.size());
  for (std::size_t t = 0; t < transcript.size(); ++t)
    out.items.push_back({labels.is_split(t), transcript[t]});
  return out;
}

/// Space-joined rendering. The delimiter before the first token is omitted
/// unless `suppress_initial` is false.
inline std::string render(const DelimitedText& text,
                          std::string_view delimiter = kDelimiter,
                          bool suppress_initial = true) {
  std::string out;
  for (std::size_t t = 0; t < text.items.size(); ++t) {
    const auto& it = text.items[t];
    if (it.delimiter && !(t == 0 && suppress_initial)) {
      if (!out.empty()) out.push_back(' ');
      out.append(delimiter);
    }
    if (!out.empty()) out.push_back(' ');
    out.append(it.token);
  }
  return out;
}

/// Lenient parse of free-form generated text. Delimiters glued to words are
/// split off, runs of delimiters collapse and a trailing delimiter is dropped.
inline DelimitedText parse_generated(std::string_view text,
                                     std::string_view delimiter = kDelimiter) {
  DelimitedText out;
  bool pending = false;
  for (const auto& raw : split_whitespace(text)) {
    std::string_view rest = raw;
    while (!rest.empty()) {
      auto pos = rest.find(delimiter);
      if (pos == 0) {
        pending = true;
        rest.remove_prefix(delimiter.size());
        continue;
      }
      auto piece = rest.substr(0, pos);
      out.items.push_back({pending, std::string(piece)});
      pending = false;
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos);
    }
  }
  return out;
}

struct DecodeResult {
  std::optional<SegmentationLabels> labels;
  // First violating reference position when malformed.
  std::size_t malformed_at = 0;

  bool ok() const { return labels.has_value(); }
};

/// Strict decoding: the candidate must reproduce `reference` exactly, with at
/// most one delimiter before each token and none after the last one. A
/// leading delimiter is accepted as the implied position-0 boundary.
inline DecodeResult decode_delimited(std::string_view candidate,
                                     const Transcript& reference,
                                     std::string_view delimiter = kDelimiter) {
  const std::size_t n = reference.size();
  std::vector<Decision> d(n, Decision::kContinue);
  std::size_t i = 0;
  bool pending = false;
  for (const auto& tok : split_whitespace(candidate)) {
    if (tok == delimiter) {
      if (pending || i == n) return {std::nullopt, i};
      pending = true;
      continue;
    }
    if (i >= n || tok != reference[i]) return {std::nullopt, i};
    d[i] = (i == 0 || pending) ? Decision::kSplit : Decision::kContinue;
    pending = false;
    ++i;
  }
  if (pending || i < n) return {std::nullopt, i};
  return {SegmentationLabels(std::move(d)), 0};
}

// ─── Segments ────────────────────────────────────────────────────────────────

inline std::vector<Segment> labels_to_segments(const SegmentationLabels& labels) {
  std::vector<Segment> out;
  const std::size_t n = labels.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (labels.is_split(t)) {
      if (!out.empty()) out.back().end = t;
      out.push_back({t, n});
    }
  }
  return out;
}

inline SegmentationLabels segments_to_labels(std::size_t n,
                                             const std::vector<Segment>& segs) {
  std::size_t expect = 0;
  std::vector<Decision> d(n, Decision::kContinue);
  for (const auto& s : segs) {
    if (s.start != expect || s.end <= s.start || s.end > n)
      throw Error("segments do not partition [0, " + std::to_string(n) + ")");
    d[s.start] = Decision::kSplit;
    expect = s.end;
  }
  if (expect != n)
    throw Error("segments do not partition [0, " + std::to_string(n) + ")");
  return SegmentationLabels(std::move(d));
}

inline std::string join_tokens(const std::vector<std::string>& tokens,
                               std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back(' ');
    out.append(tokens[i]);
  }
  return out;
}

}  // namespace longseg

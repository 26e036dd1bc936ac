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

#include <cctype>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longseg/core.hpp"
#include "longseg/io.hpp"

namespace longseg {

inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> kList = {
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "st.",   "sr.",   "jr.",
      "mt.",   "ft.",   "rev.",  "gen.",  "gov.",  "sen.",  "rep.",  "col.",
      "lt.",   "sgt.",  "capt.", "cmdr.", "hon.",  "pres.", "supt.", "messrs.",
      "e.g.",  "i.e.",  "etc.",  "vs.",   "cf.",   "al.",   "approx.", "ca.",
      "no.",   "nos.",  "vol.",  "fig.",  "p.",    "pp.",   "ch.",   "sec.",
      "jan.",  "feb.",  "mar.",  "apr.",  "jun.",  "jul.",  "aug.",  "sep.",
      "sept.", "oct.",  "nov.",  "dec.",  "inc.",  "ltd.",  "co.",   "corp.",
      "dept.", "univ.", "ave.",  "blvd.", "u.s.",  "u.k.",  "a.m.",  "p.m.",
  };
  return kList;
}

/// Sentence-boundary rules over punctuated, cased text. A token ending in
/// `.`, `?` or `!` (optionally followed by closing quotes or brackets) ends a
/// sentence unless it is a listed abbreviation or a single letter followed
/// by a period.
class RulePunctuation {
 public:
  RulePunctuation() : RulePunctuation(default_abbreviations()) {}
  explicit RulePunctuation(const std::vector<std::string>& abbreviations) {
    for (const auto& a : abbreviations) abbrevs_.insert(lower(a));
  }

  /// One abbreviation per line; blank lines and `#` comments are ignored.
  static RulePunctuation from_file(const std::filesystem::path& path) {
    std::vector<std::string> list;
    for (auto& tok : split_lines(read_file(path))) list.push_back(std::move(tok));
    return RulePunctuation(list);
  }

  bool is_terminal(std::string_view raw) const {
    std::string_view t = strip_closers(raw);
    if (t.empty()) return false;
    const char last = t.back();
    if (last == '?' || last == '!') return true;
    if (last != '.') return false;
    const std::string low = lower(strip_openers(t));
    if (abbrevs_.count(low)) return false;
    // "J." style initials.
    if (low.size() == 2 && std::isalpha(static_cast<unsigned char>(low[0])))
      return false;
    return true;
  }

  struct Derived {
    Transcript transcript;
    SegmentationLabels labels;
  };

  /// Normalized transcript plus the boundaries implied by the punctuation.
  /// Tokens that normalize to nothing are dropped; a standalone terminal
  /// mark still closes the preceding sentence.
  Derived derive_labels(std::string_view punctuated,
                        std::string source_id = {}) const {
    std::vector<std::string> tokens;
    std::vector<std::size_t> splits;
    bool boundary_pending = false;
    for (const auto& raw : split_whitespace(punctuated)) {
      auto norm = normalize_token(raw);
      if (!norm.empty()) {
        if (boundary_pending && !tokens.empty()) splits.push_back(tokens.size());
        boundary_pending = false;
        tokens.push_back(std::move(norm));
      }
      if (is_terminal(raw)) boundary_pending = true;
    }
    const std::size_t n = tokens.size();
    return {Transcript(std::move(tokens), std::move(source_id)),
            SegmentationLabels::from_splits(n, splits)};
  }

  /// Window-level rule: SPLIT at t when token t-1 is sentence-terminal.
  /// Useful when the transcript itself still carries punctuation.
  SegmentationLabels segment_tokens(std::span<const std::string> tokens) const {
    std::vector<std::size_t> splits;
    for (std::size_t t = 1; t < tokens.size(); ++t)
      if (is_terminal(tokens[t - 1])) splits.push_back(t);
    return SegmentationLabels::from_splits(tokens.size(), splits);
  }

 private:
  static std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
  }

  static bool is_closer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
  }

  static std::string_view strip_closers(std::string_view s) {
    while (!s.empty() && is_closer(s.back())) s.remove_suffix(1);
    return s;
  }

  static std::string_view strip_openers(std::string_view s) {
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' ||
                          s.front() == '(' || s.front() == '['))
      s.remove_prefix(1);
    return s;
  }

  static std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      std::string line = text.substr(start, nl == std::string::npos ? nl : nl - start);
      auto toks = split_whitespace(line);
      if (!toks.empty() && toks[0][0] != '#') out.push_back(toks[0]);
      if (nl == std::string::npos) break;
      start = nl + 1;
    }
    return out;
  }

  std::set<std::string> abbrevs_;
};

}  // namespace longseg

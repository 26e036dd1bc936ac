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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "longseg/core.hpp"

namespace longseg {

using StateId = std::uint32_t;

/// An output symbol of the segmentation acceptor. `position` is the index of
/// the token consumed, or of the token the delimiter precedes.
struct Symbol {
  enum class Kind : unsigned char { kToken, kDelimiter };
  Kind kind = Kind::kToken;
  std::size_t position = 0;

  bool is_delimiter() const { return kind == Kind::kDelimiter; }
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct Arc {
  Symbol symbol;
  StateId next = 0;
};

struct AutomatonOptions {
  // Permit a delimiter before the first token. Off by default: position 0 is
  // an implied boundary.
  bool allow_initial_delimiter = false;
  std::string delimiter = std::string(kDelimiter);
};

/// Deterministic acceptor of every delimiter insertion into a token sequence.
///
/// Shape: token states q_0..q_w linked by the token arcs, plus one delimiter
/// state d_i per position that admits a boundary, reached from q_i by the
/// delimiter and left by token i. There is no delimiter state after the last
/// token, so trailing and doubled delimiters are unrepresentable. States are
/// numbered in topological order with d_i just before q_{i+1}.
class SegAutomaton {
 public:
  static SegAutomaton build(std::span<const std::string> tokens,
                            const AutomatonOptions& opts = {}) {
    for (const auto& t : tokens)
      if (!valid_token(t, opts.delimiter))
        throw Error("automaton: invalid window token '" + t + "'");
    SegAutomaton a;
    a.tokens_.assign(tokens.begin(), tokens.end());
    a.delimiter_ = opts.delimiter;
    a.arcs_.emplace_back();  // q_0
    a.position_.push_back(0);
    a.is_delim_state_.push_back(false);
    StateId q = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const bool boundary = i > 0 || opts.allow_initial_delimiter;
      StateId d = 0;
      if (boundary) d = a.add_state(i, true);
      const StateId next_q = a.add_state(i + 1, false);
      a.arcs_[q].push_back({{Symbol::Kind::kToken, i}, next_q});
      if (boundary) {
        a.arcs_[q].push_back({{Symbol::Kind::kDelimiter, i}, d});
        a.arcs_[d].push_back({{Symbol::Kind::kToken, i}, next_q});
      }
      q = next_q;
    }
    a.final_ = q;
    return a;
  }

  std::size_t num_states() const { return arcs_.size(); }
  std::size_t num_arcs() const {
    std::size_t n = 0;
    for (const auto& v : arcs_) n += v.size();
    return n;
  }
  StateId start() const { return 0; }
  StateId final_state() const { return final_; }
  bool is_final(StateId s) const { return s == final_; }
  std::size_t window_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& delimiter() const { return delimiter_; }

  std::span<const Arc> arcs(StateId s) const {
    check(s);
    return arcs_[s];
  }

  /// Tokens consumed on every path into `s`.
  std::size_t position(StateId s) const {
    check(s);
    return position_[s];
  }
  bool is_delimiter_state(StateId s) const {
    check(s);
    return is_delim_state_[s];
  }

  const std::string& label(const Symbol& sym) const {
    return sym.is_delimiter() ? delimiter_ : tokens_.at(sym.position);
  }

  /// Outgoing arc labels, token first.
  std::vector<std::string> allowed_symbols(StateId s) const {
    std::vector<std::string> out;
    for (const auto& arc : arcs(s)) out.push_back(label(arc.symbol));
    return out;
  }

  /// Decodes an accepted symbol path into window labels.
  SegmentationLabels labels_for(std::span<const Symbol> path) const {
    std::vector<Decision> d(tokens_.size(), Decision::kContinue);
    bool pending = false;
    std::size_t consumed = 0;
    for (const auto& sym : path) {
      if (sym.is_delimiter()) {
        pending = true;
        continue;
      }
      if (sym.position != consumed) throw Error("automaton: path out of order");
      d[consumed] = (consumed == 0 || pending) ? Decision::kSplit
                                               : Decision::kContinue;
      pending = false;
      ++consumed;
    }
    if (consumed != tokens_.size() || pending)
      throw Error("automaton: incomplete path");
    return SegmentationLabels(std::move(d));
  }

  /// One arc per line as `src dst input output`, then the final state alone
  /// on the last line (AT&T text format, acceptor so input == output).
  std::string to_text() const {
    std::string out;
    for (StateId s = 0; s < arcs_.size(); ++s) {
      for (const auto& arc : arcs_[s]) {
        const auto& l = label(arc.symbol);
        out += std::to_string(s) + ' ' + std::to_string(arc.next) + ' ' + l +
               ' ' + l + '\n';
      }
    }
    out += std::to_string(final_) + '\n';
    return out;
  }

 private:
  StateId add_state(std::size_t position, bool delim) {
    arcs_.emplace_back();
    position_.push_back(position);
    is_delim_state_.push_back(delim);
    return static_cast<StateId>(arcs_.size() - 1);
  }

  void check(StateId s) const {
    if (s >= arcs_.size())
      throw Error("automaton: unknown state " + std::to_string(s));
  }

  std::vector<std::string> tokens_;
  std::string delimiter_;
  std::vector<std::vector<Arc>> arcs_;
  std::vector<std::size_t> position_;
  std::vector<bool> is_delim_state_;
  StateId final_ = 0;
};

}  // namespace longseg

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
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longseg/automaton.hpp"
#include "longseg/core.hpp"

namespace longseg {

/// Scores the next output symbol given the emitted prefix. Scores are
/// log-domain and summed along a path.
template <typename S>
concept SymbolScorer = requires(const S& s, const SegAutomaton& a,
                                std::span<const Symbol> prefix, const Symbol& next) {
  { s.score(a, prefix, next) } -> std::convertible_to<double>;
  { s.locally_normalized() } -> std::convertible_to<bool>;
};

/// Adapts a callable `double(const SegAutomaton&, span<const Symbol>, const Symbol&)`.
template <typename Fn>
class FunctionScorer {
 public:
  FunctionScorer(Fn fn, bool normalized) : fn_(std::move(fn)), normalized_(normalized) {}
  double score(const SegAutomaton& a, std::span<const Symbol> prefix,
               const Symbol& next) const {
    return fn_(a, prefix, next);
  }
  bool locally_normalized() const { return normalized_; }

 private:
  Fn fn_;
  bool normalized_;
};

struct SearchStrategy {
  enum class Kind { kGreedy, kBeam, kExact };
  Kind kind = Kind::kBeam;
  std::size_t width = 4;

  static SearchStrategy greedy() { return {Kind::kGreedy, 1}; }
  static SearchStrategy beam(std::size_t k) {
    if (k < 1) throw Error("beam width must be >= 1");
    return {Kind::kBeam, k};
  }
  static SearchStrategy exact() { return {Kind::kExact, 1}; }

  /// "greedy", "exact", "beam" (width 4) or "beam=K".
  static SearchStrategy parse(const std::string& s) {
    if (s == "greedy") return greedy();
    if (s == "exact") return exact();
    if (s == "beam") return beam(4);
    if (s.rfind("beam=", 0) == 0) {
      std::size_t k = 0;
      try {
        k = std::stoul(s.substr(5));
      } catch (...) {
        throw Error("bad search strategy '" + s + "'");
      }
      return beam(k);
    }
    throw Error("unknown search strategy '" + s + "'");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kGreedy: return "greedy";
      case Kind::kExact: return "exact";
      case Kind::kBeam: return "beam=" + std::to_string(width);
    }
    return {};
  }
};

struct Hypothesis {
  StateId state = 0;
  std::vector<Symbol> emitted;
  double score = 0.0;
};

struct ScoredLabels {
  SegmentationLabels labels;
  double score = 0.0;
};

namespace detail {

// Expands `h` through arcs until it rests on a token state. Children are
// appended in arc order, so the no-delimiter continuation comes first.
template <SymbolScorer Scorer>
void expand_to_token_state(const SegAutomaton& a, const Scorer& scorer,
                           const Hypothesis& h, std::vector<Hypothesis>& out) {
  for (const auto& arc : a.arcs(h.state)) {
    Hypothesis child = h;
    child.score += scorer.score(a, h.emitted, arc.symbol);
    child.emitted.push_back(arc.symbol);
    child.state = arc.next;
    if (a.is_delimiter_state(child.state))
      expand_to_token_state(a, scorer, child, out);
    else
      out.push_back(std::move(child));
  }
}

template <SymbolScorer Scorer>
std::vector<Hypothesis> beam_search(const SegAutomaton& a, const Scorer& scorer,
                                    std::size_t width) {
  std::vector<Hypothesis> beam{Hypothesis{a.start(), {}, 0.0}};
  std::vector<Hypothesis> next;
  while (!a.is_final(beam.front().state)) {
    next.clear();
    for (const auto& h : beam) expand_to_token_state(a, scorer, h, next);
    std::stable_sort(next.begin(), next.end(),
                     [](const Hypothesis& x, const Hypothesis& y) {
                       return x.score > y.score;
                     });
    if (next.size() > width) next.resize(width);
    std::swap(beam, next);
  }
  return beam;
}

template <SymbolScorer Scorer>
class ExactSearch {
 public:
  ExactSearch(const SegAutomaton& a, const Scorer& s) : a_(a), scorer_(s) {}

  Hypothesis run(Hypothesis incumbent) {
    best_ = std::move(incumbent);
    Hypothesis root{a_.start(), {}, 0.0};
    dfs(root);
    return best_;
  }

 private:
  void dfs(Hypothesis& h) {
    if (a_.is_final(h.state)) {
      if (h.score > best_.score) best_ = h;
      return;
    }
    struct Child {
      Arc arc;
      double score;
    };
    std::vector<Child> kids;
    for (const auto& arc : a_.arcs(h.state)) {
      double step = scorer_.score(a_, h.emitted, arc.symbol);
      if (!(step <= 0.0))
        throw Error("exact search: scorer returned a positive or NaN step score");
      kids.push_back({arc, h.score + step});
    }
    std::stable_sort(kids.begin(), kids.end(),
                     [](const Child& x, const Child& y) { return x.score > y.score; });
    for (const auto& k : kids) {
      // Per-step scores are <= 0, so a prefix bounds all its completions.
      if (k.score <= best_.score) continue;
      const StateId saved = h.state;
      const double saved_score = h.score;
      h.emitted.push_back(k.arc.symbol);
      h.state = k.arc.next;
      h.score = k.score;
      dfs(h);
      h.emitted.pop_back();
      h.state = saved;
      h.score = saved_score;
    }
  }

  const SegAutomaton& a_;
  const Scorer& scorer_;
  Hypothesis best_;
};

}  // namespace detail

/// Searches the automaton language under `scorer`. Returns complete
/// hypotheses ranked by score: one for GREEDY and EXACT, up to `width` for
/// BEAM. Beam search is token-synchronous; equal scores keep the
/// no-delimiter continuation first.
template <SymbolScorer Scorer>
std::vector<ScoredLabels> constrained_search(const SegAutomaton& a,
                                             const Scorer& scorer,
                                             const SearchStrategy& strategy) {
  std::vector<Hypothesis> finals;
  switch (strategy.kind) {
    case SearchStrategy::Kind::kGreedy:
      finals = detail::beam_search(a, scorer, 1);
      break;
    case SearchStrategy::Kind::kBeam:
      if (strategy.width < 1) throw Error("beam width must be >= 1");
      finals = detail::beam_search(a, scorer, strategy.width);
      break;
    case SearchStrategy::Kind::kExact: {
      if (!scorer.locally_normalized())
        throw Error("exact search requires a locally normalized scorer");
      auto incumbent = detail::beam_search(a, scorer, 1).front();
      finals.push_back(detail::ExactSearch<Scorer>(a, scorer).run(std::move(incumbent)));
      break;
    }
  }
  std::vector<ScoredLabels> out;
  out.reserve(finals.size());
  for (const auto& h : finals) out.push_back({a.labels_for(h.emitted), h.score});
  return out;
}

/// Total path score of `labels` under `scorer`, summed in emission order.
template <SymbolScorer Scorer>
double path_score(const SegAutomaton& a, const Scorer& scorer,
                  const SegmentationLabels& labels) {
  if (labels.size() != a.window_size()) throw Error("path_score: length mismatch");
  std::vector<Symbol> emitted;
  StateId s = a.start();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.is_split(i)) {
      auto arcs = a.arcs(s);
      auto it = std::find_if(arcs.begin(), arcs.end(),
                             [](const Arc& x) { return x.symbol.is_delimiter(); });
      if (it != arcs.end()) {
        total += scorer.score(a, emitted, it->symbol);
        emitted.push_back(it->symbol);
        s = it->next;
      } else if (i != 0) {
        throw Error("path_score: labels not accepted by automaton");
      }
    }
    const auto& arc = a.arcs(s).front();
    total += scorer.score(a, emitted, arc.symbol);
    emitted.push_back(arc.symbol);
    s = arc.next;
  }
  return total;
}

}  // namespace longseg

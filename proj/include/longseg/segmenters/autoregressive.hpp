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

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longseg/align.hpp"
#include "longseg/automaton.hpp"
#include "longseg/search.hpp"
#include "longseg/segmenters/feature_model.hpp"
#include "longseg/segmenters/segmenter.hpp"

namespace longseg {

/// Drives automaton search with a feature model. A delimiter arc before
/// token i scores log p(SPLIT at i); the plain token arc scores
/// log p(CONTINUE at i) where a choice exists and 0 where it is forced
/// (after a delimiter, or at the implied boundary of position 0).
class FeatureScorer {
 public:
  FeatureScorer(const FeatureModel& model, std::span<const std::string> tokens,
                bool initial_choice = false)
      : model_(model), static_(model.static_features(tokens)), initial_choice_(initial_choice) {}

  double score(const SegAutomaton&, std::span<const Symbol> prefix, const Symbol& next) const {
    const std::size_t i = next.position;
    if (!next.is_delimiter()) {
      if (!prefix.empty() && prefix.back().is_delimiter()) return 0.0;
      if (i == 0 && !initial_choice_) return 0.0;
    }
    const auto decisions = decisions_before(prefix, i);
    auto ids = static_[i];
    model_.history_features(decisions, i, ids);
    const auto s = FeatureModel::scores_from_logit(model_.logit(ids));
    return next.is_delimiter() ? s.log_split : s.log_continue;
  }

  bool locally_normalized() const { return true; }

 private:
  static std::vector<Decision> decisions_before(std::span<const Symbol> prefix, std::size_t i) {
    std::vector<Decision> d;
    d.reserve(i);
    bool pending = false;
    for (const auto& sym : prefix) {
      if (sym.is_delimiter()) {
        pending = true;
        continue;
      }
      d.push_back(d.empty() || pending ? Decision::kSplit : Decision::kContinue);
      pending = false;
    }
    return d;
  }

  const FeatureModel& model_;
  std::vector<std::vector<FeatureId>> static_;
  bool initial_choice_;
};

enum class ConstraintMode { kFst, kLevenshtein };

inline ConstraintMode parse_constraint(const std::string& s) {
  if (s == "fst") return ConstraintMode::kFst;
  if (s == "levenshtein") return ConstraintMode::kLevenshtein;
  throw Error("unknown constraint mode '" + s + "' (expected fst or levenshtein)");
}

/// Window segmenter backed by a feature model and constrained search.
///
/// In Levenshtein mode the best hypothesis is rendered as delimited text
/// and recovered through strict decoding, falling back to boundary
/// projection; for this model both routes agree by construction.
class AutoregressiveSegmenter final : public WindowSegmenter {
 public:
  AutoregressiveSegmenter(std::shared_ptr<const FeatureModel> model, SearchStrategy strategy,
                          ConstraintMode constraint = ConstraintMode::kFst)
      : model_(std::move(model)), strategy_(strategy), constraint_(constraint) {
    if (!model_ || !model_->loaded()) throw Error("autoregressive segmenter: model not loaded");
  }

  SegmentationLabels segment(const WindowInput& w) const override {
    auto best = search(w, strategy_).front().labels;
    if (constraint_ == ConstraintMode::kFst) return best;
    const Transcript ref(std::vector<std::string>(w.tokens.begin(), w.tokens.end()));
    const auto text = render(encode_delimited(ref, best));
    auto decoded = decode_delimited(text, ref);
    if (decoded.ok()) return *decoded.labels;
    return project_boundaries(ref, parse_generated(text));
  }

  bool has_nbest() const override { return true; }

  NBestList nbest(const WindowInput& w, std::size_t k) const override {
    NBestList out{search(w, SearchStrategy::beam(k)), name()};
    return out;
  }

  const FeatureModel& model() const { return *model_; }
  std::string name() const override { return "autoregressive"; }

 private:
  std::vector<ScoredLabels> search(const WindowInput& w, const SearchStrategy& s) const {
    const auto automaton = SegAutomaton::build(w.tokens);
    const FeatureScorer scorer(*model_, w.tokens);
    return constrained_search(automaton, scorer, s);
  }

  std::shared_ptr<const FeatureModel> model_;
  SearchStrategy strategy_;
  ConstraintMode constraint_;
};

// ─── Reranking ───────────────────────────────────────────────────────────────

/// Assigns a total score to a complete labeling of a window.
class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual double total_score(const WindowInput& window, const SegmentationLabels& labels) const = 0;
};

class FeatureModelReranker final : public Reranker {
 public:
  explicit FeatureModelReranker(std::shared_ptr<const FeatureModel> model)
      : model_(std::move(model)) {
    if (!model_ || !model_->loaded()) throw Error("reranker: model not loaded");
  }
  double total_score(const WindowInput& w, const SegmentationLabels& labels) const override {
    return model_->sequence_log_prob(w.tokens, labels);
  }

 private:
  std::shared_ptr<const FeatureModel> model_;
};

struct RerankResult {
  std::size_t index = 0;  // rank in the original list
  SegmentationLabels labels;
  double score = 0.0;     // reranker score
};

/// Highest reranker score wins; ties keep the better original rank.
inline RerankResult rerank(const NBestList& nbest, const WindowInput& window,
                           const Reranker& reranker) {
  if (nbest.entries.empty()) throw Error("rerank: empty n-best list");
  RerankResult best{0, nbest.entries[0].labels,
                    reranker.total_score(window, nbest.entries[0].labels)};
  for (std::size_t i = 1; i < nbest.entries.size(); ++i) {
    const double s = reranker.total_score(window, nbest.entries[i].labels);
    if (s > best.score) best = {i, nbest.entries[i].labels, s};
  }
  return best;
}

/// Generates an n-best list with `base` and returns the reranker's pick.
class RerankingSegmenter final : public WindowSegmenter {
 public:
  RerankingSegmenter(std::shared_ptr<const WindowSegmenter> base,
                     std::shared_ptr<const Reranker> reranker, std::size_t k)
      : base_(std::move(base)), reranker_(std::move(reranker)), k_(k) {
    if (!base_ || !base_->has_nbest()) throw Error("reranking needs an n-best generator");
    if (k_ < 1) throw Error("n-best size must be >= 1");
  }

  SegmentationLabels segment(const WindowInput& w) const override {
    return rerank(base_->nbest(w, k_), w, *reranker_).labels;
  }
  std::string name() const override { return "rerank(" + base_->name() + ")"; }

 private:
  std::shared_ptr<const WindowSegmenter> base_;
  std::shared_ptr<const Reranker> reranker_;
  std::size_t k_;
};

}  // namespace longseg

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
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "longseg/core.hpp"
#include "longseg/parallel.hpp"
#include "longseg/search.hpp"
#include "longseg/segmenters/rule_punctuation.hpp"
#include "longseg/windowing.hpp"

namespace longseg {

/// What a window segmenter sees: the window tokens including context, where
/// the window sits globally, and which local span will be adopted.
struct WindowInput {
  std::string source_id;
  std::span<const std::string> tokens;
  std::size_t start = 0;  // global index of tokens[0]
  std::size_t adopt_begin = 0;  // local
  std::size_t adopt_end = 0;    // local, exclusive

  static WindowInput whole(const Transcript& t) {
    return {t.source_id(), t.tokens(), 0, 0, t.size()};
  }
  static WindowInput of(const Transcript& t, const Window& w) {
    return {t.source_id(), w.tokens(t), w.start, w.adopt_start - w.start,
            w.adopt_end - w.start};
  }
};

/// Ranked (labels, generator score) pairs; scores non-increasing, labelings
/// distinct.
struct NBestList {
  std::vector<ScoredLabels> entries;
  std::string generator;

  void validate() const {
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].score > entries[i - 1].score)
        throw Error("n-best list scores must be non-increasing");
      for (std::size_t j = 0; j < i; ++j)
        if (entries[i].labels == entries[j].labels)
          throw Error("n-best list contains duplicate labelings");
    }
  }
};

class WindowSegmenter {
 public:
  virtual ~WindowSegmenter() = default;

  /// Labels for every token of the window, position 0 SPLIT.
  virtual SegmentationLabels segment(const WindowInput& window) const = 0;

  virtual bool has_nbest() const { return false; }
  virtual NBestList nbest(const WindowInput&, std::size_t) const {
    throw Error(name() + " does not produce n-best lists");
  }

  virtual std::string name() const = 0;
};

/// Runs `segmenter` over overlapping windows and stitches the adopted spans.
/// Windows may be processed concurrently; the result does not depend on it.
inline SegmentationLabels segment_windowed(const Transcript& transcript,
                                           const WindowConfig& cfg,
                                           const WindowSegmenter& segmenter,
                                           std::size_t workers = 1) {
  const auto windows = plan_windows(transcript.size(), cfg);
  auto labels = parallel_map(windows.size(), workers, [&](std::size_t k) {
    auto out = segmenter.segment(WindowInput::of(transcript, windows[k]));
    if (out.size() != windows[k].size())
      throw Error(segmenter.name() + " returned " + std::to_string(out.size()) +
                  " labels for a window of " + std::to_string(windows[k].size()));
    return out;
  });
  return stitch(windows, labels);
}

// ─── FixedLength ─────────────────────────────────────────────────────────────

/// Disjoint segments of `length` tokens, anchored at global positions.
class FixedLengthSegmenter final : public WindowSegmenter {
 public:
  explicit FixedLengthSegmenter(std::size_t length) : length_(length) {
    if (length_ < 1) throw Error("fixed segment length must be >= 1");
  }

  SegmentationLabels segment(const WindowInput& w) const override {
    std::vector<std::size_t> splits;
    for (std::size_t i = 0; i < w.tokens.size(); ++i)
      if ((w.start + i) % length_ == 0) splits.push_back(i);
    return SegmentationLabels::from_splits(w.tokens.size(), splits);
  }

  std::string name() const override { return "fixed"; }

 private:
  std::size_t length_;
};

// ─── Rules over punctuated tokens ────────────────────────────────────────────

class RuleSegmenter final : public WindowSegmenter {
 public:
  explicit RuleSegmenter(RulePunctuation rules = {}) : rules_(std::move(rules)) {}

  SegmentationLabels segment(const WindowInput& w) const override {
    return rules_.segment_tokens(w.tokens);
  }
  std::string name() const override { return "rules"; }

 private:
  RulePunctuation rules_;
};

// ─── Replay of known global labels ───────────────────────────────────────────

/// Replays precomputed document labels (e.g. oracle labels) window by window.
class ReplaySegmenter final : public WindowSegmenter {
 public:
  explicit ReplaySegmenter(std::map<std::string, SegmentationLabels> docs)
      : docs_(std::move(docs)) {}

  SegmentationLabels segment(const WindowInput& w) const override {
    auto it = docs_.find(w.source_id);
    if (it == docs_.end()) throw Error("no labels to replay for '" + w.source_id + "'");
    if (w.start + w.tokens.size() > it->second.size())
      throw Error("replayed labels for '" + w.source_id + "' are shorter than the transcript");
    std::vector<Decision> d(it->second.decisions().begin() + static_cast<std::ptrdiff_t>(w.start),
                            it->second.decisions().begin() +
                                static_cast<std::ptrdiff_t>(w.start + w.tokens.size()));
    if (!d.empty()) d[0] = Decision::kSplit;
    return SegmentationLabels(std::move(d));
  }
  std::string name() const override { return "labels"; }

 private:
  std::map<std::string, SegmentationLabels> docs_;
};

}  // namespace longseg

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
#include <span>
#include <string>
#include <vector>

#include "longseg/core.hpp"

namespace longseg {

/// Window geometry. Consecutive windows are `stride() = size - left - right`
/// tokens apart; only the span between the contexts is adopted globally.
struct WindowConfig {
  std::size_t size = 40;
  std::size_t left = 5;
  std::size_t right = 5;

  std::size_t stride() const { return size - left - right; }

  void validate() const {
    if (size < 1) throw Error("window.size must be >= 1");
    if (left + right >= size)
      throw Error("window.left + window.right must be < window.size (got " +
                  std::to_string(left) + " + " + std::to_string(right) +
                  " >= " + std::to_string(size) + ")");
  }
};

struct Window {
  std::size_t start = 0;  // global index of the first token
  std::size_t end = 0;    // exclusive
  std::size_t adopt_start = 0;
  std::size_t adopt_end = 0;

  std::size_t size() const { return end - start; }
  std::size_t left_context() const { return adopt_start - start; }
  std::size_t right_context() const { return end - adopt_end; }

  std::span<const std::string> tokens(const Transcript& t) const {
    return std::span<const std::string>(t.tokens()).subspan(start, size());
  }

  friend bool operator==(const Window&, const Window&) = default;
};

/// The final window is truncated at n and adopts through n; no window is
/// emitted once a previous one already reaches the end of the transcript.
inline std::vector<Window> plan_windows(std::size_t n, const WindowConfig& cfg) {
  cfg.validate();
  std::vector<Window> out;
  for (std::size_t start = 0; start < n; start += cfg.stride()) {
    Window w;
    w.start = start;
    w.adopt_start = out.empty() ? start : start + cfg.left;
    const bool last = start + cfg.size >= n;
    w.end = last ? n : start + cfg.size;
    w.adopt_end = last ? n : start + cfg.size - cfg.right;
    out.push_back(w);
    if (last) break;
  }
  return out;
}

inline SegmentationLabels stitch(const std::vector<Window>& windows,
                                 const std::vector<SegmentationLabels>& window_labels) {
  if (windows.size() != window_labels.size())
    throw Error("stitch: " + std::to_string(window_labels.size()) +
                " label sequences for " + std::to_string(windows.size()) +
                " windows");
  std::size_t expect = 0;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    if (window_labels[k].size() != w.size())
      throw Error("stitch: window " + std::to_string(k) + " has " +
                  std::to_string(window_labels[k].size()) + " labels for " +
                  std::to_string(w.size()) + " tokens");
    if (w.adopt_start != expect || w.adopt_end <= w.adopt_start ||
        w.adopt_start < w.start || w.adopt_end > w.end)
      throw Error("stitch: adopted spans do not partition the transcript");
    expect = w.adopt_end;
  }
  const std::size_t n = expect;
  std::vector<Decision> global(n, Decision::kContinue);
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto& w = windows[k];
    for (std::size_t t = w.adopt_start; t < w.adopt_end; ++t)
      global[t] = window_labels[k][t - w.start];
  }
  if (n > 0) global[0] = Decision::kSplit;
  return SegmentationLabels(std::move(global));
}

}  // namespace longseg

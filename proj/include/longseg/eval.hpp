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
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "longseg/core.hpp"

namespace longseg {

inline constexpr int kReportSchemaVersion = 1;

struct BoundaryCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  BoundaryCounts& operator+=(const BoundaryCounts& o) {
    true_positives += o.true_positives;
    false_positives += o.false_positives;
    false_negatives += o.false_negatives;
    return *this;
  }

  double precision() const {
    const auto d = true_positives + false_positives;
    return d == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(d);
  }
  double recall() const {
    const auto d = true_positives + false_negatives;
    return d == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(d);
  }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

struct SegmentStats {
  std::size_t segment_count = 0;
  double mean_segment_len = 0.0;
  std::size_t max_segment_len = 0;
  std::vector<std::size_t> lengths;
};

inline SegmentStats segment_stats(const SegmentationLabels& labels) {
  SegmentStats s;
  for (const auto& seg : labels_to_segments(labels)) s.lengths.push_back(seg.length());
  s.segment_count = s.lengths.size();
  if (!s.lengths.empty()) {
    s.max_segment_len = *std::max_element(s.lengths.begin(), s.lengths.end());
    s.mean_segment_len = static_cast<double>(labels.size()) / static_cast<double>(s.segment_count);
  }
  return s;
}

/// Exact-position matching over boundaries at positions 1..n-1.
inline BoundaryCounts boundary_counts(const SegmentationLabels& predicted,
                                      const SegmentationLabels& reference) {
  if (predicted.size() != reference.size())
    throw Error("boundary_f1: predicted length " + std::to_string(predicted.size()) +
                " != reference length " + std::to_string(reference.size()));
  BoundaryCounts c;
  for (std::size_t t = 1; t < predicted.size(); ++t) {
    const bool p = predicted.is_split(t), r = reference.is_split(t);
    c.true_positives += p && r;
    c.false_positives += p && !r;
    c.false_negatives += !p && r;
  }
  return c;
}

struct DocumentReport {
  std::string source_id;
  BoundaryCounts counts;
  SegmentStats stats;  // of the predicted labels
};

struct EvalReport {
  BoundaryCounts counts;  // pooled over documents
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t segment_count = 0;
  double mean_segment_len = 0.0;
  std::size_t max_segment_len = 0;
  std::vector<DocumentReport> documents;
};

struct EvalPair {
  std::string source_id;
  SegmentationLabels predicted;
  SegmentationLabels reference;
};

/// Micro-averaged: ratios come from the pooled counts.
inline EvalReport evaluate_corpus(const std::vector<EvalPair>& docs) {
  EvalReport r;
  std::size_t tokens = 0;
  for (const auto& d : docs) {
    DocumentReport doc{d.source_id, boundary_counts(d.predicted, d.reference),
                       segment_stats(d.predicted)};
    r.counts += doc.counts;
    r.segment_count += doc.stats.segment_count;
    r.max_segment_len = std::max(r.max_segment_len, doc.stats.max_segment_len);
    tokens += d.predicted.size();
    r.documents.push_back(std::move(doc));
  }
  r.precision = r.counts.precision();
  r.recall = r.counts.recall();
  r.f1 = r.counts.f1();
  r.mean_segment_len =
      r.segment_count ? static_cast<double>(tokens) / static_cast<double>(r.segment_count) : 0.0;
  return r;
}

inline EvalReport boundary_f1(const SegmentationLabels& predicted,
                              const SegmentationLabels& reference) {
  return evaluate_corpus({{"", predicted, reference}});
}

inline nlohmann::json to_json(const EvalReport& r) {
  auto counts = [](const BoundaryCounts& c) {
    return nlohmann::json{{"true_positives", c.true_positives},
                          {"false_positives", c.false_positives},
                          {"false_negatives", c.false_negatives},
                          {"precision", c.precision()},
                          {"recall", c.recall()},
                          {"f1", c.f1()}};
  };
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : r.documents) {
    auto j = counts(d.counts);
    j["source_id"] = d.source_id;
    j["segment_count"] = d.stats.segment_count;
    j["mean_segment_len"] = d.stats.mean_segment_len;
    j["max_segment_len"] = d.stats.max_segment_len;
    docs.push_back(std::move(j));
  }
  auto j = counts(r.counts);
  j["schema_version"] = kReportSchemaVersion;
  j["segment_count"] = r.segment_count;
  j["mean_segment_len"] = r.mean_segment_len;
  j["max_segment_len"] = r.max_segment_len;
  j["documents"] = std::move(docs);
  return j;
}

inline std::string to_table(const EvalReport& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %6s %6s %6s %7s %7s %7s %6s %8s\n", "document", "tp",
                "fp", "fn", "P", "R", "F1", "segs", "mean_len");
  out += buf;
  auto row = [&](const std::string& id, const BoundaryCounts& c, std::size_t segs, double mean) {
    std::snprintf(buf, sizeof buf, "%-24s %6zu %6zu %6zu %7.4f %7.4f %7.4f %6zu %8.2f\n",
                  id.c_str(), c.true_positives, c.false_positives, c.false_negatives,
                  c.precision(), c.recall(), c.f1(), segs, mean);
    out += buf;
  };
  for (const auto& d : r.documents)
    row(d.source_id, d.counts, d.stats.segment_count, d.stats.mean_segment_len);
  row("TOTAL (micro)", r.counts, r.segment_count, r.mean_segment_len);
  return out;
}

}  // namespace longseg

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

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "longseg/core.hpp"

namespace longseg {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

/// One document per file; the source id is the file stem.
inline Transcript load_transcript(const fs::path& path, bool normalize = false) {
  return Transcript::from_text(read_file(path), path.stem().string(), normalize);
}

// Labels file: `source_id<TAB>p1,p2,...` with position 0 omitted.

struct LabelRecord {
  std::string source_id;
  std::vector<std::size_t> splits;  // ascending, excludes 0
  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

inline LabelRecord to_record(const std::string& source_id,
                             const SegmentationLabels& labels) {
  LabelRecord r{source_id, {}};
  for (auto p : labels.split_positions())
    if (p != 0) r.splits.push_back(p);
  return r;
}

inline std::string format_label_line(const LabelRecord& r) {
  std::string out = r.source_id;
  out.push_back('\t');
  for (std::size_t i = 0; i < r.splits.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(r.splits[i]);
  }
  return out;
}

inline LabelRecord parse_label_line(std::string_view line) {
  auto tab = line.find('\t');
  if (tab == std::string_view::npos)
    throw Error("labels line lacks a TAB separator: '" + std::string(line) + "'");
  LabelRecord r{std::string(line.substr(0, tab)), {}};
  auto rest = line.substr(tab + 1);
  while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' '))
    rest.remove_suffix(1);
  while (!rest.empty()) {
    auto comma = rest.find(',');
    auto field = rest.substr(0, comma);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw Error("bad split position '" + std::string(field) + "' for " +
                  r.source_id);
    if (v == 0) throw Error("position 0 must be omitted in labels files");
    if (!r.splits.empty() && v <= r.splits.back())
      throw Error("split positions must be strictly ascending for " + r.source_id);
    r.splits.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return r;
}

inline std::vector<LabelRecord> parse_labels(std::string_view text) {
  std::vector<LabelRecord> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    if (!line.empty() && line != "\r") out.push_back(parse_label_line(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

inline std::vector<LabelRecord> load_labels(const fs::path& path) {
  return parse_labels(read_file(path));
}

inline std::string format_labels(const std::vector<LabelRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += format_label_line(r);
    out.push_back('\n');
  }
  return out;
}

inline SegmentationLabels to_labels(const LabelRecord& r, std::size_t n) {
  return SegmentationLabels::from_splits(n, r.splits);
}

/// Keyed by source id; duplicate ids are an error.
inline std::map<std::string, LabelRecord> index_labels(
    const std::vector<LabelRecord>& records) {
  std::map<std::string, LabelRecord> out;
  for (const auto& r : records)
    if (!out.emplace(r.source_id, r).second)
      throw Error("duplicate source id in labels: " + r.source_id);
  return out;
}

}  // namespace longseg

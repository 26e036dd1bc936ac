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
#include <charconv>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "longseg/core.hpp"
#include "longseg/io.hpp"
#include "longseg/parallel.hpp"
#include "longseg/search.hpp"
#include "longseg/segmenters/autoregressive.hpp"
#include "longseg/segmenters/external_client.hpp"
#include "longseg/segmenters/feature_model.hpp"
#include "longseg/segmenters/rule_punctuation.hpp"
#include "longseg/segmenters/segmenter.hpp"
#include "longseg/windowing.hpp"

namespace longseg {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Everything `segment` needs. Set from defaults, then a JSON file (nested
/// objects or dotted keys), then command-line overrides.
struct PipelineConfig {
  WindowConfig window;
  std::string segmenter = "autoregressive";  // fixed | rules | autoregressive | external | labels
  std::size_t fixed_length = 20;
  std::string model;          // feature model file
  std::string labels;         // labels file replayed by the `labels` segmenter
  std::string abbreviations;  // abbreviation list for `rules`
  ConstraintMode constraint = ConstraintMode::kFst;
  SearchStrategy search = SearchStrategy::beam(4);
  std::string rerank_model;
  std::size_t rerank_k = 10;
  EndpointConfig endpoint;
  std::string fallback = "none";  // none | fixed | autoregressive
  bool normalize = true;
  std::string delimiter = std::string(kDelimiter);
  std::uint64_t seed = 0;
  std::size_t workers = default_workers();

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k{
        "window.size",      "window.left",        "window.right",       "segmenter.type",
        "segmenter.fixed_length", "segmenter.model", "segmenter.labels", "segmenter.abbreviations",
        "constraint",       "search",             "rerank.model",       "rerank.k",
        "endpoint.url",     "endpoint.timeout_ms", "endpoint.retries",  "endpoint.backoff_ms",
        "endpoint.max_in_flight", "endpoint.fallback", "normalize",     "delimiter",
        "seed",             "workers"};
    return k;
  }

  /// Sets one dotted key from its string or JSON form.
  void set(const std::string& key, const nlohmann::json& v) {
    try {
      auto as_size = [&] {
        if (v.is_string()) {
          const auto s = v.get<std::string>();
          std::size_t out = 0;
          auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
          if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            throw ConfigError("expected a non-negative integer, got '" + s + "'");
          return out;
        }
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
          throw ConfigError("expected a non-negative integer");
        return v.get<std::size_t>();
      };
      auto as_int = [&] {
        if (!v.is_string()) {
          if (!v.is_number_integer()) throw ConfigError("expected an integer");
          return v.get<int>();
        }
        const auto s = v.get<std::string>();
        int out = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
          throw ConfigError("expected an integer, got '" + s + "'");
        return out;
      };
      auto as_str = [&] { return v.is_string() ? v.get<std::string>() : v.dump(); };
      auto as_bool = [&] {
        if (v.is_boolean()) return v.get<bool>();
        const auto s = as_str();
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw ConfigError("expected a boolean");
      };
      if (key == "window.size") window.size = as_size();
      else if (key == "window.left") window.left = as_size();
      else if (key == "window.right") window.right = as_size();
      else if (key == "segmenter.type") segmenter = as_str();
      else if (key == "segmenter.fixed_length") fixed_length = as_size();
      else if (key == "segmenter.model") model = as_str();
      else if (key == "segmenter.labels") labels = as_str();
      else if (key == "segmenter.abbreviations") abbreviations = as_str();
      else if (key == "constraint") constraint = parse_constraint(as_str());
      else if (key == "search") search = SearchStrategy::parse(as_str());
      else if (key == "rerank.model") rerank_model = as_str();
      else if (key == "rerank.k") rerank_k = as_size();
      else if (key == "endpoint.url") endpoint.url = as_str();
      else if (key == "endpoint.timeout_ms") endpoint.timeout_ms = as_int();
      else if (key == "endpoint.retries") endpoint.retries = as_int();
      else if (key == "endpoint.backoff_ms") endpoint.backoff_ms = as_int();
      else if (key == "endpoint.max_in_flight") endpoint.max_in_flight = as_size();
      else if (key == "endpoint.fallback") fallback = as_str();
      else if (key == "normalize") normalize = as_bool();
      else if (key == "delimiter") delimiter = as_str();
      else if (key == "seed") seed = as_size();
      else if (key == "workers") workers = as_size();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    } catch (const std::exception& e) {
      throw ConfigError("bad value for " + key + ": " + e.what());
    }
  }

  void merge_json(const nlohmann::json& j, const std::string& prefix = {}) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it.value().is_object())
        merge_json(it.value(), key);
      else
        set(key, it.value());
    }
  }

  void merge_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    merge_json(j);
  }

  void validate() const {
    try {
      window.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    static const std::set<std::string> kSegmenters{"fixed", "rules", "autoregressive", "external",
                                                   "labels"};
    if (!kSegmenters.count(segmenter)) throw ConfigError("unknown segmenter '" + segmenter + "'");
    if (segmenter == "fixed" && fixed_length < 1)
      throw ConfigError("segmenter.fixed_length must be >= 1");
    if (segmenter == "external" && constraint != ConstraintMode::kLevenshtein)
      throw ConfigError("the external segmenter requires constraint = levenshtein");
    auto need = [](const std::string& path, const char* what) {
      if (path.empty()) throw ConfigError(std::string(what) + " is required");
      if (!std::filesystem::exists(path))
        throw ConfigError(std::string(what) + " does not exist: " + path);
    };
    if (segmenter == "autoregressive" || (segmenter == "external" && fallback == "autoregressive"))
      need(model, "segmenter.model");
    if (segmenter == "labels") need(labels, "segmenter.labels");
    if (!abbreviations.empty()) need(abbreviations, "segmenter.abbreviations");
    if (!rerank_model.empty()) {
      need(rerank_model, "rerank.model");
      if (segmenter != "autoregressive")
        throw ConfigError("reranking requires the autoregressive segmenter");
      if (rerank_k < 1) throw ConfigError("rerank.k must be >= 1");
    }
    if (endpoint.timeout_ms < 1) throw ConfigError("endpoint.timeout_ms must be >= 1");
    if (endpoint.retries < 0) throw ConfigError("endpoint.retries must be >= 0");
    if (endpoint.backoff_ms < 0) throw ConfigError("endpoint.backoff_ms must be >= 0");
    if (endpoint.max_in_flight < 1) throw ConfigError("endpoint.max_in_flight must be >= 1");
    if (fallback != "none" && fallback != "fixed" && fallback != "autoregressive")
      throw ConfigError("unknown endpoint.fallback '" + fallback + "'");
    if (delimiter.empty() || std::any_of(delimiter.begin(), delimiter.end(), is_space))
      throw ConfigError("delimiter must be a non-empty token without whitespace");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

/// Builds the configured window segmenter. `documents` supplies lengths for
/// the `labels` replay segmenter.
inline std::shared_ptr<const WindowSegmenter> build_segmenter(
    const PipelineConfig& cfg, const std::vector<Transcript>& documents = {}) {
  cfg.validate();
  auto load_model = [](const std::string& path) {
    return std::make_shared<const FeatureModel>(FeatureModel::load(path));
  };
  auto autoregressive = [&]() -> std::shared_ptr<const WindowSegmenter> {
    auto base = std::make_shared<const AutoregressiveSegmenter>(load_model(cfg.model), cfg.search,
                                                                cfg.constraint);
    if (cfg.rerank_model.empty()) return base;
    auto reranker = std::make_shared<const FeatureModelReranker>(load_model(cfg.rerank_model));
    return std::make_shared<const RerankingSegmenter>(base, reranker, cfg.rerank_k);
  };

  if (cfg.segmenter == "fixed") return std::make_shared<const FixedLengthSegmenter>(cfg.fixed_length);
  if (cfg.segmenter == "rules")
    return std::make_shared<const RuleSegmenter>(
        cfg.abbreviations.empty() ? RulePunctuation{} : RulePunctuation::from_file(cfg.abbreviations));
  if (cfg.segmenter == "autoregressive") return autoregressive();
  if (cfg.segmenter == "labels") {
    const auto records = index_labels(load_labels(cfg.labels));
    std::map<std::string, SegmentationLabels> docs;
    for (const auto& t : documents) {
      auto it = records.find(t.source_id());
      if (it == records.end()) throw ConfigError("no replay labels for '" + t.source_id() + "'");
      docs.emplace(t.source_id(), to_labels(it->second, t.size()));
    }
    return std::make_shared<const ReplaySegmenter>(std::move(docs));
  }
  // external
  std::shared_ptr<const WindowSegmenter> fallback;
  if (cfg.fallback == "fixed") fallback = std::make_shared<const FixedLengthSegmenter>(cfg.fixed_length);
  if (cfg.fallback == "autoregressive") fallback = autoregressive();
  auto endpoint = cfg.endpoint;
  endpoint.delimiter = cfg.delimiter;
  return std::make_shared<const ExternalClient>(endpoint, fallback);
}

/// Segments documents in order; windows of each document run on the pool.
inline std::vector<SegmentationLabels> segment_documents(const std::vector<Transcript>& docs,
                                                         const WindowConfig& window,
                                                         const WindowSegmenter& segmenter,
                                                         std::size_t workers) {
  std::vector<SegmentationLabels> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(segment_windowed(d, window, segmenter, workers));
  return out;
}

/// One line per segment.
inline std::string format_segments(const Transcript& t, const SegmentationLabels& labels) {
  std::string out;
  for (const auto& s : labels_to_segments(labels)) {
    out += join_tokens(t.tokens(), s.start, s.end);
    out.push_back('\n');
  }
  return out;
}

}  // namespace longseg

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

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "longseg/align.hpp"
#include "longseg/core.hpp"
#include "longseg/segmenters/autoregressive.hpp"
#include "longseg/segmenters/segmenter.hpp"

namespace longseg {

class EndpointError : public Error {
 public:
  using Error::Error;
};

struct EndpointConfig {
  std::string url = "http://127.0.0.1:8080/segment";
  int timeout_ms = 5000;
  int retries = 2;
  int backoff_ms = 100;  // doubled after every failed attempt
  std::size_t max_in_flight = 4;
  std::string delimiter = std::string(kDelimiter);
};

struct ParsedUrl {
  std::string base;  // scheme://host:port
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("endpoint url needs a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Well-formed labels from generated text: strict decoding when the text
/// reproduces the window, Levenshtein projection otherwise.
inline SegmentationLabels recover_labels(std::string_view generated,
                                         std::span<const std::string> window,
                                         std::string_view delimiter = kDelimiter) {
  const Transcript ref(std::vector<std::string>(window.begin(), window.end()));
  auto decoded = decode_delimited(generated, ref, delimiter);
  if (decoded.ok()) return std::move(*decoded.labels);
  return project_boundaries(ref, parse_generated(generated, delimiter));
}

/// Client for a remote text-to-text segmenter.
///
/// Request: {"text": window incl. context, "left_context": l, "right_context": r}
/// Response: {"text": generated}
class ExternalClient final : public WindowSegmenter {
 public:
  explicit ExternalClient(EndpointConfig cfg,
                          std::shared_ptr<const WindowSegmenter> fallback = nullptr)
      : cfg_(std::move(cfg)),
        url_(parse_url(cfg_.url)),
        fallback_(std::move(fallback)),
        slots_(std::make_shared<std::counting_semaphore<>>(
            static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, cfg_.max_in_flight)))) {
    if (cfg_.retries < 0) throw Error("endpoint retries must be >= 0");
  }

  /// Raw generated text, retried with exponential backoff. Throws
  /// EndpointError after the last attempt fails.
  std::string generate(const WindowInput& w) const {
    nlohmann::json req = {{"text", join_tokens({w.tokens.begin(), w.tokens.end()}, 0, w.tokens.size())},
                          {"left_context", w.adopt_begin},
                          {"right_context", w.tokens.size() - w.adopt_end}};
    const std::string body = req.dump();
    std::string last_error;
    int backoff = cfg_.backoff_ms;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
      auto text = try_once(body, last_error);
      if (text) return *text;
    }
    throw EndpointError("endpoint " + cfg_.url + " failed after " +
                        std::to_string(cfg_.retries + 1) + " attempts: " + last_error);
  }

  SegmentationLabels segment(const WindowInput& w) const override {
    std::string text;
    try {
      text = generate(w);
    } catch (const EndpointError&) {
      if (!fallback_) throw;
      return fallback_->segment(w);
    }
    return recover_labels(text, w.tokens, cfg_.delimiter);
  }

  std::string name() const override { return "external"; }
  const EndpointConfig& config() const { return cfg_; }

 private:
  std::optional<std::string> try_once(const std::string& body, std::string& error) const {
    slots_->acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{*slots_};

    httplib::Client client(url_.base);
    const auto sec = cfg_.timeout_ms / 1000;
    const auto usec = (cfg_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    auto res = client.Post(url_.path, body, "application/json");
    if (!res) {
      error = httplib::to_string(res.error());
      return std::nullopt;
    }
    if (res->status != 200) {
      error = "HTTP " + std::to_string(res->status);
      return std::nullopt;
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
        error = "response lacks a string \"text\" field";
        return std::nullopt;
      }
      return j["text"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      error = std::string("malformed JSON response: ") + e.what();
      return std::nullopt;
    }
  }

  EndpointConfig cfg_;
  ParsedUrl url_;
  std::shared_ptr<const WindowSegmenter> fallback_;
  std::shared_ptr<std::counting_semaphore<>> slots_;
};

/// Scores a labeling by agreement with the endpoint's segmentation of the
/// same window: minus the number of positions where they differ.
class EndpointAgreementReranker final : public Reranker {
 public:
  explicit EndpointAgreementReranker(std::shared_ptr<const ExternalClient> client)
      : client_(std::move(client)) {}

  double total_score(const WindowInput& w, const SegmentationLabels& labels) const override {
    const auto target = target_for(w);
    if (target.size() != labels.size()) throw Error("reranker: window length mismatch");
    double mismatches = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) mismatches += labels[i] != target[i];
    return -mismatches;
  }

 private:
  // One request per window, however many candidates are scored.
  SegmentationLabels target_for(const WindowInput& w) const {
    const std::string key = w.source_id + '\t' + std::to_string(w.start) + '\t' +
                            join_tokens({w.tokens.begin(), w.tokens.end()}, 0, w.tokens.size());
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto labels = client_->segment(w);
    std::lock_guard lock(mu_);
    return cache_.emplace(key, std::move(labels)).first->second;
  }

  std::shared_ptr<const ExternalClient> client_;
  mutable std::mutex mu_;
  mutable std::map<std::string, SegmentationLabels> cache_;
};

}  // namespace longseg

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

#include <atomic>
#include <memory>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "longseg/core.hpp"
#include "longseg/segmenters/feature_model.hpp"

namespace longseg {

struct MockConfig {
  // rule | echo | garbage | empty | spam | fail | badjson
  std::string mode = "rule";
  std::size_t every = 0;                // delimiter before every Nth window token
  std::vector<std::string> split_after; // delimiter after these tokens
  double corrupt_rate = 0.0;            // per-token substitute/drop/insert rate
  std::uint64_t seed = 0;
  int fail_first = 0;                   // answer the first N requests with HTTP 500
  std::string delimiter = std::string(kDelimiter);
};

/// Test double for a text-to-text segmentation service. Responses are a
/// pure function of the request text and the seed.
class MockEndpoint {
 public:
  explicit MockEndpoint(MockConfig cfg) : cfg_(std::move(cfg)) {
    static const std::set<std::string> kModes{"rule", "echo", "garbage", "empty",
                                              "spam", "fail", "badjson"};
    if (!kModes.count(cfg_.mode)) throw Error("unknown mock mode '" + cfg_.mode + "'");
    for (auto& w : cfg_.split_after) triggers_.insert(w);
  }

  struct Response {
    int status = 200;
    std::string body;
  };

  Response respond(const std::string& request_body) {
    if (served_++ < cfg_.fail_first) return {500, R"({"error":"warming up"})"};
    std::string text;
    try {
      auto j = nlohmann::json::parse(request_body);
      text = j.at("text").get<std::string>();
    } catch (const std::exception& e) {
      return {400, nlohmann::json{{"error", e.what()}}.dump()};
    }
    if (cfg_.mode == "fail") return {500, R"({"error":"configured to fail"})"};
    if (cfg_.mode == "badjson") return {200, "this is not json"};
    return {200, nlohmann::json{{"text", generate(text)}}.dump()};
  }

  std::string generate(const std::string& text) const {
    const auto tokens = split_whitespace(text);
    std::mt19937_64 rng(cfg_.seed ^ detail::fnv1a(text));
    const std::string& delim = cfg_.delimiter;
    if (cfg_.mode == "echo") return text;
    if (cfg_.mode == "empty") return "";
    if (cfg_.mode == "spam") {
      std::string out;
      for (const auto& t : tokens) out += delim + ' ' + delim + ' ' + t + ' ';
      return out + delim;
    }
    if (cfg_.mode == "garbage") {
      std::uniform_int_distribution<int> len(0, static_cast<int>(tokens.size()) + 5);
      std::uniform_int_distribution<int> word(0, 999);
      std::bernoulli_distribution delim_coin(0.3);
      std::string out;
      for (int i = len(rng); i > 0; --i) {
        if (delim_coin(rng)) out += delim + ' ';
        out += "g" + std::to_string(word(rng)) + ' ';
      }
      return out;
    }

    // rule
    std::vector<std::string> out;
    std::bernoulli_distribution corrupt(cfg_.corrupt_rate);
    std::uniform_int_distribution<int> op(0, 2);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const bool boundary =
          i > 0 && ((cfg_.every > 0 && i % cfg_.every == 0) || triggers_.count(tokens[i - 1]));
      if (boundary) out.push_back(delim);
      if (cfg_.corrupt_rate > 0 && corrupt(rng)) {
        switch (op(rng)) {
          case 0: out.push_back(tokens[i] + "x"); break;  // substitute
          case 1: break;                                    // drop
          default:
            out.push_back(tokens[i]);
            out.push_back("uh");  // insert
        }
        continue;
      }
      out.push_back(tokens[i]);
    }
    return join_tokens(out, 0, out.size());
  }

  const MockConfig& config() const { return cfg_; }

 private:
  MockConfig cfg_;
  std::set<std::string> triggers_;
  std::atomic<int> served_{0};
};

/// Serves a MockEndpoint over HTTP POST on a background thread.
class MockServer {
 public:
  explicit MockServer(MockConfig cfg, std::string path = "/segment")
      : endpoint_(std::make_shared<MockEndpoint>(std::move(cfg))), path_(std::move(path)) {
    server_.Post(path_, [ep = endpoint_](const httplib::Request& req, httplib::Response& res) {
      auto r = ep->respond(req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
  }

  ~MockServer() { stop(); }
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds (port 0 picks a free port) and starts serving; returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0) {
    port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (port_ < 0) throw Error("mock endpoint: cannot bind " + host + ":" + std::to_string(port));
    host_ = host;
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  /// Blocks serving on the calling thread.
  void serve(const std::string& host, int port) {
    if (!server_.listen(host, port))
      throw Error("mock endpoint: cannot listen on " + host + ":" + std::to_string(port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://" + host_ + ":" + std::to_string(port_) + path_; }

 private:
  std::shared_ptr<MockEndpoint> endpoint_;
  std::string path_;
  httplib::Server server_;
  std::thread thread_;
  std::string host_;
  int port_ = -1;
};

}  // namespace longseg

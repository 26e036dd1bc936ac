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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "longseg/core.hpp"
#include "longseg/parallel.hpp"
#include "longseg/windowing.hpp"

namespace longseg {

using FeatureId = std::uint32_t;

struct FeatureConfig {
  std::uint64_t hash_dims = std::uint64_t{1} << 20;
  std::vector<std::uint32_t> ngram_orders{2, 3, 4};
  std::uint32_t context_radius = 5;
  std::uint32_t history = 4;  // previous decisions used as features
  std::uint64_t salt = 0;

  void validate() const {
    if (hash_dims < 1) throw Error("hash_dims must be >= 1");
    if (hash_dims > (std::uint64_t{1} << 32)) throw Error("hash_dims must be <= 2^32");
    for (auto n : ngram_orders)
      if (n < 1) throw Error("n-gram orders must be >= 1");
  }
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct StepScores {
  double log_split = 0.0;
  double log_continue = 0.0;

  double log_prob(Decision d) const {
    return d == Decision::kSplit ? log_split : log_continue;
  }
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// log(sigmoid(z)), stable on both tails.
inline double log_sigmoid(double z) {
  return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

/// Log-linear model of p(SPLIT at t | decisions before t, window tokens).
///
/// Features are hashed: a bias, the word and its character n-grams at every
/// offset within `context_radius` of t (padding symbols outside the window),
/// and the pattern of the previous `history` decisions. The two-way softmax
/// reduces to a sigmoid of the summed weights.
class FeatureModel {
 public:
  FeatureModel() = default;
  explicit FeatureModel(FeatureConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    weights_.assign(cfg_.hash_dims, 0.0);
    loaded_ = true;
  }

  bool loaded() const { return loaded_; }
  const FeatureConfig& config() const { return cfg_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }

  /// History-independent features for every position of a window.
  std::vector<std::vector<FeatureId>> static_features(
      std::span<const std::string> tokens) const {
    require_loaded();
    const auto n = static_cast<std::ptrdiff_t>(tokens.size());
    std::vector<std::vector<std::uint64_t>> per_token(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) per_token[i] = token_hashes(tokens[i]);
    static const std::vector<std::uint64_t> kBos{detail::fnv1a("w|<s>")};
    static const std::vector<std::uint64_t> kEos{detail::fnv1a("w|</s>")};

    const auto radius = static_cast<std::ptrdiff_t>(cfg_.context_radius);
    std::vector<std::vector<FeatureId>> out(tokens.size());
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      auto& ids = out[static_cast<std::size_t>(t)];
      ids.push_back(to_id(detail::fnv1a("bias"), 0));
      for (std::ptrdiff_t o = -radius; o <= radius; ++o) {
        const std::ptrdiff_t p = t + o;
        const auto& hs = p < 0 ? kBos : (p >= n ? kEos : per_token[static_cast<std::size_t>(p)]);
        const auto offset_key = static_cast<std::uint64_t>(o + radius + 1);
        for (auto h : hs) ids.push_back(to_id(h, offset_key));
      }
    }
    return out;
  }

  void history_features(std::span<const Decision> prefix, std::size_t t,
                        std::vector<FeatureId>& out) const {
    if (cfg_.history == 0) return;
    std::string pattern = "hp|";
    for (std::uint32_t k = 1; k <= cfg_.history; ++k) {
      if (k > t)
        pattern.push_back('x');
      else
        pattern.push_back(prefix[t - k] == Decision::kSplit ? 'S' : 'C');
    }
    out.push_back(to_id(detail::fnv1a(pattern), 0));
    const char last = t == 0 ? 'x' : (prefix[t - 1] == Decision::kSplit ? 'S' : 'C');
    out.push_back(to_id(detail::fnv1a(std::string("h1|") + last), 0));
  }

  double logit(std::span<const FeatureId> ids) const {
    double z = 0.0;
    for (auto id : ids) z += weights_[id];
    return z;
  }

  static StepScores scores_from_logit(double z) {
    return {detail::log_sigmoid(z), detail::log_sigmoid(-z)};
  }

  /// Locally normalized log-distribution over the decision at position t.
  /// `prefix` holds at least the decisions before t.
  StepScores score_step(std::span<const std::string> tokens, std::size_t t,
                        std::span<const Decision> prefix) const {
    require_loaded();
    if (t >= tokens.size()) throw Error("score_step: position out of range");
    if (prefix.size() < t) throw Error("score_step: prefix shorter than position");
    auto stat = static_features(tokens);
    auto ids = std::move(stat[t]);
    history_features(prefix, t, ids);
    return scores_from_logit(logit(ids));
  }

  /// Sum over t >= 1 of log p(y_t | y_<t, x); position 0 is fixed.
  double sequence_log_prob(std::span<const std::string> tokens,
                           const SegmentationLabels& labels) const {
    if (labels.size() != tokens.size()) throw Error("sequence_log_prob: length mismatch");
    const auto stat = static_features(tokens);
    const auto& d = labels.decisions();
    double total = 0.0;
    std::vector<FeatureId> ids;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      ids = stat[t];
      history_features(d, t, ids);
      total += scores_from_logit(logit(ids)).log_prob(d[t]);
    }
    return total;
  }

  // ─── Model file ──────────────────────────────────────────────────────────
  // "LSFM" magic, u32 format version, u64 hash_dims, u32 order count, u32
  // orders, u32 radius, u32 history, u64 salt, u64 entry count, then
  // (u64 id, f64 weight) pairs for non-zero weights. All little-endian.

  static constexpr std::uint32_t kFormatVersion = 1;

  std::string serialize() const {
    require_loaded();
    std::string out = "LSFM";
    put_u32(out, kFormatVersion);
    put_u64(out, cfg_.hash_dims);
    put_u32(out, static_cast<std::uint32_t>(cfg_.ngram_orders.size()));
    for (auto n : cfg_.ngram_orders) put_u32(out, n);
    put_u32(out, cfg_.context_radius);
    put_u32(out, cfg_.history);
    put_u64(out, cfg_.salt);
    std::uint64_t nnz = 0;
    for (double w : weights_) nnz += (w != 0.0);
    put_u64(out, nnz);
    for (std::uint64_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] == 0.0) continue;
      put_u64(out, i);
      put_u64(out, std::bit_cast<std::uint64_t>(weights_[i]));
    }
    return out;
  }

  static FeatureModel deserialize(std::string_view bytes) {
    Reader r{bytes};
    if (r.take(4) != "LSFM") throw Error("model file: bad magic");
    const auto version = r.u32();
    if (version != kFormatVersion)
      throw Error("model file: unsupported format version " + std::to_string(version));
    FeatureConfig cfg;
    cfg.hash_dims = r.u64();
    const auto orders = r.u32();
    if (orders > 64) throw Error("model file: implausible n-gram order count");
    cfg.ngram_orders.clear();
    for (std::uint32_t i = 0; i < orders; ++i) cfg.ngram_orders.push_back(r.u32());
    cfg.context_radius = r.u32();
    cfg.history = r.u32();
    cfg.salt = r.u64();
    FeatureModel m(cfg);
    const auto nnz = r.u64();
    for (std::uint64_t k = 0; k < nnz; ++k) {
      const auto id = r.u64();
      const double w = std::bit_cast<double>(r.u64());
      if (id >= cfg.hash_dims) throw Error("model file: feature id out of range");
      m.weights_[id] = w;
    }
    if (!r.rest.empty()) throw Error("model file: trailing bytes");
    return m;
  }

  void save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model " + path.string());
    const auto bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  static FeatureModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read model " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    return deserialize(bytes);
  }

 private:
  void require_loaded() const {
    if (!loaded_) throw Error("feature model not loaded");
  }

  FeatureId to_id(std::uint64_t base, std::uint64_t offset_key) const {
    const std::uint64_t h = detail::mix64(base ^ detail::mix64(offset_key * 0x9e3779b97f4a7c15ULL ^ cfg_.salt));
    return static_cast<FeatureId>(h % cfg_.hash_dims);
  }

  std::vector<std::uint64_t> token_hashes(const std::string& tok) const {
    std::vector<std::uint64_t> out;
    out.push_back(detail::fnv1a(tok, detail::fnv1a("w|")));
    const std::string padded = "^" + tok + "$";
    for (auto order : cfg_.ngram_orders) {
      if (padded.size() < order) continue;
      const std::uint64_t prefix = detail::fnv1a("c" + std::to_string(order) + "|");
      for (std::size_t i = 0; i + order <= padded.size(); ++i)
        out.push_back(detail::fnv1a(std::string_view(padded).substr(i, order), prefix));
    }
    return out;
  }

  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  struct Reader {
    std::string_view rest;
    std::string_view take(std::size_t n) {
      if (rest.size() < n) throw Error("model file: truncated");
      auto s = rest.substr(0, n);
      rest.remove_prefix(n);
      return s;
    }
    std::uint64_t le(std::size_t n) {
      auto s = take(n);
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < n; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i])) << (8 * i);
      return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
  };

  FeatureConfig cfg_;
  std::vector<double> weights_;
  bool loaded_ = false;
};

// ─── Training ────────────────────────────────────────────────────────────────

struct TrainingExample {
  std::vector<std::string> tokens;
  SegmentationLabels labels;
};

/// Cuts each labeled transcript into windows, as at inference time.
inline std::vector<TrainingExample> make_training_windows(
    const std::vector<std::pair<Transcript, SegmentationLabels>>& corpus,
    const WindowConfig& window) {
  std::vector<TrainingExample> out;
  for (const auto& [transcript, labels] : corpus) {
    if (labels.size() != transcript.size())
      throw Error("training corpus: labels length mismatch for '" +
                  transcript.source_id() + "'");
    for (const auto& w : plan_windows(transcript.size(), window)) {
      TrainingExample ex;
      ex.tokens.assign(transcript.tokens().begin() + static_cast<std::ptrdiff_t>(w.start),
                       transcript.tokens().begin() + static_cast<std::ptrdiff_t>(w.end));
      std::vector<Decision> d(labels.decisions().begin() + static_cast<std::ptrdiff_t>(w.start),
                              labels.decisions().begin() + static_cast<std::ptrdiff_t>(w.end));
      d[0] = Decision::kSplit;
      ex.labels = SegmentationLabels(std::move(d));
      out.push_back(std::move(ex));
    }
  }
  return out;
}

using SparseGradient = std::vector<std::pair<FeatureId, double>>;

/// Summed negative log-likelihood of one example (positions t >= 1, gold
/// history) and its gradient entries, one per feature occurrence.
inline double example_loss_gradient(const FeatureModel& model, const TrainingExample& ex,
                                    SparseGradient* grad) {
  const auto stat = model.static_features(ex.tokens);
  const auto& d = ex.labels.decisions();
  double loss = 0.0;
  std::vector<FeatureId> ids;
  for (std::size_t t = 1; t < ex.tokens.size(); ++t) {
    ids = stat[t];
    model.history_features(d, t, ids);
    const double z = model.logit(ids);
    const bool split = d[t] == Decision::kSplit;
    loss -= split ? detail::log_sigmoid(z) : detail::log_sigmoid(-z);
    if (grad) {
      const double g = detail::sigmoid(z) - (split ? 1.0 : 0.0);
      for (auto id : ids) grad->emplace_back(id, g);
    }
  }
  return loss;
}

inline std::size_t scored_positions(const std::vector<TrainingExample>& data) {
  std::size_t n = 0;
  for (const auto& ex : data) n += ex.tokens.empty() ? 0 : ex.tokens.size() - 1;
  return n;
}

/// Mean per-position NLL over `data` and its dense gradient.
inline std::pair<double, std::vector<double>> loss_and_gradient(
    const FeatureModel& model, const std::vector<TrainingExample>& data) {
  std::vector<double> grad(model.config().hash_dims, 0.0);
  double loss = 0.0;
  SparseGradient sparse;
  for (const auto& ex : data) {
    sparse.clear();
    loss += example_loss_gradient(model, ex, &sparse);
    for (auto [id, g] : sparse) grad[id] += g;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, scored_positions(data)));
  for (auto& g : grad) g /= n;
  return {loss / n, std::move(grad)};
}

struct TrainParams {
  std::size_t epochs = 5;
  double step_size = 0.1;  // decays as step_size / sqrt(epoch)
  std::uint64_t seed = 0;
  std::size_t batch_size = 1;
  std::size_t workers = 1;  // gradient threads in mini-batch mode
  WindowConfig window{};
  FeatureConfig features{};  // ignored when warm-starting
};

struct TrainResult {
  FeatureModel model;
  std::vector<double> epoch_losses;  // mean per-position NLL seen during each epoch
};

/// Stochastic gradient descent on the mean per-position NLL with gold
/// history. Window order is shuffled per epoch from `seed`; mini-batches sum
/// per-example gradients in example order, so results do not depend on the
/// number of workers.
inline TrainResult train_feature_model(
    const std::vector<std::pair<Transcript, SegmentationLabels>>& corpus,
    const TrainParams& params, const FeatureModel* warm_start = nullptr,
    const std::function<void(std::size_t, double)>& on_epoch = {}) {
  if (corpus.empty()) throw Error("training corpus is empty");
  if (params.batch_size < 1) throw Error("batch size must be >= 1");
  FeatureModel model;
  if (warm_start) {
    model = *warm_start;
  } else {
    model = FeatureModel(params.features);
  }
  const auto data = make_training_windows(corpus, params.window);
  if (scored_positions(data) == 0) throw Error("training corpus has no scorable positions");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  auto weights = model.mutable_weights();

  TrainResult result;
  for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = params.step_size / std::sqrt(static_cast<double>(epoch));
    double epoch_loss = 0.0;
    std::size_t positions = 0;
    for (std::size_t b = 0; b < order.size(); b += params.batch_size) {
      const std::size_t e = std::min(order.size(), b + params.batch_size);
      auto grads = parallel_map(e - b, params.workers, [&](std::size_t k) {
        std::pair<double, SparseGradient> out;
        out.first = example_loss_gradient(model, data[order[b + k]], &out.second);
        return out;
      });
      std::size_t batch_positions = 0;
      for (std::size_t k = b; k < e; ++k) batch_positions += data[order[k]].tokens.size() - 1;
      if (batch_positions == 0) continue;
      const double scale = lr / static_cast<double>(e - b);
      for (const auto& [loss, g] : grads) {
        if (!std::isfinite(loss))
          throw Error("training diverged: non-finite loss in epoch " + std::to_string(epoch) +
                      " (step size " + std::to_string(lr) + ")");
        epoch_loss += loss;
        for (auto [id, v] : g) weights[id] -= scale * v;
      }
      positions += batch_positions;
    }
    const double mean = epoch_loss / static_cast<double>(std::max<std::size_t>(1, positions));
    if (!std::isfinite(mean)) throw Error("training diverged: non-finite epoch loss");
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.model = std::move(model);
  return result;
}

}  // namespace longseg

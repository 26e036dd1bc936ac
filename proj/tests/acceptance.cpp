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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "longseg/longseg.hpp"
#include "support/oracles.hpp"

using namespace longseg;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool well_formed(const SegmentationLabels& l, std::span<const std::string> window) {
  if (l.size() != window.size()) return false;
  if (!l.empty() && !l.is_split(0)) return false;
  // Must be a string of the automaton language: render then strict decode.
  const Transcript t(std::vector<std::string>(window.begin(), window.end()));
  auto back = decode_delimited(render(encode_delimited(t, l)), t);
  return back.ok() && *back.labels == l;
}

// Random unnormalized (or non-positive) per-step scores keyed by the prefix.
auto random_scorer(std::uint64_t seed, bool normalized) {
  return FunctionScorer(
      [seed, normalized](const SegAutomaton&, std::span<const Symbol> prefix, const Symbol& next) {
        std::uint64_t h = seed;
        for (const auto& s : prefix) h = detail::mix64(h ^ (s.position * 2 + s.is_delimiter()));
        h = detail::mix64(h ^ (next.position * 2 + next.is_delimiter() + 101));
        const double u = static_cast<double>(h >> 11) / static_cast<double>(1ULL << 53);
        return normalized ? -6.0 * u : 12.0 * u - 6.0;
      },
      normalized);
}

std::string random_text(std::mt19937_64& rng, std::span<const std::string> window) {
  // Corrupted copy of the window with random delimiters, or pure noise.
  const std::string D(kDelimiter);
  std::string out;
  if (rng() % 4 == 0) {
    for (std::size_t k = rng() % 60; k > 0; --k)
      out += (rng() % 3 == 0 ? D : "n" + std::to_string(rng() % 20)) + (rng() % 5 ? " " : "");
    return out;
  }
  const double rate = static_cast<double>(rng() % 40) / 100.0;
  std::bernoulli_distribution hit(rate), delim(0.25);
  for (const auto& t : window) {
    if (delim(rng)) out += D + (rng() % 3 ? " " : "");
    if (delim(rng) && delim(rng)) out += D + " ";
    if (hit(rng)) {
      switch (rng() % 3) {
        case 0: out += t + "q "; break;
        case 1: break;
        default: out += t + " " + (rng() % 2 ? D : std::string("um")) + " ";
      }
      continue;
    }
    out += t + " ";
  }
  if (rng() % 3 == 0) out += D;
  return out;
}

// ─── 1 ───────────────────────────────────────────────────────────────────────
Outcome wellformedness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::size_t cases = 0, ok = 0;
  auto check = [&](const SegmentationLabels& l, std::span<const std::string> w) {
    ++cases;
    ok += well_formed(l, w);
  };
  // Constrained search under arbitrary scorers.
  for (int i = 0; i < 4000; ++i) {
    const auto toks = oracle::random_tokens(rng, rng() % 41, 15);
    const auto a = SegAutomaton::build(toks);
    const bool normalized = i % 2 == 0;
    const auto sc = random_scorer(rng(), normalized);
    SearchStrategy s = i % 3 == 0 ? SearchStrategy::greedy() : SearchStrategy::beam(1 + rng() % 16);
    if (normalized && toks.size() <= 14 && i % 4 == 0) s = SearchStrategy::exact();
    for (const auto& h : constrained_search(a, sc, s)) check(h.labels, toks);
  }
  // Feature-model segmenters in both constraint modes.
  for (int i = 0; i < 1000; ++i) {
    auto m = std::make_shared<const FeatureModel>(oracle::random_model(rng, 2.0));
    const auto toks = oracle::random_tokens(rng, rng() % 41, 15);
    const Transcript t(toks, "d");
    AutoregressiveSegmenter seg(m, SearchStrategy::beam(1 + rng() % 4),
                                i % 2 ? ConstraintMode::kFst : ConstraintMode::kLevenshtein);
    check(seg.segment(WindowInput::whole(t)), toks);
  }
  // Levenshtein recovery of random and corrupted generator strings.
  for (int i = 0; i < 5000; ++i) {
    const auto toks = oracle::random_tokens(rng, rng() % 41, 15);
    check(recover_labels(random_text(rng, toks), toks), toks);
  }
  const double secs = seconds_since(t0);
  return {cases >= 10000 && ok == cases && secs < 60.0,
          fmt("%zu/%zu labelings valid (need >= 10000, 100%%), %.1fs (limit 60s)", ok, cases, secs)};
}

// ─── 2 ───────────────────────────────────────────────────────────────────────
Outcome constraint_equivalence() {
  std::mt19937_64 rng(202);
  std::size_t cases = 0, same = 0;
  for (int i = 0; i < 1500; ++i) {
    const auto toks = oracle::random_tokens(rng, 1 + rng() % 60, 25);
    const Transcript t(toks);
    const auto y = oracle::random_labels(rng, toks.size(), static_cast<double>(rng() % 60) / 100.0);
    // FST route: follow the automaton path that emits these decisions.
    const auto a = SegAutomaton::build(toks);
    std::vector<Symbol> path;
    StateId s = a.start();
    for (std::size_t k = 0; k < toks.size(); ++k) {
      auto arcs = a.arcs(s);
      const Arc* arc = &arcs[0];
      if (y.is_split(k) && arcs.size() > 1) {
        path.push_back(arcs[1].symbol);
        s = arcs[1].next;
        arc = &a.arcs(s)[0];
      }
      path.push_back(arc->symbol);
      s = arc->next;
    }
    const auto fst = a.labels_for(path);
    // Levenshtein route: render the same decisions, then project.
    const auto lev = project_boundaries(t, parse_generated(render(encode_delimited(t, y))));
    ++cases;
    same += fst == lev && fst == y;
  }
  // And end to end through the segmenter on random models.
  for (int i = 0; i < 300; ++i) {
    auto m = std::make_shared<const FeatureModel>(oracle::random_model(rng, 2.0));
    const Transcript t(oracle::random_tokens(rng, 1 + rng() % 40, 25), "d");
    const auto w = WindowInput::whole(t);
    const auto search = SearchStrategy::beam(1 + rng() % 5);
    ++cases;
    same += AutoregressiveSegmenter(m, search, ConstraintMode::kFst).segment(w) ==
            AutoregressiveSegmenter(m, search, ConstraintMode::kLevenshtein).segment(w);
  }
  return {cases >= 1000 && same == cases, fmt("%zu/%zu identical (need >= 1000, all)", same, cases)};
}

// ─── 3 ───────────────────────────────────────────────────────────────────────
Outcome exact_search() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(303);
  const int trials = 600;
  int exact_ok = 0, beam_same = 0, beam_bad = 0;
  for (int i = 0; i < trials; ++i) {
    const double sigma = 0.5 + static_cast<double>(rng() % 30) / 10.0;
    auto m = oracle::random_model(rng, sigma, 1 + rng() % 4, 1 + rng() % 3);
    const auto toks = oracle::random_tokens(rng, 1 + rng() % 12, 8);
    const auto a = SegAutomaton::build(toks);
    const FeatureScorer sc(m, toks);
    const auto ex = constrained_search(a, sc, SearchStrategy::exact()).front();
    const auto bf = oracle::brute_force_argmax(m, toks);
    exact_ok += ex.labels == bf.labels && std::abs(ex.score - bf.score) < 1e-9;
    const auto bm = constrained_search(a, sc, SearchStrategy::beam(100)).front();
    if (bm.labels == ex.labels) {
      ++beam_same;
    } else if (!(oracle::likelihood(m, toks, bm.labels) < bf.score)) {
      ++beam_bad;  // a differing beam answer must score strictly lower
    }
  }
  const double secs = seconds_since(t0);
  const double beam_rate = static_cast<double>(beam_same) / trials;
  return {exact_ok == trials && beam_rate >= 0.99 && beam_bad == 0 && secs < 120.0,
          fmt("EXACT = brute force %d/%d; beam-100 = EXACT %.1f%% (need >= 99%%), "
              "%d mismatches not lower; %.1fs (limit 120s)",
              exact_ok, trials, 100.0 * beam_rate, beam_bad, secs)};
}

// ─── 4 ───────────────────────────────────────────────────────────────────────
Outcome rerank_monotonicity() {
  std::mt19937_64 rng(404);
  std::vector<std::pair<Transcript, SegmentationLabels>> corpus;
  for (int d = 0; d < 50; ++d)
    corpus.push_back(oracle::stop_rule_document(rng, 80 + rng() % 200, "doc" + std::to_string(d)));
  // Generator: a barely trained model, so its n-best lists disagree.
  // Reranker: a model trained properly on other data.
  TrainParams p;
  p.epochs = 1;
  p.step_size = 0.003;
  p.features.hash_dims = 1 << 16;
  p.features.salt = 1;
  std::vector<std::pair<Transcript, SegmentationLabels>> gen_train(corpus.begin(), corpus.begin() + 2);
  auto generator = std::make_shared<const FeatureModel>(train_feature_model(gen_train, p).model);
  std::vector<std::pair<Transcript, SegmentationLabels>> rr_train;
  for (int d = 0; d < 20; ++d) rr_train.push_back(oracle::stop_rule_document(rng, 300, "r" + std::to_string(d)));
  p.epochs = 3;
  p.step_size = 0.1;
  p.features.salt = 2;
  auto rr_model = std::make_shared<const FeatureModel>(train_feature_model(rr_train, p).model);
  const FeatureModelReranker reranker(rr_model);
  const AutoregressiveSegmenter seg(generator, SearchStrategy::beam(100));

  const std::size_t ks[] = {10, 50, 100};
  std::size_t windows = 0, violations = 0;
  double sums[3] = {0, 0, 0};
  std::vector<SegmentationLabels> picks[3];
  std::vector<std::vector<SegmentationLabels>> per_doc[3];
  for (const auto& [t, y] : corpus) {
    const auto plan = plan_windows(t.size(), WindowConfig{});
    std::vector<SegmentationLabels> chosen[3];
    for (const auto& w : plan) {
      const auto in = WindowInput::of(t, w);
      const auto full = seg.nbest(in, 100);  // ranked; prefixes are the k-best lists
      double prev = -INFINITY;
      for (int k = 0; k < 3; ++k) {
        NBestList top{{full.entries.begin(),
                       full.entries.begin() + static_cast<std::ptrdiff_t>(std::min(ks[k], full.entries.size()))},
                      full.generator};
        const auto r = rerank(top, in, reranker);
        sums[k] += r.score;
        violations += r.score < prev;
        prev = r.score;
        chosen[k].push_back(r.labels);
      }
      ++windows;
    }
    for (int k = 0; k < 3; ++k) per_doc[k].push_back(std::move(chosen[k]));
  }
  // Corpus F1 of the reranked output, for information.
  double f1[3];
  for (int k = 0; k < 3; ++k) {
    std::vector<EvalPair> pairs;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      const auto& [t, y] = corpus[d];
      pairs.push_back({t.source_id(), stitch(plan_windows(t.size(), WindowConfig{}), per_doc[k][d]), y});
    }
    f1[k] = evaluate_corpus(pairs).f1;
  }
  return {violations == 0 && windows > 0,
          fmt("%zu windows, %zu violations; mean selected score k=10/50/100: %.3f/%.3f/%.3f; "
              "F1 %.3f/%.3f/%.3f",
              windows, violations, sums[0] / windows, sums[1] / windows, sums[2] / windows, f1[0],
              f1[1], f1[2])};
}

// ─── 5 ───────────────────────────────────────────────────────────────────────
Outcome oracle_identity() {
  std::mt19937_64 rng(505);
  const RulePunctuation rules;
  std::vector<EvalPair> clean, noisy;
  for (int d = 0; d < 14; ++d) {
    const auto doc = oracle::punctuated_document(rng, 20 + rng() % 40);
    const std::string id = "doc" + std::to_string(d);
    const auto asr = Transcript::from_text(doc.text, id, true);
    clean.push_back({id, project_oracle(doc.text, asr, rules), oracle::labels_from_sentences(doc.sentence_of)});
    auto [toks, sent] = oracle::corrupt_words(rng, doc.tokens, doc.sentence_of, 0.10);
    const Transcript noisy_asr(std::move(toks), id);
    noisy.push_back({id, project_oracle(doc.text, noisy_asr, rules), oracle::labels_from_sentences(sent)});
  }
  const double f_clean = evaluate_corpus(clean).f1, f_noisy = evaluate_corpus(noisy).f1;
  return {f_clean == 1.0 && f_noisy >= 0.9,
          fmt("14 documents: F1 %.4f (need exactly 1), with 10%% word errors F1 %.4f (need >= 0.9)",
              f_clean, f_noisy)};
}

// ─── 6 ───────────────────────────────────────────────────────────────────────
Outcome windowing_equivalence() {
  std::mt19937_64 rng(606);
  const WindowConfig cfg{40, 5, 5};
  std::size_t docs = 0, same = 0;
  for (int d = 0; d < 12; ++d) {
    const std::size_t n = 861 + rng() % (1234 - 861 + 1);
    const Transcript t(oracle::random_tokens(rng, n, 40), "doc");
    // Feature model with context radius 5 and no decision history.
    auto m = std::make_shared<const FeatureModel>(oracle::random_model(rng, 1.0, 0, 5, 4099));
    const AutoregressiveSegmenter ar(m, SearchStrategy::greedy());
    ++docs;
    same += segment_windowed(t, cfg, ar) == ar.segment(WindowInput::whole(t));
    // Punctuation rule (radius 1) over punctuated tokens.
    auto toks = t.tokens();
    for (auto& tok : toks)
      if (rng() % 9 == 0) tok += ".";
    const Transcript punct(toks, "p");
    const RuleSegmenter rules;
    ++docs;
    same += segment_windowed(punct, cfg, rules) == rules.segment(WindowInput::whole(punct));
  }
  return {same == docs,
          fmt("%zu/%zu transcripts (861-1234 tokens) identical windowed vs single pass", same, docs)};
}

// ─── 7 ───────────────────────────────────────────────────────────────────────
Outcome edit_distance() {
  std::mt19937_64 rng(707);
  int same = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t vocab = 2 + rng() % 8;
    const auto a = oracle::random_tokens(rng, rng() % 51, vocab);
    const auto b = oracle::random_tokens(rng, rng() % 51, vocab);
    same += levenshtein_align(a, b).total_cost == oracle::edit_distance(a, b);
  }
  return {same == 10000, fmt("%d/10000 pairs match the independent DP", same)};
}

// ─── 8 ───────────────────────────────────────────────────────────────────────
Outcome gradient_check() {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  int failed = 0;
  for (int inst = 0; inst < 100; ++inst) {
    auto m = oracle::random_model(rng, 0.7, rng() % 4, rng() % 3, 37 + rng() % 40);
    std::vector<TrainingExample> data;
    for (int k = 1 + rng() % 3; k > 0; --k) {
      const std::size_t n = 2 + rng() % 10;
      data.push_back({oracle::random_tokens(rng, n, 6), oracle::random_labels(rng, n, 0.4)});
    }
    const auto grad = loss_and_gradient(m, data).second;
    const double h = 1e-6;
    bool ok = true;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      auto w = m.mutable_weights();
      const double orig = w[i];
      w[i] = orig + h;
      const double up = loss_and_gradient(m, data).first;
      w[i] = orig - h;
      const double down = loss_and_gradient(m, data).first;
      w[i] = orig;
      const double num = (up - down) / (2 * h);
      const double scale = std::max(std::abs(num), std::abs(grad[i]));
      if (scale < 1e-6) {
        ok = ok && std::abs(num - grad[i]) < 1e-9;  // both effectively zero
        continue;
      }
      const double rel = std::abs(num - grad[i]) / scale;
      worst = std::max(worst, rel);
      ok = ok && rel <= 1e-4;
    }
    failed += !ok;
  }
  return {failed == 0,
          fmt("100 instances, %d failing; worst relative error %.2e (limit 1e-4)", failed, worst)};
}

// ─── 9 ───────────────────────────────────────────────────────────────────────
Outcome learnability() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(909);
  std::vector<std::pair<Transcript, SegmentationLabels>> train, test;
  for (int d = 0; d < 30; ++d) train.push_back(oracle::stop_rule_document(rng, 400, "tr" + std::to_string(d)));
  for (int d = 0; d < 10; ++d) test.push_back(oracle::stop_rule_document(rng, 400, "te" + std::to_string(d)));
  TrainParams p;
  p.epochs = 3;
  p.seed = 9;
  auto model = std::make_shared<const FeatureModel>(train_feature_model(train, p).model);
  const AutoregressiveSegmenter seg(model, SearchStrategy::beam(4));
  std::vector<EvalPair> pairs;
  for (const auto& [t, y] : test) pairs.push_back({t.source_id(), segment_windowed(t, p.window, seg), y});
  const double f1 = evaluate_corpus(pairs).f1;
  const double secs = seconds_since(t0);
  return {f1 >= 0.95 && secs < 300.0,
          fmt("held-out boundary F1 %.4f (need >= 0.95), %.1fs (limit 300s)", f1, secs)};
}

// ─── 10 ──────────────────────────────────────────────────────────────────────
Outcome automaton_language() {
  std::string bad;
  for (std::size_t w = 1; w <= 10; ++w) {
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < w; ++i) toks.push_back("x" + std::to_string(i % 3));
    const auto count = oracle::enumerate_language(SegAutomaton::build(toks)).size();
    if (count != std::size_t{1} << (w - 1)) bad += fmt(" count(w=%zu)=%zu", w, count);
  }
  for (std::size_t w = 1; w <= 6; ++w) {
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < w; ++i) toks.push_back("y" + std::to_string(i));
    const std::set<std::string> sigma(toks.begin(), toks.end());
    for (bool initial : {false, true}) {
      const auto composed = oracle::trim(oracle::project_output(oracle::compose(
          oracle::linear_acceptor(toks),
          oracle::insertion_transducer(sigma, std::string(kDelimiter), initial))));
      AutomatonOptions opts;
      opts.allow_initial_delimiter = initial;
      if (!oracle::isomorphic(composed, SegAutomaton::build(toks, opts)))
        bad += fmt(" iso(w=%zu,initial=%d)", w, int(initial));
    }
  }
  return {bad.empty(), bad.empty() ? "2^(w-1) strings for w=1..10; isomorphic to compose-then-project "
                                     "for w<=6 (with and without initial delimiter)"
                                   : "mismatches:" + bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"well-formedness", wellformedness},
      {"constraint-equivalence", constraint_equivalence},
      {"exact-search-oracle", exact_search},
      {"rerank-monotonicity", rerank_monotonicity},
      {"oracle-identity", oracle_identity},
      {"windowing-equivalence", windowing_equivalence},
      {"edit-distance-oracle", edit_distance},
      {"gradient-check", gradient_check},
      {"learnability", learnability},
      {"automaton-language", automaton_language},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %-24s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return std::min(failures, 100);
}

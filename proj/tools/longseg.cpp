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

// longseg: segment, train, derive-labels, oracle, eval, mock-endpoint.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "longseg/longseg.hpp"

namespace fs = std::filesystem;
using namespace longseg;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kMissingInput = 2,
  kBadConfig = 3,
  kEndpointFailure = 4,
  kUnpaired = 5,
};

struct ExitError : Error {
  ExitError(int c, const std::string& msg) : Error(msg), code(c) {}
  int code;
};

void require_files(const std::vector<std::string>& files) {
  for (const auto& f : files)
    if (!fs::is_regular_file(f)) throw ExitError(kMissingInput, "no such input file: " + f);
}

std::vector<LabelRecord> load_label_files(const std::vector<std::string>& files) {
  std::vector<LabelRecord> out;
  for (const auto& f : files) {
    auto recs = load_labels(f);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

// ─── segment ─────────────────────────────────────────────────────────────────

struct SegmentArgs {
  std::vector<std::string> inputs;
  std::string output_dir;
  std::string config;
  std::map<std::string, std::string> overrides;
};

int run_segment(const SegmentArgs& a) {
  require_files(a.inputs);
  PipelineConfig cfg;
  if (!a.config.empty()) {
    if (!fs::is_regular_file(a.config)) throw ConfigError("no such config file: " + a.config);
    cfg.merge_file(a.config);
  }
  for (const auto& [k, v] : a.overrides) cfg.set(k, v);
  cfg.validate();

  std::vector<Transcript> docs;
  for (const auto& f : a.inputs) docs.push_back(load_transcript(f, cfg.normalize));
  std::set<std::string> ids;
  for (const auto& d : docs)
    if (!ids.insert(d.source_id()).second)
      throw ConfigError("duplicate document id '" + d.source_id() + "' among inputs");

  const auto segmenter = build_segmenter(cfg, docs);
  const auto labels = segment_documents(docs, cfg.window, *segmenter, cfg.workers);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const fs::path base = fs::path(a.output_dir) / docs[i].source_id();
    write_file(base.string() + ".seg", format_segments(docs[i], labels[i]));
    write_file(base.string() + ".labels",
               format_labels({to_record(docs[i].source_id(), labels[i])}));
  }
  return kOk;
}

// ─── derive-labels ───────────────────────────────────────────────────────────

int run_derive(const std::vector<std::string>& inputs, const std::string& out_dir,
               const std::string& abbreviations) {
  require_files(inputs);
  const auto rules =
      abbreviations.empty() ? RulePunctuation{} : RulePunctuation::from_file(abbreviations);
  for (const auto& f : inputs) {
    const auto stem = fs::path(f).stem().string();
    auto derived = rules.derive_labels(read_file(f), stem);
    const fs::path base = fs::path(out_dir) / stem;
    write_file(base.string() + ".txt",
               join_tokens(derived.transcript.tokens(), 0, derived.transcript.size()) + "\n");
    write_file(base.string() + ".labels", format_labels({to_record(stem, derived.labels)}));
  }
  return kOk;
}

// ─── train ───────────────────────────────────────────────────────────────────

struct TrainArgs {
  std::vector<std::string> text;
  std::vector<std::string> labels;
  std::string out;
  std::string init;
  TrainParams params;
  std::string orders = "2,3,4";
  std::size_t hash_bits = 20;
};

int run_train(TrainArgs a) {
  require_files(a.text);
  require_files(a.labels);
  if (!a.init.empty()) require_files({a.init});
  const auto records = index_labels(load_label_files(a.labels));

  std::vector<std::pair<Transcript, SegmentationLabels>> corpus;
  for (const auto& f : a.text) {
    auto t = load_transcript(f);
    auto it = records.find(t.source_id());
    if (it == records.end()) throw Error("no labels for training document '" + t.source_id() + "'");
    auto l = to_labels(it->second, t.size());
    corpus.emplace_back(std::move(t), std::move(l));
  }

  std::string orders = a.orders;
  std::replace(orders.begin(), orders.end(), ',', ' ');
  a.params.features.ngram_orders.clear();
  for (const auto& field : split_whitespace(orders))
    a.params.features.ngram_orders.push_back(static_cast<std::uint32_t>(std::stoul(field)));
  if (a.hash_bits > 32) throw ConfigError("--hash-bits must be <= 32");
  a.params.features.hash_dims = std::uint64_t{1} << a.hash_bits;
  a.params.features.salt = a.params.seed;

  std::optional<FeatureModel> init;
  if (!a.init.empty()) init = FeatureModel::load(a.init);
  auto result = train_feature_model(corpus, a.params, init ? &*init : nullptr,
                                    [](std::size_t epoch, double loss) {
                                      std::printf("epoch %zu loss %.6f\n", epoch, loss);
                                      std::fflush(stdout);
                                    });
  result.model.save(a.out);
  return kOk;
}

// ─── oracle ──────────────────────────────────────────────────────────────────

int run_oracle(const std::vector<std::string>& refs, const std::vector<std::string>& asrs,
               const std::string& out_dir, const std::string& abbreviations) {
  require_files(refs);
  require_files(asrs);
  std::map<std::string, std::string> ref_by_id, asr_by_id;
  for (const auto& f : refs) ref_by_id[fs::path(f).stem().string()] = f;
  for (const auto& f : asrs) asr_by_id[fs::path(f).stem().string()] = f;
  std::vector<std::string> unpaired;
  for (const auto& [id, f] : ref_by_id)
    if (!asr_by_id.count(id)) unpaired.push_back(id + " (reference only)");
  for (const auto& [id, f] : asr_by_id)
    if (!ref_by_id.count(id)) unpaired.push_back(id + " (asr only)");
  if (!unpaired.empty()) {
    std::string msg = "unpaired documents:";
    for (const auto& u : unpaired) msg += "\n  " + u;
    throw ExitError(kUnpaired, msg);
  }
  const auto rules =
      abbreviations.empty() ? RulePunctuation{} : RulePunctuation::from_file(abbreviations);
  for (const auto& [id, ref_file] : ref_by_id) {
    const auto asr = load_transcript(asr_by_id.at(id), /*normalize=*/true);
    const auto labels = project_oracle(read_file(ref_file), asr, rules);
    write_file((fs::path(out_dir) / (id + ".labels")).string(), format_labels({to_record(id, labels)}));
  }
  return kOk;
}

// ─── eval ────────────────────────────────────────────────────────────────────

int run_eval(const std::vector<std::string>& pred_files, const std::vector<std::string>& ref_files,
             const std::vector<std::string>& text_files, const std::string& format) {
  require_files(pred_files);
  require_files(ref_files);
  require_files(text_files);
  const auto pred = index_labels(load_label_files(pred_files));
  const auto ref = index_labels(load_label_files(ref_files));
  std::map<std::string, std::size_t> lengths;
  for (const auto& f : text_files) {
    auto t = load_transcript(f);
    lengths[t.source_id()] = t.size();
  }

  std::vector<EvalPair> pairs;
  std::string unpaired;
  for (const auto& [id, r] : ref) {
    auto it = pred.find(id);
    if (it == pred.end()) {
      unpaired += " " + id;
      continue;
    }
    std::size_t n = 0;
    if (auto lt = lengths.find(id); lt != lengths.end()) {
      n = lt->second;
    } else {
      // Without the transcript, assume the document ends after the last boundary.
      if (!r.splits.empty()) n = std::max(n, r.splits.back() + 1);
      if (!it->second.splits.empty()) n = std::max(n, it->second.splits.back() + 1);
    }
    pairs.push_back({id, to_labels(it->second, n), to_labels(r, n)});
  }
  for (const auto& [id, p] : pred)
    if (!ref.count(id)) unpaired += " " + id;
  if (!unpaired.empty()) throw Error("documents without a counterpart:" + unpaired);

  const auto report = evaluate_corpus(pairs);
  if (format == "json")
    std::cout << to_json(report).dump(2) << "\n";
  else
    std::cout << to_table(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence segmentation of long unpunctuated transcripts"};
  app.require_subcommand(1);

  SegmentArgs seg;
  auto* segment = app.add_subcommand("segment", "Segment transcripts with a sliding window");
  segment->add_option("inputs", seg.inputs, "Transcript files (one document each)")->required();
  segment->add_option("-o,--output-dir", seg.output_dir, "Where <id>.seg and <id>.labels go")
      ->required();
  segment->add_option("-c,--config", seg.config, "JSON config file");
  std::map<std::string, std::string> override_values;
  for (const auto& key : PipelineConfig::keys())
    segment->add_option("--" + key, override_values[key], "Overrides config key " + key);

  std::vector<std::string> derive_inputs;
  std::string derive_out, derive_abbrev;
  auto* derive = app.add_subcommand("derive-labels", "Boundaries from punctuated text");
  derive->add_option("inputs", derive_inputs, "Punctuated documents")->required();
  derive->add_option("-o,--output-dir", derive_out, "Writes <id>.txt and <id>.labels")->required();
  derive->add_option("--abbreviations", derive_abbrev, "Abbreviation list file");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a feature model");
  train->add_option("--text", tr.text, "Normalized transcript files")->required();
  train->add_option("--labels", tr.labels, "Labels files")->required();
  train->add_option("-o,--out", tr.out, "Model file to write")->required();
  train->add_option("--init", tr.init, "Warm-start from this model");
  train->add_option("--epochs", tr.params.epochs)->capture_default_str();
  train->add_option("--step-size", tr.params.step_size)->capture_default_str();
  train->add_option("--seed", tr.params.seed)->capture_default_str();
  train->add_option("--batch-size", tr.params.batch_size)->capture_default_str();
  train->add_option("--workers", tr.params.workers)->capture_default_str();
  train->add_option("--window.size", tr.params.window.size)->capture_default_str();
  train->add_option("--window.left", tr.params.window.left)->capture_default_str();
  train->add_option("--window.right", tr.params.window.right)->capture_default_str();
  train->add_option("--hash-bits", tr.hash_bits, "Feature space is 2^bits")->capture_default_str();
  train->add_option("--orders", tr.orders, "Character n-gram orders")->capture_default_str();
  train->add_option("--radius", tr.params.features.context_radius)->capture_default_str();
  train->add_option("--history", tr.params.features.history)->capture_default_str();

  std::vector<std::string> oracle_refs, oracle_asr;
  std::string oracle_out, oracle_abbrev;
  auto* oracle = app.add_subcommand("oracle", "Project reference punctuation onto ASR transcripts");
  oracle->add_option("--reference", oracle_refs, "Punctuated reference transcripts")->required();
  oracle->add_option("--asr", oracle_asr, "ASR transcripts (same file stems)")->required();
  oracle->add_option("-o,--output-dir", oracle_out, "Writes <id>.labels")->required();
  oracle->add_option("--abbreviations", oracle_abbrev, "Abbreviation list file");

  std::vector<std::string> eval_pred, eval_ref, eval_text;
  std::string eval_format = "table";
  auto* eval = app.add_subcommand("eval", "Boundary precision, recall and F1");
  eval->add_option("--pred", eval_pred, "Predicted labels files")->required();
  eval->add_option("--ref", eval_ref, "Reference labels files")->required();
  eval->add_option("--text", eval_text, "Transcripts, for exact document lengths");
  eval->add_option("--format", eval_format)->check(CLI::IsMember({"table", "json"}))->capture_default_str();

  MockConfig mock;
  std::string mock_host = "127.0.0.1";
  int mock_port = 8080;
  auto* mock_cmd = app.add_subcommand("mock-endpoint", "Serve a mock segmentation endpoint");
  mock_cmd->add_option("--host", mock_host)->capture_default_str();
  mock_cmd->add_option("--port", mock_port)->capture_default_str();
  mock_cmd->add_option("--mode", mock.mode)
      ->check(CLI::IsMember({"rule", "echo", "garbage", "empty", "spam", "fail", "badjson"}))
      ->capture_default_str();
  mock_cmd->add_option("--every", mock.every, "Delimiter before every Nth token");
  mock_cmd->add_option("--split-after", mock.split_after, "Delimiter after these tokens");
  mock_cmd->add_option("--corrupt-rate", mock.corrupt_rate)->capture_default_str();
  mock_cmd->add_option("--seed", mock.seed)->capture_default_str();
  mock_cmd->add_option("--fail-first", mock.fail_first, "Answer the first N requests with 500");
  mock_cmd->add_option("--delimiter", mock.delimiter);

  std::vector<std::string> fst_tokens;
  bool fst_initial = false;
  auto* fst = app.add_subcommand("export-automaton", "Print the segmentation acceptor as text arcs");
  fst->add_option("tokens", fst_tokens, "Window tokens")->required();
  fst->add_flag("--initial-delimiter", fst_initial, "Permit a delimiter before the first token");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*segment) {
      for (const auto& key : PipelineConfig::keys())
        if (segment->count("--" + key)) seg.overrides[key] = override_values[key];
      return run_segment(seg);
    }
    if (*derive) return run_derive(derive_inputs, derive_out, derive_abbrev);
    if (*train) return run_train(tr);
    if (*oracle) return run_oracle(oracle_refs, oracle_asr, oracle_out, oracle_abbrev);
    if (*eval) return run_eval(eval_pred, eval_ref, eval_text, eval_format);
    if (*mock_cmd) {
      MockServer server(mock);
      std::cerr << "mock endpoint on http://" << mock_host << ":" << mock_port << "/segment\n";
      server.serve(mock_host, mock_port);
      return kOk;
    }
    if (*fst) {
      AutomatonOptions opts;
      opts.allow_initial_delimiter = fst_initial;
      std::cout << SegAutomaton::build(fst_tokens, opts).to_text();
      return kOk;
    }
  } catch (const ExitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const EndpointError& e) {
    std::cerr << "endpoint error: " << e.what() << "\n";
    return kEndpointFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

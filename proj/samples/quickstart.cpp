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

// Segments a long unpunctuated transcript three ways: with the demo feature
// model, with an external endpoint (an in-process mock), and with the
// endpoint behind a fixed-length fallback after the endpoint goes away.
//
//   quickstart [model.lsfm]

#include <cstdio>
#include <memory>

#include "longseg/longseg.hpp"

using namespace longseg;

int main(int argc, char** argv) {
  const std::string model_path = argc > 1 ? argv[1] : LONGSEG_DEMO_MODEL;
  const std::string punctuated =
      "I am hungry. Dr. Lee made some tea. Are you hungry? We are tired after work. "
      "The kids walked the dog this morning. She is sleepy.";
  const RulePunctuation rules;
  const auto gold = rules.derive_labels(punctuated, "demo");
  const Transcript& text = gold.transcript;  // normalized, no punctuation
  const WindowConfig window{12, 3, 3};

  auto model = std::make_shared<const FeatureModel>(FeatureModel::load(model_path));
  const AutoregressiveSegmenter ar(model, SearchStrategy::beam(4));
  const auto labels = segment_windowed(text, window, ar);
  std::printf("feature model (F1 %.3f):\n%s\n", boundary_f1(labels, gold.labels).f1,
              format_segments(text, labels).c_str());

  MockConfig mock;
  mock.split_after = {"hungry", "tea", "work", "morning"};
  MockServer server(mock);
  server.start();
  EndpointConfig ep;
  ep.url = server.url();
  auto fallback = std::make_shared<const FixedLengthSegmenter>(6);
  const ExternalClient client(ep, fallback);
  const auto remote = segment_windowed(text, window, client);
  std::printf("mock endpoint (F1 %.3f):\n%s\n", boundary_f1(remote, gold.labels).f1,
              format_segments(text, remote).c_str());

  server.stop();
  ep.retries = 0;
  ep.timeout_ms = 200;
  const ExternalClient offline(ep, fallback);
  const auto degraded = segment_windowed(text, window, offline);
  std::printf("endpoint down, fixed-length fallback (F1 %.3f):\n%s", boundary_f1(degraded, gold.labels).f1,
              format_segments(text, degraded).c_str());
  return 0;
}

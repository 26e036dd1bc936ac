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

#include "longseg/align.hpp"
#include "longseg/automaton.hpp"
#include "longseg/core.hpp"
#include "longseg/eval.hpp"
#include "longseg/io.hpp"
#include "longseg/parallel.hpp"
#include "longseg/pipeline.hpp"
#include "longseg/search.hpp"
#include "longseg/segmenters/autoregressive.hpp"
#include "longseg/segmenters/external_client.hpp"
#include "longseg/segmenters/feature_model.hpp"
#include "longseg/segmenters/mock_endpoint.hpp"
#include "longseg/segmenters/rule_punctuation.hpp"
#include "longseg/segmenters/segmenter.hpp"
#include "longseg/windowing.hpp"

// Copyright 2026 The STA Toolkit Authors. All Rights Reserved.
//
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

#include <filesystem>

#include <json.hpp>

#include "sta/ensemble.hpp"
#include "sta/evaluation.hpp"
#include "sta/io.hpp"
#include "sta/postprocess.hpp"
#include "sta/synth.hpp"

namespace sta {

struct SynthConfig {
  int n_examples = 50;
  int n_nouns = 10;
  int n_verbs = 5;
  int gts_per_example = 2;
  int n_sources = 3;
};

/// Every tunable of the toolkit in one place. The JSON form has one object
/// per section ("inference", "ensemble", "evaluation", "noise", "synth");
/// missing keys keep their defaults.
struct RunConfig {
  InferenceConfig inference;
  EnsembleConfig ensemble;
  EvalConfig evaluation;
  NoiseConfig noise{20.0, 0.2, 0.2, 0.2, 0.1, 0};
  SynthConfig synth;

  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j, Diagnostics* diag = nullptr);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path, Diagnostics* diag = nullptr);

}  // namespace sta

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

#include "sta/config.hpp"

#include "sta/errors.hpp"

namespace sta {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& root, const char* name, std::vector<std::string>& issues, Diagnostics* diag)
      : name_(name), issues_(issues), diag_(diag) {
    if (const auto it = root.find(name); it != root.end()) {
      if (it->is_object()) {
        obj_ = &*it;
      } else {
        issues_.push_back(std::string("config: '") + name + "' must be an object");
      }
    }
  }

  template <typename T>
  Section& field(const char* key, T& dst) {
    known_.push_back(key);
    if (obj_ == nullptr) return *this;
    const auto it = obj_->find(key);
    if (it == obj_->end()) return *this;
    const bool ok = std::is_integral_v<T> ? it->is_number_integer() : it->is_number();
    if (!ok) {
      issues_.push_back("config: '" + name_ + "." + key + "' has the wrong type");
      return *this;
    }
    dst = it->get<T>();
    return *this;
  }

  void finish() {
    if (obj_ == nullptr || diag_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        diag_->warnings.push_back("config: ignoring unknown field '" + name_ + "." + key + "'");
      }
    }
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::vector<std::string>& issues_;
  Diagnostics* diag_;
  std::vector<std::string> known_;
};

}  // namespace

void RunConfig::validate() const {
  inference.validate();
  ensemble.validate();
  evaluation.validate();
  noise.validate();
  if (synth.n_examples < 1 || synth.n_nouns < 1 || synth.n_verbs < 1 ||
      synth.gts_per_example < 1 || synth.n_sources < 1) {
    throw ValidationError("config: synth counts must all be >= 1");
  }
}

RunConfig run_config_from_json(const json& j, Diagnostics* diag) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  RunConfig cfg;
  std::vector<std::string> issues;
  Section(j, "inference", issues, diag)
      .field("max_proposals", cfg.inference.max_proposals)
      .field("k_noun", cfg.inference.k_noun)
      .field("k_verb", cfg.inference.k_verb)
      .field("nms_iou", cfg.inference.nms_iou)
      .field("max_exports", cfg.inference.max_exports)
      .field("image_width", cfg.inference.image_width)
      .field("image_height", cfg.inference.image_height)
      .finish();
  Section(j, "ensemble", issues, diag)
      .field("box_iou_min", cfg.ensemble.box_iou_min)
      .field("ttc_tolerance", cfg.ensemble.ttc_tolerance)
      .field("agreement_weight", cfg.ensemble.agreement_weight)
      .field("max_exports", cfg.ensemble.max_exports)
      .finish();
  Section(j, "evaluation", issues, diag)
      .field("iou_min", cfg.evaluation.iou_min)
      .field("ttc_max_error", cfg.evaluation.ttc_max_error)
      .field("top_k", cfg.evaluation.top_k)
      .finish();
  Section(j, "noise", issues, diag)
      .field("box_jitter_sigma", cfg.noise.box_jitter_sigma)
      .field("label_flip_prob", cfg.noise.label_flip_prob)
      .field("verb_flip_prob", cfg.noise.verb_flip_prob)
      .field("ttc_noise_sigma", cfg.noise.ttc_noise_sigma)
      .field("drop_prob", cfg.noise.drop_prob)
      .field("seed", cfg.noise.seed)
      .finish();
  Section(j, "synth", issues, diag)
      .field("n_examples", cfg.synth.n_examples)
      .field("n_nouns", cfg.synth.n_nouns)
      .field("n_verbs", cfg.synth.n_verbs)
      .field("gts_per_example", cfg.synth.gts_per_example)
      .field("n_sources", cfg.synth.n_sources)
      .finish();
  for (const auto& [key, value] : j.items()) {
    if (key != "inference" && key != "ensemble" && key != "evaluation" && key != "noise" &&
        key != "synth" && diag != nullptr) {
      diag->warnings.push_back("config: ignoring unknown section '" + key + "'");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  cfg.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& i = cfg.inference;
  const auto& e = cfg.ensemble;
  const auto& v = cfg.evaluation;
  const auto& n = cfg.noise;
  const auto& s = cfg.synth;
  return json{
      {"inference",
       {{"max_proposals", i.max_proposals},
        {"k_noun", i.k_noun},
        {"k_verb", i.k_verb},
        {"nms_iou", i.nms_iou},
        {"max_exports", i.max_exports},
        {"image_width", i.image_width},
        {"image_height", i.image_height}}},
      {"ensemble",
       {{"box_iou_min", e.box_iou_min},
        {"ttc_tolerance", e.ttc_tolerance},
        {"agreement_weight", e.agreement_weight},
        {"max_exports", e.max_exports}}},
      {"evaluation",
       {{"iou_min", v.iou_min}, {"ttc_max_error", v.ttc_max_error}, {"top_k", v.top_k}}},
      {"noise",
       {{"box_jitter_sigma", n.box_jitter_sigma},
        {"label_flip_prob", n.label_flip_prob},
        {"verb_flip_prob", n.verb_flip_prob},
        {"ttc_noise_sigma", n.ttc_noise_sigma},
        {"drop_prob", n.drop_prob},
        {"seed", n.seed}}},
      {"synth",
       {{"n_examples", s.n_examples},
        {"n_nouns", s.n_nouns},
        {"n_verbs", s.n_verbs},
        {"gts_per_example", s.gts_per_example},
        {"n_sources", s.n_sources}}}};
}

RunConfig load_run_config(const std::filesystem::path& path, Diagnostics* diag) {
  return run_config_from_json(parse_json(read_text_file(path), path.string()), diag);
}

}  // namespace sta

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

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sta/tensor.hpp"
#include "sta/types.hpp"

namespace sta {

/// Raw head outputs for one proposal.
struct ProposalRecord {
  Box2D proposal_box;
  double objectness = 1.0;  // (0, 1]
  std::vector<double> noun_logits;
  std::vector<double> verb_logits;
  std::vector<std::array<double, 4>> box_deltas;  // per noun: dx, dy, dw, dh
  double ttc_raw = 0.0;
  double quality = 1.0;  // (0, 1]
};

struct InferenceConfig {
  int max_proposals = 300;
  int k_noun = 3;
  int k_verb = 3;
  double nms_iou = 0.5;
  int max_exports = 100;
  // Refined boxes are clipped to the image when both are > 0; boxes that end
  // up with zero area are dropped.
  double image_width = 0.0;
  double image_height = 0.0;

  void validate() const;
};

// ln(1000 / 16): upper bound on log-size deltas before exponentiation.
inline const double kMaxLogScale = std::log(1000.0 / 16.0);

// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

// Softplus ln(1 + e^raw) in the form max(raw, 0) + log1p(e^-|raw|).
double ttc_from_raw(double raw);

// Center-offset / log-size refinement of a proposal with positive extent.
Box2D apply_box_deltas(const Box2D& proposal, const std::array<double, 4>& deltas);

void validate_proposal(const ProposalRecord& p, const Taxonomy& taxonomy);

// Caps proposals by objectness, pairs each proposal's top nouns with its top
// verbs and scores every pair as objectness * quality * p_noun * p_verb.
// Output is in canonical order.
std::vector<StaHypothesis> expand_hypotheses(std::span<const ProposalRecord> proposals,
                                             const Taxonomy& taxonomy,
                                             const InferenceConfig& cfg);

// Greedy suppression keyed on noun class only.
std::vector<StaHypothesis> class_aware_nms(std::vector<StaHypothesis> hyps, double nms_iou);

std::vector<StaHypothesis> finalize_submission(std::vector<StaHypothesis> hyps,
                                               int max_exports);

// expand -> nms -> finalize
std::vector<StaHypothesis> run_inference_chain(std::span<const ProposalRecord> proposals,
                                               const Taxonomy& taxonomy,
                                               const InferenceConfig& cfg);

inline constexpr std::array<const char*, 7> kProposalTensorNames = {
    "objectness", "noun_logits", "verb_logits", "box_deltas",
    "ttc_raw",    "quality",     "proposal_boxes"};

// Groups a head-output container into per-example proposal lists. Tensors
// named "<uid>/<field>" belong to example <uid>; bare "<field>" tensors belong
// to `default_uid`. Expected shapes for P proposals, N nouns, V verbs:
//   objectness [P], quality [P], ttc_raw [P], proposal_boxes [P, 4],
//   noun_logits [P, N], verb_logits [P, V], box_deltas [P, N, 4].
// Every missing or mis-shaped tensor is reported in one ValidationError.
std::map<std::string, std::vector<ProposalRecord>> proposals_from_tensors(
    const NamedTensors& tensors, const Taxonomy& taxonomy, const std::string& default_uid);

// Inverse of proposals_from_tensors for one example.
void add_proposal_tensors(NamedTensors& tensors, std::span<const ProposalRecord> proposals,
                          std::size_t noun_count, std::size_t verb_count,
                          const std::string& uid_prefix = "");

}  // namespace sta

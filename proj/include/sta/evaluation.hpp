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
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sta/types.hpp"

namespace sta {

enum class MatchVariant { Noun = 0, NounVerb = 1, NounTtc = 2, Overall = 3 };

inline constexpr std::array<MatchVariant, 4> kAllVariants = {
    MatchVariant::Noun, MatchVariant::NounVerb, MatchVariant::NounTtc, MatchVariant::Overall};

std::string_view variant_name(MatchVariant v);
constexpr std::size_t index_of(MatchVariant v) { return static_cast<std::size_t>(v); }

struct EvalConfig {
  double iou_min = 0.5;         // match needs iou strictly greater
  double ttc_max_error = 0.25;  // seconds, strictly less
  int top_k = 5;

  void validate() const;
};

struct MatchCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t missed = 0;  // ground truths left unmatched

  bool operator==(const MatchCounts&) const = default;
};

struct EvalReport {
  // Percentages in [0, 100].
  double map_overall = 0.0;
  double map_noun = 0.0;
  double map_noun_verb = 0.0;
  double map_noun_ttc = 0.0;
  // AP in [0, 1] per noun class with at least one ground truth, indexed by
  // MatchVariant.
  std::map<CategoryId, std::array<double, 4>> per_noun_ap;
  std::array<MatchCounts, 4> counts{};
  std::size_t ground_truths = 0;
  std::size_t predictions_scored = 0;  // after top-k truncation

  double map(MatchVariant v) const;
  void set_map(MatchVariant v, double value);
};

bool matches(const StaHypothesis& pred, const GroundTruthInstance& gt, MatchVariant variant,
             const EvalConfig& cfg);

// At most k hypotheses, in canonical order.
std::vector<StaHypothesis> top_k_filter(std::vector<StaHypothesis> preds, int k);

// All-point interpolated AP over ranked true/false-positive flags. Returns
// nullopt when n_gt == 0 so the class can be left out of the mean.
std::optional<double> average_precision(std::span<const bool> ranked_true_positive,
                                        std::size_t n_gt);

// Per variant: truncate every example to its top-k, then per noun class pool
// predictions across examples in canonical order (example uid breaks exact
// ties) and match greedily against unmatched ground truths of the same
// example and class, preferring the highest iou. mAP averages AP over classes
// with ground truth.
EvalReport evaluate(const PredictionSet& preds, std::span<const GroundTruthInstance> gts,
                    const EvalConfig& cfg);

// Same, after checking every category id against `taxonomy`.
EvalReport evaluate(const PredictionSet& preds, std::span<const GroundTruthInstance> gts,
                    const Taxonomy& taxonomy, const EvalConfig& cfg);

// Aligned text table with Overall, Noun, Noun+Verb and Noun+TTC columns.
std::string format_report_table(const EvalReport& report, const EvalConfig& cfg);

}  // namespace sta

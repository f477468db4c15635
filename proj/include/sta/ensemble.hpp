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

#include <cstddef>
#include <span>
#include <vector>

#include "sta/types.hpp"

namespace sta {

struct EnsembleConfig {
  double box_iou_min = 0.5;
  double ttc_tolerance = 0.25;  // seconds
  double agreement_weight = 0.5;
  int n_sources = 1;
  int max_exports = 100;

  void validate() const;
};

struct HypothesisGroup {
  std::vector<StaHypothesis> members;  // canonical order, seed first
  std::size_t seed_index = 0;

  const StaHypothesis& seed() const { return members.at(seed_index); }
};

// Same noun, same verb, iou >= box_iou_min and |ttc difference| <= ttc_tolerance.
bool compatible(const StaHypothesis& a, const StaHypothesis& b, const EnsembleConfig& cfg);

// Greedy seed-anchored partition. The best ungrouped hypothesis seeds a group
// and takes every ungrouped hypothesis compatible with it; membership is not
// transitive.
std::vector<HypothesisGroup> group_hypotheses(std::vector<StaHypothesis> all,
                                              const EnsembleConfig& cfg);

// Score-weighted corner and ttc average; labels and source id come from the
// seed. The mean member score is scaled by
//   (1 - agreement_weight) + agreement_weight * distinct_sources / n_sources.
StaHypothesis merge_group(const HypothesisGroup& group, const EnsembleConfig& cfg);

struct EnsembleStats {
  std::size_t input_hypotheses = 0;
  std::size_t groups = 0;
};

// Pools every source per example uid (source_id = position in `sources`),
// groups, merges, sorts and truncates to cfg.max_exports. n_sources is taken
// from sources.size(). Output hypotheses carry no source id.
PredictionSet ensemble_predictions(std::span<const PredictionSet> sources,
                                   const EnsembleConfig& cfg, EnsembleStats* stats = nullptr);

}  // namespace sta

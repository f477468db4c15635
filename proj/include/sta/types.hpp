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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sta/box.hpp"

namespace sta {

using CategoryId = std::int32_t;

/// Noun and verb vocabularies. Category ids index into these lists.
struct Taxonomy {
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;

  std::size_t noun_count() const { return nouns.size(); }
  std::size_t verb_count() const { return verbs.size(); }
  bool has_noun(CategoryId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < nouns.size();
  }
  bool has_verb(CategoryId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < verbs.size();
  }

  // Throws ValidationError listing empty lists and duplicate labels.
  void validate() const;

  bool operator==(const Taxonomy&) const = default;
};

/// One anticipated interaction: where, what object, what action, when, and
/// how confident.
struct StaHypothesis {
  Box2D box;
  CategoryId noun_id = 0;
  CategoryId verb_id = 0;
  double ttc = 0.0;    // seconds until contact
  double score = 1.0;  // > 0
  std::optional<std::int64_t> source_id;

  bool operator==(const StaHypothesis&) const = default;
};

struct GroundTruthInstance {
  std::string example_uid;
  Box2D box;
  CategoryId noun_id = 0;
  CategoryId verb_id = 0;
  double ttc = 0.0;

  bool operator==(const GroundTruthInstance&) const = default;
};

/// Total order used everywhere hypotheses are ranked: score descending, then
/// noun, verb, box corners, ttc and source id ascending.
bool canonical_less(const StaHypothesis& a, const StaHypothesis& b);
void sort_canonical(std::vector<StaHypothesis>& hyps);

// Empty result means valid. `taxonomy` may be null to skip id range checks.
std::vector<std::string> hypothesis_issues(const StaHypothesis& h,
                                           const Taxonomy* taxonomy);
std::vector<std::string> ground_truth_issues(const GroundTruthInstance& gt,
                                             const Taxonomy* taxonomy);

/// Hypotheses per example uid, each list in canonical order.
struct PredictionSet {
  std::map<std::string, std::vector<StaHypothesis>> results;
  std::optional<Taxonomy> taxonomy;

  std::size_t hypothesis_count() const;
  void sort_all();

  bool operator==(const PredictionSet&) const = default;
};

}  // namespace sta

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

#include "sta/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace sta {
namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out += "; ";
    out += issues[i];
  }
  return out;
}

void check_unique(const std::vector<std::string>& labels, const char* kind,
                  std::vector<std::string>& issues) {
  if (labels.empty()) issues.push_back(std::string(kind) + " list is empty");
  std::set<std::string> seen;
  for (const auto& label : labels) {
    if (!seen.insert(label).second) {
      issues.push_back(std::string("duplicate ") + kind + " label '" + label + "'");
    }
  }
}

}  // namespace

ValidationError::ValidationError(std::string issue)
    : Error(issue), issues_{std::move(issue)} {}

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error(join_issues(issues)), issues_(std::move(issues)) {}

void Taxonomy::validate() const {
  std::vector<std::string> issues;
  check_unique(nouns, "noun", issues);
  check_unique(verbs, "verb", issues);
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

bool canonical_less(const StaHypothesis& a, const StaHypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto key = [](const StaHypothesis& h) {
    return std::tie(h.noun_id, h.verb_id, h.box.x1, h.box.y1, h.box.x2, h.box.y2,
                    h.ttc);
  };
  if (key(a) != key(b)) return key(a) < key(b);
  // nullopt sorts before any id
  return a.source_id < b.source_id;
}

void sort_canonical(std::vector<StaHypothesis>& hyps) {
  std::sort(hyps.begin(), hyps.end(), canonical_less);
}

std::vector<std::string> hypothesis_issues(const StaHypothesis& h,
                                           const Taxonomy* taxonomy) {
  std::vector<std::string> issues;
  if (!is_valid(h.box)) issues.push_back("invalid box " + describe(h.box));
  if (!std::isfinite(h.ttc) || h.ttc < 0.0) {
    issues.push_back("ttc must be finite and >= 0, got " + std::to_string(h.ttc));
  }
  if (!std::isfinite(h.score) || h.score <= 0.0) {
    issues.push_back("score must be finite and > 0, got " + std::to_string(h.score));
  }
  if (taxonomy != nullptr) {
    if (!taxonomy->has_noun(h.noun_id)) {
      issues.push_back("unknown noun id " + std::to_string(h.noun_id));
    }
    if (!taxonomy->has_verb(h.verb_id)) {
      issues.push_back("unknown verb id " + std::to_string(h.verb_id));
    }
  } else {
    if (h.noun_id < 0) issues.push_back("negative noun id");
    if (h.verb_id < 0) issues.push_back("negative verb id");
  }
  return issues;
}

std::vector<std::string> ground_truth_issues(const GroundTruthInstance& gt,
                                             const Taxonomy* taxonomy) {
  StaHypothesis as_hyp{gt.box, gt.noun_id, gt.verb_id, gt.ttc, 1.0, std::nullopt};
  auto issues = hypothesis_issues(as_hyp, taxonomy);
  if (gt.example_uid.empty()) issues.push_back("empty example uid");
  return issues;
}

std::size_t PredictionSet::hypothesis_count() const {
  std::size_t n = 0;
  for (const auto& [uid, hyps] : results) n += hyps.size();
  return n;
}

void PredictionSet::sort_all() {
  for (auto& [uid, hyps] : results) sort_canonical(hyps);
}

}  // namespace sta

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

#include "sta/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sta/errors.hpp"

namespace sta {

void EnsembleConfig::validate() const {
  std::vector<std::string> issues;
  if (!(box_iou_min > 0.0 && box_iou_min <= 1.0)) issues.push_back("box_iou_min must be in (0, 1]");
  if (!(ttc_tolerance > 0.0) || !std::isfinite(ttc_tolerance)) {
    issues.push_back("ttc_tolerance must be positive");
  }
  if (!(agreement_weight >= 0.0 && agreement_weight <= 1.0)) {
    issues.push_back("agreement_weight must be in [0, 1]");
  }
  if (n_sources < 1) issues.push_back("n_sources must be >= 1");
  if (max_exports < 1) issues.push_back("max_exports must be >= 1");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

bool compatible(const StaHypothesis& a, const StaHypothesis& b, const EnsembleConfig& cfg) {
  return a.noun_id == b.noun_id && a.verb_id == b.verb_id &&
         std::abs(a.ttc - b.ttc) <= cfg.ttc_tolerance && iou(a.box, b.box) >= cfg.box_iou_min;
}

std::vector<HypothesisGroup> group_hypotheses(std::vector<StaHypothesis> all,
                                              const EnsembleConfig& cfg) {
  sort_canonical(all);
  std::vector<bool> taken(all.size(), false);
  std::vector<HypothesisGroup> groups;
  for (std::size_t s = 0; s < all.size(); ++s) {
    if (taken[s]) continue;
    taken[s] = true;
    HypothesisGroup g;
    g.members.push_back(all[s]);
    for (std::size_t j = s + 1; j < all.size(); ++j) {
      if (!taken[j] && compatible(all[s], all[j], cfg)) {
        taken[j] = true;
        g.members.push_back(all[j]);
      }
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

StaHypothesis merge_group(const HypothesisGroup& group, const EnsembleConfig& cfg) {
  if (group.members.empty()) throw ValidationError("merge_group: empty group");
  cfg.validate();
  std::set<std::int64_t> sources;
  std::size_t untagged = 0;
  double total = 0.0;
  for (const auto& m : group.members) {
    total += m.score;
    if (m.source_id) {
      sources.insert(*m.source_id);
    } else {
      ++untagged;
    }
  }
  // Untagged members count as one anonymous source.
  const std::size_t distinct = sources.size() + (untagged > 0 ? 1 : 0);
  if (distinct > static_cast<std::size_t>(cfg.n_sources)) {
    throw ValidationError("merge_group: group spans " + std::to_string(distinct) +
                          " sources but n_sources is " + std::to_string(cfg.n_sources));
  }

  const StaHypothesis& seed = group.seed();
  StaHypothesis merged = seed;
  Box2D lo = seed.box, hi = seed.box;
  double ttc_lo = seed.ttc, ttc_hi = seed.ttc;
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0, ttc = 0;
  for (const auto& m : group.members) {
    const double w = m.score / total;
    x1 += w * m.box.x1;
    y1 += w * m.box.y1;
    x2 += w * m.box.x2;
    y2 += w * m.box.y2;
    ttc += w * m.ttc;
    lo = {std::min(lo.x1, m.box.x1), std::min(lo.y1, m.box.y1), std::min(lo.x2, m.box.x2),
          std::min(lo.y2, m.box.y2)};
    hi = {std::max(hi.x1, m.box.x1), std::max(hi.y1, m.box.y1), std::max(hi.x2, m.box.x2),
          std::max(hi.y2, m.box.y2)};
    ttc_lo = std::min(ttc_lo, m.ttc);
    ttc_hi = std::max(ttc_hi, m.ttc);
  }
  // Rounding must not push a weighted mean outside the member range.
  merged.box.x1 = std::clamp(x1, lo.x1, hi.x1);
  merged.box.y1 = std::clamp(y1, lo.y1, hi.y1);
  merged.box.x2 = std::max(std::clamp(x2, lo.x2, hi.x2), merged.box.x1);
  merged.box.y2 = std::max(std::clamp(y2, lo.y2, hi.y2), merged.box.y1);
  merged.ttc = std::clamp(ttc, ttc_lo, ttc_hi);

  const double alpha = cfg.agreement_weight;
  const double agreement =
      (1.0 - alpha) + alpha * static_cast<double>(distinct) / static_cast<double>(cfg.n_sources);
  merged.score = total / static_cast<double>(group.members.size()) * agreement;
  return merged;
}

PredictionSet ensemble_predictions(std::span<const PredictionSet> sources,
                                   const EnsembleConfig& cfg, EnsembleStats* stats) {
  if (sources.empty()) throw ValidationError("ensemble: no sources");
  std::optional<Taxonomy> taxonomy;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!sources[i].taxonomy) continue;
    if (!taxonomy) {
      taxonomy = sources[i].taxonomy;
    } else if (*taxonomy != *sources[i].taxonomy) {
      throw ValidationError("ensemble: taxonomy of source " + std::to_string(i) +
                            " differs from earlier sources");
    }
  }

  EnsembleConfig effective = cfg;
  effective.n_sources = static_cast<int>(sources.size());
  effective.validate();

  std::map<std::string, std::vector<StaHypothesis>> pooled;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (const auto& [uid, hyps] : sources[i].results) {
      auto& dst = pooled[uid];
      for (StaHypothesis h : hyps) {
        h.source_id = static_cast<std::int64_t>(i);
        dst.push_back(h);
      }
    }
  }

  PredictionSet out;
  out.taxonomy = taxonomy;
  for (auto& [uid, hyps] : pooled) {
    if (stats) stats->input_hypotheses += hyps.size();
    const auto groups = group_hypotheses(std::move(hyps), effective);
    if (stats) stats->groups += groups.size();
    std::vector<StaHypothesis> merged;
    merged.reserve(groups.size());
    for (const auto& g : groups) {
      merged.push_back(merge_group(g, effective));
      merged.back().source_id.reset();
    }
    sort_canonical(merged);
    if (merged.size() > static_cast<std::size_t>(effective.max_exports)) {
      merged.resize(static_cast<std::size_t>(effective.max_exports));
    }
    if (!merged.empty()) out.results[uid] = std::move(merged);
  }
  return out;
}

}  // namespace sta

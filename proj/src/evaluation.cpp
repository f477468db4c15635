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

#include "sta/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <unordered_map>

#include "sta/errors.hpp"

namespace sta {

std::string_view variant_name(MatchVariant v) {
  switch (v) {
    case MatchVariant::Noun: return "Noun";
    case MatchVariant::NounVerb: return "Noun+Verb";
    case MatchVariant::NounTtc: return "Noun+TTC";
    case MatchVariant::Overall: return "Overall";
  }
  return "?";
}

void EvalConfig::validate() const {
  std::vector<std::string> issues;
  if (!(iou_min >= 0.0 && iou_min < 1.0)) issues.push_back("iou_min must be in [0, 1)");
  if (!(ttc_max_error > 0.0) || !std::isfinite(ttc_max_error)) {
    issues.push_back("ttc_max_error must be positive");
  }
  if (top_k < 1) issues.push_back("top_k must be >= 1");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

double EvalReport::map(MatchVariant v) const {
  switch (v) {
    case MatchVariant::Noun: return map_noun;
    case MatchVariant::NounVerb: return map_noun_verb;
    case MatchVariant::NounTtc: return map_noun_ttc;
    case MatchVariant::Overall: return map_overall;
  }
  return 0.0;
}

void EvalReport::set_map(MatchVariant v, double value) {
  switch (v) {
    case MatchVariant::Noun: map_noun = value; break;
    case MatchVariant::NounVerb: map_noun_verb = value; break;
    case MatchVariant::NounTtc: map_noun_ttc = value; break;
    case MatchVariant::Overall: map_overall = value; break;
  }
}

bool matches(const StaHypothesis& pred, const GroundTruthInstance& gt, MatchVariant variant,
             const EvalConfig& cfg) {
  if (pred.noun_id != gt.noun_id) return false;
  const bool need_verb = variant == MatchVariant::NounVerb || variant == MatchVariant::Overall;
  const bool need_ttc = variant == MatchVariant::NounTtc || variant == MatchVariant::Overall;
  if (need_verb && pred.verb_id != gt.verb_id) return false;
  if (need_ttc && !(std::abs(pred.ttc - gt.ttc) < cfg.ttc_max_error)) return false;
  return iou(pred.box, gt.box) > cfg.iou_min;
}

std::vector<StaHypothesis> top_k_filter(std::vector<StaHypothesis> preds, int k) {
  sort_canonical(preds);
  const auto cap = static_cast<std::size_t>(std::max(k, 0));
  if (preds.size() > cap) preds.resize(cap);
  return preds;
}

std::optional<double> average_precision(std::span<const bool> ranked_true_positive,
                                        std::size_t n_gt) {
  if (n_gt == 0) return std::nullopt;
  const std::size_t n = ranked_true_positive.size();
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_true_positive[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Monotonize from the right.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked_true_positive[i]) ap += precision[i];
  }
  return std::min(1.0, ap / static_cast<double>(n_gt));
}

namespace {

struct ScoredPrediction {
  const std::string* uid;
  StaHypothesis hyp;
};

struct ClassData {
  std::vector<ScoredPrediction> preds;
  // uid -> indices into the gt span
  std::unordered_map<std::string_view, std::vector<std::size_t>> gts_by_uid;
  std::size_t n_gt = 0;
};

void validate_inputs(const PredictionSet& preds, std::span<const GroundTruthInstance> gts,
                     const Taxonomy* taxonomy) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (const auto& issue : ground_truth_issues(gts[i], taxonomy)) {
      issues.push_back("ground truth " + std::to_string(i) + " ('" + gts[i].example_uid +
                       "'): " + issue);
    }
  }
  for (const auto& [uid, hyps] : preds.results) {
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      for (const auto& issue : hypothesis_issues(hyps[i], taxonomy)) {
        issues.push_back("prediction " + std::to_string(i) + " of '" + uid + "': " + issue);
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

EvalReport evaluate_validated(const PredictionSet& preds,
                              std::span<const GroundTruthInstance> gts,
                              const EvalConfig& cfg) {
  std::map<CategoryId, ClassData> classes;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    auto& c = classes[gts[i].noun_id];
    c.gts_by_uid[gts[i].example_uid].push_back(i);
    ++c.n_gt;
  }

  EvalReport report;
  report.ground_truths = gts.size();
  for (const auto& [uid, hyps] : preds.results) {
    for (auto& h : top_k_filter(hyps, cfg.top_k)) {
      ++report.predictions_scored;
      const auto it = classes.find(h.noun_id);
      // Classes without ground truth are left out of the mean.
      if (it == classes.end()) continue;
      it->second.preds.push_back({&uid, std::move(h)});
    }
  }
  for (auto& [noun, c] : classes) {
    std::sort(c.preds.begin(), c.preds.end(),
              [](const ScoredPrediction& a, const ScoredPrediction& b) {
                if (canonical_less(a.hyp, b.hyp)) return true;
                if (canonical_less(b.hyp, a.hyp)) return false;
                return *a.uid < *b.uid;
              });
  }

  for (MatchVariant variant : kAllVariants) {
    const std::size_t vi = index_of(variant);
    double ap_sum = 0.0;
    std::size_t ap_classes = 0;
    MatchCounts& counts = report.counts[vi];
    // Each ground truth belongs to exactly one class, so one mask serves all.
    std::vector<bool> matched(gts.size(), false);
    for (const auto& [noun, c] : classes) {
      const auto flags = std::make_unique<bool[]>(c.preds.size());
      std::size_t hits = 0;
      for (std::size_t r = 0; r < c.preds.size(); ++r) {
        const auto& p = c.preds[r];
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        if (const auto it = c.gts_by_uid.find(*p.uid); it != c.gts_by_uid.end()) {
          for (std::size_t g : it->second) {
            if (matched[g] || !matches(p.hyp, gts[g], variant, cfg)) continue;
            const double o = iou(p.hyp.box, gts[g].box);
            if (o > best_iou) {
              best_iou = o;
              best = g;
            }
          }
        }
        if (best) matched[*best] = true;
        flags[r] = best.has_value();
        hits += flags[r] ? 1 : 0;
      }
      counts.true_positives += hits;
      counts.false_positives += c.preds.size() - hits;
      counts.missed += c.n_gt - hits;
      const auto ap = average_precision({flags.get(), c.preds.size()}, c.n_gt);
      if (!ap) continue;
      report.per_noun_ap[noun][vi] = *ap;
      ap_sum += *ap;
      ++ap_classes;
    }
    report.set_map(variant, ap_classes == 0 ? 0.0 : 100.0 * ap_sum / static_cast<double>(ap_classes));
  }
  return report;
}

}  // namespace

EvalReport evaluate(const PredictionSet& preds, std::span<const GroundTruthInstance> gts,
                    const EvalConfig& cfg) {
  cfg.validate();
  validate_inputs(preds, gts, nullptr);
  return evaluate_validated(preds, gts, cfg);
}

EvalReport evaluate(const PredictionSet& preds, std::span<const GroundTruthInstance> gts,
                    const Taxonomy& taxonomy, const EvalConfig& cfg) {
  cfg.validate();
  taxonomy.validate();
  validate_inputs(preds, gts, &taxonomy);
  return evaluate_validated(preds, gts, cfg);
}

std::string format_report_table(const EvalReport& report, const EvalConfig& cfg) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line,
                "Top-%d mAP (per-example top-%d truncation; local stand-in for the official "
                "aggregation)\n",
                cfg.top_k, cfg.top_k);
  out += line;
  std::snprintf(line, sizeof line, "%10s %10s %10s %10s\n", "Overall", "Noun", "Noun+Verb",
                "Noun+TTC");
  out += line;
  std::snprintf(line, sizeof line, "%10.2f %10.2f %10.2f %10.2f\n", report.map_overall,
                report.map_noun, report.map_noun_verb, report.map_noun_ttc);
  out += line;
  return out;
}

}  // namespace sta

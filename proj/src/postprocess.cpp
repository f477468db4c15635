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

#include "sta/postprocess.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "sta/errors.hpp"

namespace sta {
namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Objectness decides which proposals survive the cap. Remaining fields only
// break ties, so the cap does not depend on input order.
bool proposal_rank_less(const ProposalRecord& a, const ProposalRecord& b) {
  if (a.objectness != b.objectness) return a.objectness > b.objectness;
  if (a.quality != b.quality) return a.quality > b.quality;
  const auto key = [](const ProposalRecord& p) {
    return std::tie(p.proposal_box.x1, p.proposal_box.y1, p.proposal_box.x2,
                    p.proposal_box.y2, p.ttc_raw, p.noun_logits, p.verb_logits,
                    p.box_deltas);
  };
  return key(a) < key(b);
}

std::vector<std::size_t> top_indices(const std::vector<double>& probs, int k) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const auto keep = std::min(idx.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  idx.resize(keep);
  return idx;
}

}  // namespace

void InferenceConfig::validate() const {
  std::vector<std::string> issues;
  if (max_proposals < 1) issues.push_back("max_proposals must be >= 1");
  if (k_noun < 1) issues.push_back("k_noun must be >= 1");
  if (k_verb < 1) issues.push_back("k_verb must be >= 1");
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) issues.push_back("nms_iou must be in (0, 1]");
  if (max_exports < 1) issues.push_back("max_exports must be >= 1");
  if (!std::isfinite(image_width) || !std::isfinite(image_height) || image_width < 0.0 ||
      image_height < 0.0) {
    issues.push_back("image size must be finite and >= 0");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw ValidationError("softmax: empty logits");
  if (!all_finite(logits)) throw ValidationError("softmax: non-finite logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

double ttc_from_raw(double raw) {
  if (!std::isfinite(raw)) throw ValidationError("ttc_from_raw: non-finite input");
  return std::max(raw, 0.0) + std::log1p(std::exp(-std::abs(raw)));
}

Box2D apply_box_deltas(const Box2D& proposal, const std::array<double, 4>& deltas) {
  validate_box(proposal);
  const double w = proposal.width();
  const double h = proposal.height();
  if (!(w > 0.0) || !(h > 0.0)) {
    throw ValidationError("apply_box_deltas: zero-size proposal " + describe(proposal));
  }
  for (double d : deltas) {
    if (!std::isfinite(d)) throw ValidationError("apply_box_deltas: non-finite delta");
  }
  const double cx = proposal.center_x() + deltas[0] * w;
  const double cy = proposal.center_y() + deltas[1] * h;
  const double half_w = 0.5 * w * std::exp(std::min(deltas[2], kMaxLogScale));
  const double half_h = 0.5 * h * std::exp(std::min(deltas[3], kMaxLogScale));
  return {cx - half_w, cy - half_h, cx + half_w, cy + half_h};
}

void validate_proposal(const ProposalRecord& p, const Taxonomy& taxonomy) {
  std::vector<std::string> issues;
  if (!is_valid(p.proposal_box) || !(p.proposal_box.width() > 0.0) ||
      !(p.proposal_box.height() > 0.0)) {
    issues.push_back("proposal box must be valid with positive size, got " +
                     describe(p.proposal_box));
  }
  if (!in_unit_interval(p.objectness)) issues.push_back("objectness must be in (0, 1]");
  if (!in_unit_interval(p.quality)) issues.push_back("quality must be in (0, 1]");
  if (!std::isfinite(p.ttc_raw)) issues.push_back("ttc_raw must be finite");
  if (p.noun_logits.size() != taxonomy.noun_count()) {
    issues.push_back("noun_logits length " + std::to_string(p.noun_logits.size()) +
                     " != noun vocabulary " + std::to_string(taxonomy.noun_count()));
  }
  if (p.verb_logits.size() != taxonomy.verb_count()) {
    issues.push_back("verb_logits length " + std::to_string(p.verb_logits.size()) +
                     " != verb vocabulary " + std::to_string(taxonomy.verb_count()));
  }
  if (!all_finite(p.noun_logits) || !all_finite(p.verb_logits)) {
    issues.push_back("logits must be finite");
  }
  if (p.box_deltas.size() != taxonomy.noun_count()) {
    issues.push_back("box_deltas must hold one 4-vector per noun");
  }
  for (const auto& d : p.box_deltas) {
    if (!all_finite(d)) {
      issues.push_back("box_deltas must be finite");
      break;
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

std::vector<StaHypothesis> expand_hypotheses(std::span<const ProposalRecord> proposals,
                                             const Taxonomy& taxonomy,
                                             const InferenceConfig& cfg) {
  taxonomy.validate();
  cfg.validate();
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    try {
      validate_proposal(proposals[i], taxonomy);
    } catch (const ValidationError& e) {
      for (const auto& issue : e.issues()) {
        issues.push_back("proposal " + std::to_string(i) + ": " + issue);
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  std::vector<const ProposalRecord*> retained;
  retained.reserve(proposals.size());
  for (const auto& p : proposals) retained.push_back(&p);
  std::sort(retained.begin(), retained.end(),
            [](const ProposalRecord* a, const ProposalRecord* b) {
              return proposal_rank_less(*a, *b);
            });
  if (retained.size() > static_cast<std::size_t>(cfg.max_proposals)) {
    retained.resize(static_cast<std::size_t>(cfg.max_proposals));
  }

  const bool clip = cfg.image_width > 0.0 && cfg.image_height > 0.0;
  std::vector<StaHypothesis> out;
  out.reserve(retained.size() * static_cast<std::size_t>(cfg.k_noun * cfg.k_verb));
  for (const ProposalRecord* p : retained) {
    const auto noun_probs = softmax(p->noun_logits);
    const auto verb_probs = softmax(p->verb_logits);
    const double ttc = ttc_from_raw(p->ttc_raw);
    const double base = p->objectness * p->quality;
    const auto top_verbs = top_indices(verb_probs, cfg.k_verb);
    for (std::size_t n : top_indices(noun_probs, cfg.k_noun)) {
      Box2D box = apply_box_deltas(p->proposal_box, p->box_deltas[n]);
      if (clip) {
        const auto clipped = clip_box(box, cfg.image_width, cfg.image_height);
        if (clipped.degenerate) continue;
        box = clipped.box;
      }
      for (std::size_t v : top_verbs) {
        const double score = base * noun_probs[n] * verb_probs[v];
        if (!(score > 0.0)) continue;  // underflow
        out.push_back({box, static_cast<CategoryId>(n), static_cast<CategoryId>(v), ttc,
                       score, std::nullopt});
      }
    }
  }
  sort_canonical(out);
  return out;
}

std::vector<StaHypothesis> class_aware_nms(std::vector<StaHypothesis> hyps, double nms_iou) {
  sort_canonical(hyps);
  std::unordered_map<CategoryId, std::vector<Box2D>> kept_by_noun;
  std::vector<StaHypothesis> kept;
  kept.reserve(hyps.size());
  for (auto& h : hyps) {
    auto& kept_boxes = kept_by_noun[h.noun_id];
    const bool suppressed = std::any_of(kept_boxes.begin(), kept_boxes.end(),
                                        [&](const Box2D& k) { return iou(k, h.box) > nms_iou; });
    if (suppressed) continue;
    kept_boxes.push_back(h.box);
    kept.push_back(std::move(h));
  }
  return kept;
}

std::vector<StaHypothesis> finalize_submission(std::vector<StaHypothesis> hyps,
                                               int max_exports) {
  sort_canonical(hyps);
  const auto cap = static_cast<std::size_t>(std::max(max_exports, 0));
  if (hyps.size() > cap) hyps.resize(cap);
  return hyps;
}

std::vector<StaHypothesis> run_inference_chain(std::span<const ProposalRecord> proposals,
                                               const Taxonomy& taxonomy,
                                               const InferenceConfig& cfg) {
  return finalize_submission(
      class_aware_nms(expand_hypotheses(proposals, taxonomy, cfg), cfg.nms_iou),
      cfg.max_exports);
}

namespace {

struct FieldSet {
  std::map<std::string, const FeatureTensor*> fields;
};

bool is_proposal_field(const std::string& name) {
  return std::find(kProposalTensorNames.begin(), kProposalTensorNames.end(), name) !=
         kProposalTensorNames.end();
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

std::map<std::string, std::vector<ProposalRecord>> proposals_from_tensors(
    const NamedTensors& tensors, const Taxonomy& taxonomy, const std::string& default_uid) {
  taxonomy.validate();
  std::map<std::string, FieldSet> by_uid;
  for (const auto& [name, tensor] : tensors) {
    const auto slash = name.rfind('/');
    const std::string uid = slash == std::string::npos ? default_uid : name.substr(0, slash);
    const std::string field = slash == std::string::npos ? name : name.substr(slash + 1);
    if (!is_proposal_field(field)) continue;
    by_uid[uid].fields[field] = &tensor;
  }

  const std::size_t n_nouns = taxonomy.noun_count();
  const std::size_t n_verbs = taxonomy.verb_count();
  std::vector<std::string> issues;
  std::map<std::string, std::vector<ProposalRecord>> out;
  for (const auto& [uid, set] : by_uid) {
    const std::string where = uid.empty() ? std::string("container") : "example '" + uid + "'";
    bool complete = true;
    for (const char* required : kProposalTensorNames) {
      if (!set.fields.count(required)) {
        issues.push_back(where + ": missing tensor '" + required + "'");
        complete = false;
      }
    }
    if (!complete) continue;

    const auto& f = set.fields;
    const FeatureTensor& objectness = *f.at("objectness");
    const std::size_t n = objectness.rank() == 1 ? objectness.dim(0) : 0;
    const std::map<std::string, std::vector<std::size_t>> expected = {
        {"objectness", {n}},
        {"quality", {n}},
        {"ttc_raw", {n}},
        {"proposal_boxes", {n, 4}},
        {"noun_logits", {n, n_nouns}},
        {"verb_logits", {n, n_verbs}},
        {"box_deltas", {n, n_nouns, 4}}};
    bool shapes_ok = objectness.rank() == 1;
    if (!shapes_ok) issues.push_back(where + ": 'objectness' must be rank 1");
    for (const auto& [field, shape] : expected) {
      const FeatureTensor& t = *f.at(field);
      if (t.shape != shape) {
        issues.push_back(where + ": '" + field + "' has shape " + shape_string(t.shape) +
                         ", expected " + shape_string(shape));
        shapes_ok = false;
      } else {
        try {
          t.validate(field);
        } catch (const ValidationError& e) {
          issues.push_back(where + ": " + e.what());
          shapes_ok = false;
        }
      }
    }
    if (!shapes_ok) continue;

    auto& records = out[uid];
    records.resize(n);
    const auto& boxes = f.at("proposal_boxes")->data;
    const auto& nl = f.at("noun_logits")->data;
    const auto& vl = f.at("verb_logits")->data;
    const auto& bd = f.at("box_deltas")->data;
    for (std::size_t i = 0; i < n; ++i) {
      ProposalRecord& r = records[i];
      r.proposal_box = {boxes[4 * i], boxes[4 * i + 1], boxes[4 * i + 2], boxes[4 * i + 3]};
      r.objectness = objectness.data[i];
      r.quality = f.at("quality")->data[i];
      r.ttc_raw = f.at("ttc_raw")->data[i];
      r.noun_logits.assign(nl.begin() + static_cast<std::ptrdiff_t>(i * n_nouns),
                           nl.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_nouns));
      r.verb_logits.assign(vl.begin() + static_cast<std::ptrdiff_t>(i * n_verbs),
                           vl.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_verbs));
      r.box_deltas.resize(n_nouns);
      for (std::size_t c = 0; c < n_nouns; ++c) {
        for (std::size_t j = 0; j < 4; ++j) r.box_deltas[c][j] = bd[(i * n_nouns + c) * 4 + j];
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return out;
}

void add_proposal_tensors(NamedTensors& tensors, std::span<const ProposalRecord> proposals,
                          std::size_t noun_count, std::size_t verb_count,
                          const std::string& uid_prefix) {
  const std::size_t n = proposals.size();
  auto objectness = FeatureTensor::zeros({n});
  auto quality = FeatureTensor::zeros({n});
  auto ttc_raw = FeatureTensor::zeros({n});
  auto boxes = FeatureTensor::zeros({n, 4});
  auto nouns = FeatureTensor::zeros({n, noun_count});
  auto verbs = FeatureTensor::zeros({n, verb_count});
  auto deltas = FeatureTensor::zeros({n, noun_count, 4});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = proposals[i];
    if (p.noun_logits.size() != noun_count || p.verb_logits.size() != verb_count ||
        p.box_deltas.size() != noun_count) {
      throw ValidationError("add_proposal_tensors: proposal " + std::to_string(i) +
                            " does not match the vocabulary sizes");
    }
    objectness.data[i] = static_cast<float>(p.objectness);
    quality.data[i] = static_cast<float>(p.quality);
    ttc_raw.data[i] = static_cast<float>(p.ttc_raw);
    const std::array<double, 4> corners = {p.proposal_box.x1, p.proposal_box.y1,
                                           p.proposal_box.x2, p.proposal_box.y2};
    for (std::size_t j = 0; j < 4; ++j) boxes.data[4 * i + j] = static_cast<float>(corners[j]);
    for (std::size_t c = 0; c < noun_count; ++c) {
      nouns.data[i * noun_count + c] = static_cast<float>(p.noun_logits[c]);
      for (std::size_t j = 0; j < 4; ++j) {
        deltas.data[(i * noun_count + c) * 4 + j] = static_cast<float>(p.box_deltas[c][j]);
      }
    }
    for (std::size_t v = 0; v < verb_count; ++v) {
      verbs.data[i * verb_count + v] = static_cast<float>(p.verb_logits[v]);
    }
  }
  const std::string pre = uid_prefix.empty() ? "" : uid_prefix + "/";
  tensors[pre + "objectness"] = std::move(objectness);
  tensors[pre + "quality"] = std::move(quality);
  tensors[pre + "ttc_raw"] = std::move(ttc_raw);
  tensors[pre + "proposal_boxes"] = std::move(boxes);
  tensors[pre + "noun_logits"] = std::move(nouns);
  tensors[pre + "verb_logits"] = std::move(verbs);
  tensors[pre + "box_deltas"] = std::move(deltas);
}

}  // namespace sta

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

// Random instance generators shared by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sta/postprocess.hpp"
#include "sta/types.hpp"

namespace sta::testing {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& options) {
  return options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(options.size()) - 1))];
}

struct TinyInstance {
  PredictionSet preds;
  std::vector<GroundTruthInstance> gts;
};

// <= 5 examples, <= 4 noun classes, <= 6 predictions per class. Coordinates,
// scores and ttcs come from small grids so that threshold equalities and
// score ties show up often.
inline TinyInstance random_tiny_instance(Rng& rng) {
  TinyInstance inst;
  const int n_examples = uniform_int(rng, 1, 5);
  const int n_classes = uniform_int(rng, 1, 4);
  const std::vector<double> coords = {0, 5, 10, 15, 20};
  const std::vector<double> sizes = {5, 10, 20};
  const std::vector<double> ttcs = {0.5, 1.0, 1.5};
  const std::vector<double> ttc_offsets = {0.0, 0.1, -0.2, 0.25, 0.3, -0.5};
  const std::vector<double> scores = {0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> shifts = {0.0, 0.0, 1.0, -2.0, 5.0};

  std::vector<std::string> uids;
  for (int e = 0; e < n_examples; ++e) uids.push_back("ex" + std::to_string(e));
  for (const auto& uid : uids) {
    const int n = uniform_int(rng, 0, 2);
    for (int i = 0; i < n; ++i) {
      const double x = pick(rng, coords), y = pick(rng, coords);
      inst.gts.push_back({uid, {x, y, x + pick(rng, sizes), y + pick(rng, sizes)},
                          uniform_int(rng, 0, n_classes - 1), uniform_int(rng, 0, 1),
                          pick(rng, ttcs)});
    }
  }
  for (int c = 0; c < n_classes; ++c) {
    const int n = uniform_int(rng, 0, 6);
    for (int i = 0; i < n; ++i) {
      const std::string& uid = pick(rng, uids);
      StaHypothesis h;
      h.noun_id = c;
      h.verb_id = uniform_int(rng, 0, 1);
      h.score = pick(rng, scores);
      // Anchor most predictions on a ground truth of the same example.
      std::vector<const GroundTruthInstance*> anchors;
      for (const auto& g : inst.gts) {
        if (g.example_uid == uid) anchors.push_back(&g);
      }
      if (!anchors.empty() && uniform_int(rng, 0, 3) > 0) {
        const auto* g = pick(rng, anchors);
        h.box = {g->box.x1 + pick(rng, shifts), g->box.y1 + pick(rng, shifts), g->box.x2,
                 g->box.y2 + pick(rng, shifts)};
        if (h.box.x1 > h.box.x2) std::swap(h.box.x1, h.box.x2);
        if (h.box.y1 > h.box.y2) std::swap(h.box.y1, h.box.y2);
        h.ttc = std::max(0.0, g->ttc + pick(rng, ttc_offsets));
      } else {
        const double x = pick(rng, coords), y = pick(rng, coords);
        h.box = {x, y, x + pick(rng, sizes), y + pick(rng, sizes)};
        h.ttc = pick(rng, ttcs);
      }
      inst.preds.results[uid].push_back(h);
    }
  }
  inst.preds.sort_all();
  return inst;
}

// Hypotheses over a few overlapping boxes and nouns, for NMS and ensemble
// properties.
inline std::vector<StaHypothesis> random_hypotheses(Rng& rng, int max_count = 40, int nouns = 3,
                                                    int verbs = 2) {
  std::vector<StaHypothesis> out;
  const int n = uniform_int(rng, 0, max_count);
  for (int i = 0; i < n; ++i) {
    StaHypothesis h;
    const double x = uniform_real(rng, 0, 80), y = uniform_real(rng, 0, 80);
    h.box = {x, y, x + uniform_real(rng, 5, 40), y + uniform_real(rng, 5, 40)};
    h.noun_id = uniform_int(rng, 0, nouns - 1);
    h.verb_id = uniform_int(rng, 0, verbs - 1);
    h.ttc = uniform_real(rng, 0, 3);
    h.score = uniform_real(rng, 0.01, 1.0);
    out.push_back(h);
  }
  return out;
}

inline ProposalRecord random_proposal(Rng& rng, std::size_t nouns, std::size_t verbs) {
  ProposalRecord p;
  const double x = uniform_real(rng, 0, 600), y = uniform_real(rng, 0, 400);
  p.proposal_box = {x, y, x + uniform_real(rng, 10, 200), y + uniform_real(rng, 10, 200)};
  p.objectness = uniform_real(rng, 0.05, 1.0);
  p.quality = uniform_real(rng, 0.05, 1.0);
  p.ttc_raw = uniform_real(rng, -3, 3);
  for (std::size_t i = 0; i < nouns; ++i) p.noun_logits.push_back(uniform_real(rng, -4, 4));
  for (std::size_t i = 0; i < verbs; ++i) p.verb_logits.push_back(uniform_real(rng, -4, 4));
  for (std::size_t i = 0; i < nouns; ++i) {
    p.box_deltas.push_back({uniform_real(rng, -0.2, 0.2), uniform_real(rng, -0.2, 0.2),
                            uniform_real(rng, -0.3, 0.3), uniform_real(rng, -0.3, 0.3)});
  }
  return p;
}

inline Taxonomy make_taxonomy(std::size_t nouns, std::size_t verbs) {
  Taxonomy t;
  for (std::size_t i = 0; i < nouns; ++i) t.nouns.push_back("noun" + std::to_string(i));
  for (std::size_t i = 0; i < verbs; ++i) t.verbs.push_back("verb" + std::to_string(i));
  return t;
}

}  // namespace sta::testing

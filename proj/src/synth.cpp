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

#include "sta/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sta/errors.hpp"

namespace sta {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
// Streams for perturbation live above the scenario streams.
constexpr std::uint64_t kPerturbStreamBase = 1ULL << 40;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
  return splitmix64(seed_ ^ (stream_ * kGolden) ^ counter_++);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) return 0;
  return std::min(n - 1, static_cast<std::uint64_t>(uniform() * static_cast<double>(n)));
}

Scenario generate_scenario(int n_examples, int n_nouns, int n_verbs, int gts_per_example,
                           std::uint64_t seed) {
  if (n_examples < 1 || n_nouns < 1 || n_verbs < 1 || gts_per_example < 1) {
    throw ValidationError("generate_scenario: all counts must be >= 1");
  }
  Scenario s;
  char name[32];
  for (int i = 0; i < n_nouns; ++i) {
    std::snprintf(name, sizeof name, "noun_%03d", i);
    s.taxonomy.nouns.emplace_back(name);
  }
  for (int i = 0; i < n_verbs; ++i) {
    std::snprintf(name, sizeof name, "verb_%03d", i);
    s.taxonomy.verbs.emplace_back(name);
  }
  s.gts.reserve(static_cast<std::size_t>(n_examples) * static_cast<std::size_t>(gts_per_example));
  for (int e = 0; e < n_examples; ++e) {
    CounterRng rng(seed, static_cast<std::uint64_t>(e));
    std::snprintf(name, sizeof name, "ex_%05d", e);
    for (int g = 0; g < gts_per_example; ++g) {
      GroundTruthInstance gt;
      gt.example_uid = name;
      const double w = rng.uniform(40.0, 480.0);
      const double h = rng.uniform(40.0, 360.0);
      const double x1 = rng.uniform(0.0, kCanvasWidth - w);
      const double y1 = rng.uniform(0.0, kCanvasHeight - h);
      gt.box = {x1, y1, x1 + w, y1 + h};
      gt.noun_id = static_cast<CategoryId>(rng.below(static_cast<std::uint64_t>(n_nouns)));
      gt.verb_id = static_cast<CategoryId>(rng.below(static_cast<std::uint64_t>(n_verbs)));
      gt.ttc = rng.uniform(kMinScenarioTtc, kMaxScenarioTtc);
      s.gts.push_back(std::move(gt));
    }
  }
  return s;
}

void NoiseConfig::validate() const {
  std::vector<std::string> issues;
  for (const auto& [p, label] : {std::pair{label_flip_prob, "label_flip_prob"},
                                 std::pair{verb_flip_prob, "verb_flip_prob"},
                                 std::pair{drop_prob, "drop_prob"}}) {
    if (!(p >= 0.0 && p <= 1.0)) issues.push_back(std::string(label) + " must be in [0, 1]");
  }
  for (const auto& [s, label] : {std::pair{box_jitter_sigma, "box_jitter_sigma"},
                                 std::pair{ttc_noise_sigma, "ttc_noise_sigma"}}) {
    if (!(s >= 0.0) || !std::isfinite(s)) issues.push_back(std::string(label) + " must be >= 0");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

namespace {

CategoryId flip(CounterRng& rng, double prob, CategoryId id, std::size_t vocab, bool& flipped) {
  // Both draws happen unconditionally so every gt consumes the same counters.
  const double u = rng.uniform();
  const auto other = rng.below(vocab > 1 ? vocab - 1 : 1);
  flipped = vocab > 1 && u < prob;
  if (!flipped) return id;
  // Uniform over the vocab - 1 other ids.
  return static_cast<CategoryId>(other >= static_cast<std::uint64_t>(id) ? other + 1 : other);
}

}  // namespace

std::vector<PredictionSet> perturb_to_predictions(std::span<const GroundTruthInstance> gts,
                                                  const Taxonomy& taxonomy,
                                                  const NoiseConfig& noise, int n_sources) {
  noise.validate();
  taxonomy.validate();
  if (n_sources < 1) throw ValidationError("perturb_to_predictions: n_sources must be >= 1");

  std::vector<PredictionSet> out(static_cast<std::size_t>(n_sources));
  for (int s = 0; s < n_sources; ++s) {
    PredictionSet& set = out[static_cast<std::size_t>(s)];
    set.taxonomy = taxonomy;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const GroundTruthInstance& gt = gts[i];
      CounterRng rng(noise.seed,
                     kPerturbStreamBase * static_cast<std::uint64_t>(s + 1) + i);
      const bool dropped = rng.uniform() < noise.drop_prob;
      std::array<double, 4> jitter{};
      for (double& j : jitter) j = noise.box_jitter_sigma * rng.gaussian();
      const double ttc_delta = noise.ttc_noise_sigma * rng.gaussian();
      bool noun_flipped = false, verb_flipped = false;
      const CategoryId noun =
          flip(rng, noise.label_flip_prob, gt.noun_id, taxonomy.noun_count(), noun_flipped);
      const CategoryId verb =
          flip(rng, noise.verb_flip_prob, gt.verb_id, taxonomy.verb_count(), verb_flipped);
      if (dropped) continue;

      double xa = gt.box.x1 + jitter[0], xb = gt.box.x2 + jitter[2];
      double ya = gt.box.y1 + jitter[1], yb = gt.box.y2 + jitter[3];
      StaHypothesis h;
      h.box = {std::min(xa, xb), std::min(ya, yb), std::max(xa, xb), std::max(ya, yb)};
      h.noun_id = noun;
      h.verb_id = verb;
      h.ttc = std::max(0.0, gt.ttc + ttc_delta);
      const double box_err =
          (std::abs(jitter[0]) + std::abs(jitter[1]) + std::abs(jitter[2]) + std::abs(jitter[3])) /
          4.0;
      const double magnitude = box_err / 50.0 + std::abs(h.ttc - gt.ttc) / 0.25 +
                               (noun_flipped ? 0.5 : 0.0) + (verb_flipped ? 0.5 : 0.0);
      h.score = 1.0 / (1.0 + magnitude);
      h.source_id = s;
      set.results[gt.example_uid].push_back(h);
    }
    set.sort_all();
  }
  return out;
}

}  // namespace sta

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

#include <cstdint>
#include <span>
#include <vector>

#include "sta/types.hpp"

namespace sta {

inline constexpr double kCanvasWidth = 1920.0;
inline constexpr double kCanvasHeight = 1080.0;
inline constexpr double kMinScenarioTtc = 0.1;
inline constexpr double kMaxScenarioTtc = 3.0;

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based generator: draw i of stream s under seed k is
/// splitmix64(k ^ (s * 0x9E3779B97F4A7C15) ^ i). Identical across platforms
/// and languages.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  // [0, 1) from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Box-Muller over two consecutive uniforms; one normal per call.
  double gaussian();
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

struct Scenario {
  Taxonomy taxonomy;
  std::vector<GroundTruthInstance> gts;
};

// Example k draws from stream k. Boxes lie in the 1920x1080 canvas, ttc is
// uniform in [0.1, 3.0] s.
Scenario generate_scenario(int n_examples, int n_nouns, int n_verbs, int gts_per_example,
                           std::uint64_t seed);

struct NoiseConfig {
  double box_jitter_sigma = 0.0;  // pixels, per corner
  double label_flip_prob = 0.0;
  double verb_flip_prob = 0.0;
  double ttc_noise_sigma = 0.0;  // seconds
  double drop_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Each source perturbs every ground truth independently and tags its
// predictions with source_id = source index. Undisturbed predictions score
// 1.0; the score falls with the size of the perturbation.
std::vector<PredictionSet> perturb_to_predictions(std::span<const GroundTruthInstance> gts,
                                                  const Taxonomy& taxonomy,
                                                  const NoiseConfig& noise, int n_sources);

}  // namespace sta

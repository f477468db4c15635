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

#include "sta/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sta/errors.hpp"

namespace sta {

SamplingPlan plan_frames(double query_time, int frame_count, double sample_rate) {
  std::vector<std::string> issues;
  if (!std::isfinite(query_time) || query_time < 0.0) {
    issues.push_back("query_time must be finite and >= 0");
  }
  if (frame_count < 1) issues.push_back("frame_count must be >= 1");
  if (!std::isfinite(sample_rate) || sample_rate <= 0.0) {
    issues.push_back("sample_rate must be finite and > 0");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  SamplingPlan plan;
  plan.query_time = query_time;
  plan.sample_rate = sample_rate;
  plan.frame_count = frame_count;
  plan.frame_times.reserve(static_cast<std::size_t>(frame_count));
  for (int k = 0; k < frame_count; ++k) {
    const double steps_back = static_cast<double>(frame_count - 1 - k);
    plan.frame_times.push_back(std::max(0.0, query_time - steps_back / sample_rate));
  }
  return plan;
}

}  // namespace sta

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

#include <vector>

namespace sta {

inline constexpr int kClipFrameCount = 8;
inline constexpr double kClipSampleRate = 2.0;  // frames per second
inline constexpr int kClipShortSide = 384;
inline constexpr int kTrainShortSideMin = 640;
inline constexpr int kTrainShortSideMax = 800;
inline constexpr int kInferenceShortSide = 800;

struct SamplingPlan {
  double query_time = 0.0;
  std::vector<double> frame_times;  // ascending, last entry == query_time
  double sample_rate = kClipSampleRate;
  int frame_count = kClipFrameCount;
  int short_side = kClipShortSide;  // metadata only
};

// Observed-frame timestamps for a clip ending exactly at `query_time`.
// Frame k sits at max(0, query_time - (frame_count - 1 - k) / sample_rate);
// times before stream start clamp to 0, duplicating the first frame.
SamplingPlan plan_frames(double query_time, int frame_count = kClipFrameCount,
                         double sample_rate = kClipSampleRate);

}  // namespace sta

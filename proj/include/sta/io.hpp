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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sta/evaluation.hpp"
#include "sta/tensor.hpp"
#include "sta/types.hpp"

namespace sta {

inline constexpr std::string_view kChallengeName = "ego4d_sta";
inline constexpr std::string_view kSubmissionVersion = "1.0";
inline constexpr std::uint32_t kTensorFormatVersion = 1;
inline constexpr std::size_t kMaxExportsPerExample = 100;

// Non-fatal findings, e.g. unknown fields that were skipped.
struct Diagnostics {
  std::vector<std::string> warnings;
};

struct GroundTruthDocument {
  Taxonomy taxonomy;
  std::vector<GroundTruthInstance> annotations;
  // Set when the taxonomy was referenced by path; written back the same way.
  std::optional<std::string> taxonomy_path;

  bool operator==(const GroundTruthDocument&) const = default;
};

struct SubmissionDocument {
  std::string version{kSubmissionVersion};
  PredictionSet predictions;
  nlohmann::json provenance;  // null when absent

  bool operator==(const SubmissionDocument&) const = default;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Parses JSON, turning syntax errors into ValidationError with line:column.
nlohmann::json parse_json(std::string_view text, const std::string& origin);

Taxonomy taxonomy_from_json(const nlohmann::json& j);
nlohmann::json taxonomy_to_json(const Taxonomy& taxonomy);
Taxonomy load_taxonomy(const std::filesystem::path& path);
void write_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path);

// `base_dir` resolves a relative "taxonomy_path".
GroundTruthDocument parse_ground_truth(std::string_view text, const std::string& origin,
                                       const std::filesystem::path& base_dir,
                                       Diagnostics* diag = nullptr);
GroundTruthDocument load_ground_truth(const std::filesystem::path& path,
                                      Diagnostics* diag = nullptr);
std::string dump_ground_truth(const GroundTruthDocument& doc);
void write_ground_truth(const GroundTruthDocument& doc, const std::filesystem::path& path);

// Lists are re-sorted canonically on load. Lists longer than
// `max_per_example` are rejected.
SubmissionDocument parse_submission(std::string_view text, const std::string& origin,
                                    Diagnostics* diag = nullptr,
                                    std::size_t max_per_example = kMaxExportsPerExample);
SubmissionDocument load_submission(const std::filesystem::path& path,
                                   Diagnostics* diag = nullptr,
                                   std::size_t max_per_example = kMaxExportsPerExample);
PredictionSet load_predictions(const std::filesystem::path& path, Diagnostics* diag = nullptr);
std::string dump_submission(const SubmissionDocument& doc);
void write_submission(const SubmissionDocument& doc, const std::filesystem::path& path);
void write_submission(const PredictionSet& preds, const std::filesystem::path& path);

// Binary tensor container, all integers little-endian:
//   "VSTF" | u32 version | u32 count |
//   count x ( u32 name_len | name bytes | u32 rank | u64 dims[rank] | f32 data[] )
std::string encode_tensors(const NamedTensors& tensors);
NamedTensors decode_tensors(std::string_view bytes);
NamedTensors read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const NamedTensors& tensors, const std::filesystem::path& path);

nlohmann::json report_to_json(const EvalReport& report, const EvalConfig& cfg);

}  // namespace sta

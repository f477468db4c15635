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
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sta {

using RowMatrixXf =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense row-major float32 array standing in for cached backbone features and
/// head outputs.
struct FeatureTensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  FeatureTensor() = default;
  FeatureTensor(std::vector<std::size_t> shape, std::vector<float> data);

  static FeatureTensor zeros(std::vector<std::size_t> shape);
  static FeatureTensor from_matrix(const Eigen::Ref<const RowMatrixXf>& m);
  static FeatureTensor from_vector(const Eigen::Ref<const Eigen::VectorXf>& v);

  std::size_t rank() const { return shape.size(); }
  std::size_t numel() const;
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }

  // Shape/data consistency and finiteness; throws ValidationError.
  void validate(const std::string& name = "tensor") const;

  // View as rows x cols where rows = shape[0] and cols = product of the rest.
  // A rank-1 tensor is a single row.
  Eigen::Map<const RowMatrixXf> as_matrix() const;
  Eigen::Map<const Eigen::VectorXf> as_vector() const;

  bool operator==(const FeatureTensor&) const = default;
};

using NamedTensors = std::map<std::string, FeatureTensor>;

// Product of dims; throws ValidationError on size_t overflow.
std::size_t checked_numel(const std::vector<std::size_t>& shape);

}  // namespace sta

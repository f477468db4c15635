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

#include "sta/tensor.hpp"

#include <cmath>
#include <limits>

#include "sta/errors.hpp"

namespace sta {

std::size_t checked_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      throw ValidationError("tensor shape overflows size_t");
    }
    n *= d;
  }
  return n;
}

FeatureTensor::FeatureTensor(std::vector<std::size_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
  validate();
}

FeatureTensor FeatureTensor::zeros(std::vector<std::size_t> s) {
  FeatureTensor t;
  t.data.assign(checked_numel(s), 0.0f);
  t.shape = std::move(s);
  return t;
}

FeatureTensor FeatureTensor::from_matrix(const Eigen::Ref<const RowMatrixXf>& m) {
  FeatureTensor t = zeros({static_cast<std::size_t>(m.rows()),
                           static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrixXf>(t.data.data(), m.rows(), m.cols()) = m;
  return t;
}

FeatureTensor FeatureTensor::from_vector(const Eigen::Ref<const Eigen::VectorXf>& v) {
  FeatureTensor t = zeros({static_cast<std::size_t>(v.size())});
  Eigen::Map<Eigen::VectorXf>(t.data.data(), v.size()) = v;
  return t;
}

std::size_t FeatureTensor::numel() const { return checked_numel(shape); }

void FeatureTensor::validate(const std::string& name) const {
  if (numel() != data.size()) {
    throw ValidationError(name + ": shape product " + std::to_string(numel()) +
                          " does not match data length " +
                          std::to_string(data.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValidationError(name + ": non-finite value at flat index " +
                            std::to_string(i));
    }
  }
}

Eigen::Map<const RowMatrixXf> FeatureTensor::as_matrix() const {
  if (shape.empty()) return {data.data(), 1, static_cast<Eigen::Index>(data.size())};
  if (shape.size() == 1) return {data.data(), 1, static_cast<Eigen::Index>(shape[0])};
  std::size_t cols = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) cols *= shape[i];
  return {data.data(), static_cast<Eigen::Index>(shape[0]),
          static_cast<Eigen::Index>(cols)};
}

Eigen::Map<const Eigen::VectorXf> FeatureTensor::as_vector() const {
  return {data.data(), static_cast<Eigen::Index>(data.size())};
}

}  // namespace sta

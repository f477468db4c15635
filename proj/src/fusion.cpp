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

#include "sta/fusion.hpp"

namespace sta {
namespace {

const FeatureTensor* find(const NamedTensors& bundle, const std::string& name,
                          std::vector<std::string>& missing) {
  const auto it = bundle.find(name);
  if (it == bundle.end()) {
    missing.push_back("missing tensor '" + name + "'");
    return nullptr;
  }
  return &it->second;
}

Eigen::MatrixXf to_matrix(const FeatureTensor* t, const std::string& name) {
  if (t == nullptr) return {};
  if (t->rank() != 2) throw ValidationError(name + ": expected a rank-2 tensor");
  t->validate(name);
  return t->as_matrix();
}

Eigen::VectorXf to_vector(const FeatureTensor* t, const std::string& name) {
  if (t == nullptr) return {};
  if (t->rank() != 1) throw ValidationError(name + ": expected a rank-1 tensor");
  t->validate(name);
  return t->as_vector();
}

void throw_if_missing(std::vector<std::string>& missing) {
  if (!missing.empty()) throw ValidationError(std::move(missing));
}

FeatureTensor matrix_tensor(const Eigen::MatrixXf& m) {
  return FeatureTensor::from_matrix(m);
}

}  // namespace

ProbeOutput<float> attentive_probe(const FeatureTensor& seq,
                                   const ProbeParams<float>& params) {
  if (seq.rank() != 2) throw ValidationError("attentive_probe: sequence must be [T, D]");
  seq.validate("sequence");
  const Eigen::MatrixXf rows = seq.as_matrix();
  return attentive_probe(rows, params);
}

FeatureTensor film_modulate(const FeatureTensor& x, const Eigen::VectorXf& token,
                            const FilmParams<float>& params) {
  if (x.rank() != 3) throw ValidationError("film_modulate: features must be [C, H, W]");
  x.validate("features");
  const Eigen::MatrixXf channels = x.as_matrix();
  const Eigen::MatrixXf out = film_modulate(channels, token, params);
  FeatureTensor result = FeatureTensor::zeros(x.shape);
  Eigen::Map<RowMatrixXf>(result.data.data(), out.rows(), out.cols()) = out;
  return result;
}

std::vector<FeatureTensor> film_modulate_levels(std::span<const FeatureTensor> levels,
                                                const Eigen::VectorXf& token,
                                                std::span<const FilmParams<float>> params) {
  if (params.size() != 1 && params.size() != levels.size()) {
    throw ValidationError("film_modulate_levels: need one shared parameter set or one per level");
  }
  std::vector<FeatureTensor> out;
  out.reserve(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    out.push_back(film_modulate(levels[i], token, params.size() == 1 ? params[0] : params[i]));
  }
  return out;
}

FeatureTensor roi_context_fuse(const FeatureTensor& rois, const Eigen::VectorXf& token,
                               const ContextMlpParams<float>& params) {
  if (rois.rank() != 2) throw ValidationError("roi_context_fuse: rois must be [R, D_roi]");
  rois.validate("rois");
  const Eigen::MatrixXf m = rois.as_matrix();
  return FeatureTensor::from_matrix(roi_context_fuse_batch(m, token, params));
}

ProbeParams<float> probe_params_from_tensors(const NamedTensors& bundle,
                                             const std::string& prefix) {
  std::vector<std::string> missing;
  const auto* key = find(bundle, prefix + "key_proj", missing);
  const auto* value = find(bundle, prefix + "value_proj", missing);
  const auto* query = find(bundle, prefix + "query", missing);
  throw_if_missing(missing);
  return {to_matrix(key, prefix + "key_proj"), to_matrix(value, prefix + "value_proj"),
          to_vector(query, prefix + "query")};
}

FilmParams<float> film_params_from_tensors(const NamedTensors& bundle,
                                           const std::string& prefix) {
  std::vector<std::string> missing;
  const auto* gp = find(bundle, prefix + "gamma_proj", missing);
  const auto* gb = find(bundle, prefix + "gamma_bias", missing);
  const auto* bp = find(bundle, prefix + "beta_proj", missing);
  const auto* bb = find(bundle, prefix + "beta_bias", missing);
  throw_if_missing(missing);
  FilmParams<float> p{to_matrix(gp, prefix + "gamma_proj"), to_vector(gb, prefix + "gamma_bias"),
                      to_matrix(bp, prefix + "beta_proj"), to_vector(bb, prefix + "beta_bias")};
  validate_film_params(p);
  return p;
}

ContextMlpParams<float> context_params_from_tensors(const NamedTensors& bundle,
                                                    const std::string& prefix) {
  std::vector<std::string> missing;
  const auto* tp = find(bundle, prefix + "token_proj", missing);
  const auto* tb = find(bundle, prefix + "token_bias", missing);
  const auto* l1 = find(bundle, prefix + "layer1", missing);
  const auto* b1 = find(bundle, prefix + "layer1_bias", missing);
  const auto* l2 = find(bundle, prefix + "layer2", missing);
  const auto* b2 = find(bundle, prefix + "layer2_bias", missing);
  throw_if_missing(missing);
  ContextMlpParams<float> p{to_matrix(tp, prefix + "token_proj"),
                            to_vector(tb, prefix + "token_bias"),
                            to_matrix(l1, prefix + "layer1"),
                            to_vector(b1, prefix + "layer1_bias"),
                            to_matrix(l2, prefix + "layer2"),
                            to_vector(b2, prefix + "layer2_bias")};
  validate_context_params(p);
  return p;
}

void add_probe_params(NamedTensors& bundle, const ProbeParams<float>& p,
                      const std::string& prefix) {
  bundle[prefix + "key_proj"] = matrix_tensor(p.key_proj);
  bundle[prefix + "value_proj"] = matrix_tensor(p.value_proj);
  bundle[prefix + "query"] = FeatureTensor::from_vector(p.query);
}

void add_film_params(NamedTensors& bundle, const FilmParams<float>& p,
                     const std::string& prefix) {
  bundle[prefix + "gamma_proj"] = matrix_tensor(p.gamma_proj);
  bundle[prefix + "gamma_bias"] = FeatureTensor::from_vector(p.gamma_bias);
  bundle[prefix + "beta_proj"] = matrix_tensor(p.beta_proj);
  bundle[prefix + "beta_bias"] = FeatureTensor::from_vector(p.beta_bias);
}

void add_context_params(NamedTensors& bundle, const ContextMlpParams<float>& p,
                        const std::string& prefix) {
  bundle[prefix + "token_proj"] = matrix_tensor(p.token_proj);
  bundle[prefix + "token_bias"] = FeatureTensor::from_vector(p.token_bias);
  bundle[prefix + "layer1"] = matrix_tensor(p.layer1);
  bundle[prefix + "layer1_bias"] = FeatureTensor::from_vector(p.layer1_bias);
  bundle[prefix + "layer2"] = matrix_tensor(p.layer2);
  bundle[prefix + "layer2_bias"] = FeatureTensor::from_vector(p.layer2_bias);
}

}  // namespace sta

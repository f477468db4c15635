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

// Forward-only kernels for injecting a temporal context token into detector
// features: attention pooling of a cached feature sequence, feature-wise
// (FiLM) modulation of FPN maps, and residual ROI context fusion.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sta/errors.hpp"
#include "sta/tensor.hpp"

namespace sta {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
  require(m.allFinite(), what + " contains non-finite values");
}

}  // namespace detail

/// Single-query, single-head attention pooling parameters.
///   key_proj:   D_in x D_att
///   value_proj: D_in x D_out
///   query:      D_att
template <typename Scalar>
struct ProbeParams {
  MatrixX<Scalar> key_proj;
  MatrixX<Scalar> value_proj;
  VectorX<Scalar> query;

  Eigen::Index input_dim() const { return key_proj.rows(); }
  Eigen::Index attention_dim() const { return key_proj.cols(); }
  Eigen::Index output_dim() const { return value_proj.cols(); }
};

template <typename Scalar>
struct ProbeOutput {
  VectorX<Scalar> token;    // D_out
  VectorX<Scalar> weights;  // T, non-negative, sums to 1
};

/// Summarizes a T x D_in sequence into one D_out token:
///   weights = softmax_t((seq[t] * key_proj) . query / sqrt(D_att))
///   token   = sum_t weights[t] * (seq[t] * value_proj)
/// No positional term, so the result is invariant to row order.
template <typename Derived>
ProbeOutput<typename Derived::Scalar> attentive_probe(
    const Eigen::MatrixBase<Derived>& seq,
    const ProbeParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  detail::require(seq.rows() >= 1, "attentive_probe: sequence must have T >= 1");
  detail::require(params.attention_dim() >= 1, "attentive_probe: D_att must be >= 1");
  detail::require(seq.cols() == params.input_dim(),
                  "attentive_probe: sequence width " + std::to_string(seq.cols()) +
                      " != key_proj rows " + std::to_string(params.input_dim()));
  detail::require(params.value_proj.rows() == params.input_dim(),
                  "attentive_probe: value_proj rows must equal D_in");
  detail::require(params.query.size() == params.attention_dim(),
                  "attentive_probe: query length must equal D_att");
  detail::require_finite(seq, "attentive_probe: sequence");
  detail::require_finite(params.key_proj, "attentive_probe: key_proj");
  detail::require_finite(params.value_proj, "attentive_probe: value_proj");
  detail::require_finite(params.query, "attentive_probe: query");

  const MatrixX<Scalar> keys = seq * params.key_proj;
  VectorX<Scalar> logits =
      (keys * params.query) / std::sqrt(static_cast<Scalar>(params.attention_dim()));
  const Scalar peak = logits.maxCoeff();
  VectorX<Scalar> weights = (logits.array() - peak).exp().matrix();
  weights /= weights.sum();

  ProbeOutput<Scalar> out;
  out.token = (seq * params.value_proj).transpose() * weights;
  out.weights = std::move(weights);
  return out;
}

/// FiLM projection from a D_token conditioning vector to C channels.
///   gamma = token * gamma_proj + gamma_bias
///   beta  = token * beta_proj  + beta_bias
template <typename Scalar>
struct FilmParams {
  MatrixX<Scalar> gamma_proj;  // D_token x C
  VectorX<Scalar> gamma_bias;  // C
  MatrixX<Scalar> beta_proj;   // D_token x C
  VectorX<Scalar> beta_bias;   // C

  Eigen::Index token_dim() const { return gamma_proj.rows(); }
  Eigen::Index channels() const { return gamma_proj.cols(); }

  // gamma == 1 and beta == 0 for every token.
  static FilmParams identity(Eigen::Index token_dim, Eigen::Index channels) {
    FilmParams p;
    p.gamma_proj = MatrixX<Scalar>::Zero(token_dim, channels);
    p.gamma_bias = VectorX<Scalar>::Ones(channels);
    p.beta_proj = MatrixX<Scalar>::Zero(token_dim, channels);
    p.beta_bias = VectorX<Scalar>::Zero(channels);
    return p;
  }
};

template <typename Scalar>
void validate_film_params(const FilmParams<Scalar>& p) {
  const auto c = p.channels();
  detail::require(p.gamma_bias.size() == c && p.beta_bias.size() == c &&
                      p.beta_proj.rows() == p.token_dim() && p.beta_proj.cols() == c,
                  "film: inconsistent parameter dimensions");
  detail::require_finite(p.gamma_proj, "film: gamma_proj");
  detail::require_finite(p.gamma_bias, "film: gamma_bias");
  detail::require_finite(p.beta_proj, "film: beta_proj");
  detail::require_finite(p.beta_bias, "film: beta_bias");
}

/// Per-channel scale and shift. `x` holds one channel per row, spatial
/// positions flattened along columns (C x H*W).
template <typename Derived, typename TokenDerived>
MatrixX<typename Derived::Scalar> film_modulate(
    const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<TokenDerived>& token,
    const FilmParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  validate_film_params(params);
  detail::require(x.rows() == params.channels(),
                  "film_modulate: feature channels " + std::to_string(x.rows()) +
                      " != parameter channels " + std::to_string(params.channels()));
  detail::require(token.size() == params.token_dim(),
                  "film_modulate: token length must equal D_token");
  detail::require_finite(x, "film_modulate: features");
  detail::require_finite(token, "film_modulate: token");

  const VectorX<Scalar> t = token;
  const VectorX<Scalar> gamma = params.gamma_proj.transpose() * t + params.gamma_bias;
  const VectorX<Scalar> beta = params.beta_proj.transpose() * t + params.beta_bias;
  MatrixX<Scalar> out = (x.array().colwise() * gamma.array()).matrix();
  out.array().colwise() += beta.array();
  return out;
}

/// Two-layer ReLU MLP producing a residual for an ROI feature:
///   ctx = token * token_proj + token_bias                   (D_proj)
///   out = roi + layer2(relu(layer1([roi, ctx])))            (D_roi)
template <typename Scalar>
struct ContextMlpParams {
  MatrixX<Scalar> token_proj;   // D_token x D_proj
  VectorX<Scalar> token_bias;   // D_proj
  MatrixX<Scalar> layer1;       // (D_roi + D_proj) x H
  VectorX<Scalar> layer1_bias;  // H
  MatrixX<Scalar> layer2;       // H x D_roi
  VectorX<Scalar> layer2_bias;  // D_roi

  Eigen::Index token_dim() const { return token_proj.rows(); }
  Eigen::Index projected_dim() const { return token_proj.cols(); }
  Eigen::Index hidden_dim() const { return layer1.cols(); }
  Eigen::Index roi_dim() const { return layer2.cols(); }
};

template <typename Scalar>
void validate_context_params(const ContextMlpParams<Scalar>& p) {
  detail::require(p.hidden_dim() >= 1, "context mlp: hidden width must be >= 1");
  detail::require(p.token_bias.size() == p.projected_dim(),
                  "context mlp: token_bias length must equal D_proj");
  detail::require(p.layer1.rows() == p.roi_dim() + p.projected_dim(),
                  "context mlp: layer1 rows must equal D_roi + D_proj");
  detail::require(p.layer1_bias.size() == p.hidden_dim(),
                  "context mlp: layer1_bias length must equal H");
  detail::require(p.layer2.rows() == p.hidden_dim(),
                  "context mlp: layer2 rows must equal H");
  detail::require(p.layer2_bias.size() == p.roi_dim(),
                  "context mlp: layer2_bias length must equal D_roi");
  detail::require_finite(p.token_proj, "context mlp: token_proj");
  detail::require_finite(p.token_bias, "context mlp: token_bias");
  detail::require_finite(p.layer1, "context mlp: layer1");
  detail::require_finite(p.layer1_bias, "context mlp: layer1_bias");
  detail::require_finite(p.layer2, "context mlp: layer2");
  detail::require_finite(p.layer2_bias, "context mlp: layer2_bias");
}

/// Fuses every row of `rois` (R x D_roi) with the same token. The projected
/// token is computed once.
template <typename Derived, typename TokenDerived>
MatrixX<typename Derived::Scalar> roi_context_fuse_batch(
    const Eigen::MatrixBase<Derived>& rois, const Eigen::MatrixBase<TokenDerived>& token,
    const ContextMlpParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  validate_context_params(params);
  detail::require(rois.cols() == params.roi_dim(),
                  "roi_context_fuse: roi width " + std::to_string(rois.cols()) +
                      " != D_roi " + std::to_string(params.roi_dim()));
  detail::require(token.size() == params.token_dim(),
                  "roi_context_fuse: token length must equal D_token");
  detail::require_finite(rois, "roi_context_fuse: roi");
  detail::require_finite(token, "roi_context_fuse: token");

  const VectorX<Scalar> t = token;
  const VectorX<Scalar> ctx = params.token_proj.transpose() * t + params.token_bias;
  const Eigen::Index d_roi = params.roi_dim();

  // [roi, ctx] * layer1 == roi * layer1[:D_roi] + ctx * layer1[D_roi:]
  const auto w_roi = params.layer1.topRows(d_roi);
  const auto w_ctx = params.layer1.bottomRows(params.projected_dim());
  const VectorX<Scalar> ctx_term = w_ctx.transpose() * ctx + params.layer1_bias;

  MatrixX<Scalar> hidden = rois * w_roi;
  hidden.rowwise() += ctx_term.transpose();
  hidden = hidden.cwiseMax(Scalar(0));

  MatrixX<Scalar> residual = hidden * params.layer2;
  residual.rowwise() += params.layer2_bias.transpose();
  return rois + residual;
}

template <typename Derived, typename TokenDerived>
VectorX<typename Derived::Scalar> roi_context_fuse(
    const Eigen::MatrixBase<Derived>& roi, const Eigen::MatrixBase<TokenDerived>& token,
    const ContextMlpParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  const MatrixX<Scalar> row = roi.derived().transpose();
  return roi_context_fuse_batch(row, token, params).row(0).transpose();
}

// FeatureTensor front-ends used by the CLI and file-driven pipelines. The
// tensor overloads run in float32.

// seq: [T, D_in]
ProbeOutput<float> attentive_probe(const FeatureTensor& seq,
                                   const ProbeParams<float>& params);

// x: [C, H, W]
FeatureTensor film_modulate(const FeatureTensor& x, const Eigen::VectorXf& token,
                            const FilmParams<float>& params);

// Modulates each FPN level. `params` holds either one shared set or one set
// per level.
std::vector<FeatureTensor> film_modulate_levels(std::span<const FeatureTensor> levels,
                                                const Eigen::VectorXf& token,
                                                std::span<const FilmParams<float>> params);

// rois: [R, D_roi]
FeatureTensor roi_context_fuse(const FeatureTensor& rois, const Eigen::VectorXf& token,
                               const ContextMlpParams<float>& params);

// Parameter bundles stored as named tensors: "<prefix>key_proj", ... Missing
// names are reported together.
ProbeParams<float> probe_params_from_tensors(const NamedTensors& bundle,
                                             const std::string& prefix = "probe.");
FilmParams<float> film_params_from_tensors(const NamedTensors& bundle,
                                           const std::string& prefix = "film.");
ContextMlpParams<float> context_params_from_tensors(const NamedTensors& bundle,
                                                    const std::string& prefix = "ctx.");

void add_probe_params(NamedTensors& bundle, const ProbeParams<float>& p,
                      const std::string& prefix = "probe.");
void add_film_params(NamedTensors& bundle, const FilmParams<float>& p,
                     const std::string& prefix = "film.");
void add_context_params(NamedTensors& bundle, const ContextMlpParams<float>& p,
                        const std::string& prefix = "ctx.");

}  // namespace sta

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

// Scalar-loop recomputations of the fusion kernels. Inputs are read element by
// element; no Eigen arithmetic is used.

#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace sta::oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct ProbeResult {
  std::vector<double> token;
  std::vector<double> weights;
};

inline ProbeResult probe_loop(const Mat& seq, const Mat& key, const Mat& value, const Vec& query) {
  const long T = seq.rows(), D = seq.cols(), A = key.cols(), O = value.cols();
  std::vector<double> logits(static_cast<std::size_t>(T));
  for (long t = 0; t < T; ++t) {
    double acc = 0.0;
    for (long a = 0; a < A; ++a) {
      double k = 0.0;
      for (long d = 0; d < D; ++d) k += seq(t, d) * key(d, a);
      acc += k * query(a);
    }
    logits[static_cast<std::size_t>(t)] = acc / std::sqrt(static_cast<double>(A));
  }
  double peak = logits[0];
  for (double l : logits) peak = l > peak ? l : peak;
  ProbeResult r;
  double total = 0.0;
  for (double l : logits) {
    r.weights.push_back(std::exp(l - peak));
    total += r.weights.back();
  }
  for (double& w : r.weights) w /= total;
  r.token.assign(static_cast<std::size_t>(O), 0.0);
  for (long t = 0; t < T; ++t) {
    for (long o = 0; o < O; ++o) {
      double v = 0.0;
      for (long d = 0; d < D; ++d) v += seq(t, d) * value(d, o);
      r.token[static_cast<std::size_t>(o)] += r.weights[static_cast<std::size_t>(t)] * v;
    }
  }
  return r;
}

// x is C rows of flattened spatial positions.
inline Mat film_loop(const Mat& x, const Vec& token, const Mat& gp, const Vec& gb, const Mat& bp,
                     const Vec& bb) {
  Mat out(x.rows(), x.cols());
  for (long c = 0; c < x.rows(); ++c) {
    double gamma = gb(c), beta = bb(c);
    for (long i = 0; i < token.size(); ++i) {
      gamma += token(i) * gp(i, c);
      beta += token(i) * bp(i, c);
    }
    for (long s = 0; s < x.cols(); ++s) out(c, s) = gamma * x(c, s) + beta;
  }
  return out;
}

inline std::vector<double> roi_loop(const Vec& roi, const Vec& token, const Mat& tp, const Vec& tb,
                                    const Mat& l1, const Vec& b1, const Mat& l2, const Vec& b2) {
  std::vector<double> concat;
  for (long i = 0; i < roi.size(); ++i) concat.push_back(roi(i));
  for (long p = 0; p < tp.cols(); ++p) {
    double v = tb(p);
    for (long i = 0; i < token.size(); ++i) v += token(i) * tp(i, p);
    concat.push_back(v);
  }
  std::vector<double> hidden(static_cast<std::size_t>(l1.cols()));
  for (long h = 0; h < l1.cols(); ++h) {
    double v = b1(h);
    for (std::size_t i = 0; i < concat.size(); ++i) v += concat[i] * l1(static_cast<long>(i), h);
    hidden[static_cast<std::size_t>(h)] = v > 0.0 ? v : 0.0;
  }
  std::vector<double> out(static_cast<std::size_t>(roi.size()));
  for (long o = 0; o < roi.size(); ++o) {
    double v = b2(o);
    for (long h = 0; h < l2.rows(); ++h) v += hidden[static_cast<std::size_t>(h)] * l2(h, o);
    out[static_cast<std::size_t>(o)] = roi(o) + v;
  }
  return out;
}

}  // namespace sta::oracle

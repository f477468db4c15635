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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "fusion_oracle.hpp"
#include "sta/fusion.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(sta::testing::Rng& rng, long rows, long cols, double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = scale * sta::testing::uniform_real(rng, -1, 1);
  return m;
}

VectorXd random_vector(sta::testing::Rng& rng, long n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

sta::ProbeParams<double> random_probe(sta::testing::Rng& rng, long d_in, long d_att, long d_out) {
  return {random_matrix(rng, d_in, d_att), random_matrix(rng, d_in, d_out),
          random_vector(rng, d_att)};
}

sta::ContextMlpParams<double> random_context(sta::testing::Rng& rng, long d_roi, long d_tok,
                                             long d_proj, long hidden) {
  return {random_matrix(rng, d_tok, d_proj), random_vector(rng, d_proj),
          random_matrix(rng, d_roi + d_proj, hidden), random_vector(rng, hidden),
          random_matrix(rng, hidden, d_roi), random_vector(rng, d_roi)};
}

}  // namespace

TEST_CASE("probe over a single frame returns its value projection") {
  sta::testing::Rng rng(1);
  const auto params = random_probe(rng, 4, 3, 5);
  const MatrixXd seq = random_matrix(rng, 1, 4);
  const auto out = sta::attentive_probe(seq, params);
  CHECK(out.weights.size() == 1);
  CHECK(out.weights(0) == 1.0);
  const VectorXd expected = (seq * params.value_proj).transpose();
  CHECK((out.token - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("identical rows get uniform weights") {
  sta::testing::Rng rng(2);
  const auto params = random_probe(rng, 3, 2, 2);
  const MatrixXd row = random_matrix(rng, 1, 3);
  const MatrixXd seq = row.replicate(6, 1);
  const auto out = sta::attentive_probe(seq, params);
  for (long t = 0; t < 6; ++t) CHECK(out.weights(t) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("probe matches a hand-unrolled T=3, D=2 case") {
  sta::testing::Rng rng(3);
  const auto params = random_probe(rng, 2, 2, 2);
  const MatrixXd seq = random_matrix(rng, 3, 2);
  const auto out = sta::attentive_probe(seq, params);
  const auto ref = sta::oracle::probe_loop(seq, params.key_proj, params.value_proj, params.query);
  for (int i = 0; i < 3; ++i) CHECK(out.weights(i) == doctest::Approx(ref.weights[i]).epsilon(1e-13));
  for (int i = 0; i < 2; ++i) CHECK(out.token(i) == doctest::Approx(ref.token[i]).epsilon(1e-13));
}

TEST_CASE("probe weights are a distribution and ignore row order") {
  sta::testing::Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const long T = sta::testing::uniform_int(rng, 1, 12), D = sta::testing::uniform_int(rng, 1, 8);
    const long A = sta::testing::uniform_int(rng, 1, 6), O = sta::testing::uniform_int(rng, 1, 6);
    const auto params = random_probe(rng, D, A, O);
    const MatrixXd seq = random_matrix(rng, T, D, 3.0);
    const auto out = sta::attentive_probe(seq, params);
    CHECK((out.weights.array() >= 0.0).all());
    CHECK(std::abs(out.weights.sum() - 1.0) < 1e-12);

    std::vector<long> order(static_cast<std::size_t>(T));
    std::iota(order.begin(), order.end(), 0L);
    std::shuffle(order.begin(), order.end(), rng);
    MatrixXd shuffled(T, D);
    for (long t = 0; t < T; ++t) shuffled.row(t) = seq.row(order[static_cast<std::size_t>(t)]);
    const auto permuted = sta::attentive_probe(shuffled, params);
    CHECK((permuted.token - out.token).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("probe dimension and finiteness errors") {
  sta::testing::Rng rng(5);
  const auto params = random_probe(rng, 4, 3, 2);
  CHECK_THROWS_AS(sta::attentive_probe(random_matrix(rng, 2, 3), params), sta::ValidationError);
  CHECK_THROWS_AS(sta::attentive_probe(MatrixXd(0, 4), params), sta::ValidationError);
  MatrixXd bad = random_matrix(rng, 2, 4);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(sta::attentive_probe(bad, params), sta::ValidationError);
}

TEST_CASE("film identity parameters are an exact no-op") {
  sta::testing::Rng rng(6);
  const MatrixXd x = random_matrix(rng, 4, 9, 10.0);
  const VectorXd token = random_vector(rng, 7, 5.0);
  const auto out = sta::film_modulate(x, token, sta::FilmParams<double>::identity(7, 4));
  CHECK(out == x);
}

TEST_CASE("film with zero scale yields the bias per channel") {
  sta::testing::Rng rng(7);
  auto params = sta::FilmParams<double>::identity(3, 2);
  params.gamma_bias.setZero();
  params.beta_bias << 2.5, -1.0;
  const auto out = sta::film_modulate(random_matrix(rng, 2, 6), random_vector(rng, 3), params);
  CHECK((out.row(0).array() == 2.5).all());
  CHECK((out.row(1).array() == -1.0).all());
}

TEST_CASE("film matches an elementwise recomputation on 2x2x2") {
  sta::testing::Rng rng(8);
  const sta::FilmParams<double> p{random_matrix(rng, 3, 2), random_vector(rng, 2),
                                  random_matrix(rng, 3, 2), random_vector(rng, 2)};
  const MatrixXd x = random_matrix(rng, 2, 4);
  const VectorXd token = random_vector(rng, 3);
  const auto out = sta::film_modulate(x, token, p);
  const auto ref =
      sta::oracle::film_loop(x, token, p.gamma_proj, p.gamma_bias, p.beta_proj, p.beta_bias);
  CHECK((out - ref).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("film is linear in the features for a fixed token") {
  sta::testing::Rng rng(9);
  const sta::FilmParams<double> p{random_matrix(rng, 3, 4), random_vector(rng, 4),
                                  random_matrix(rng, 3, 4), random_vector(rng, 4)};
  const VectorXd token = random_vector(rng, 3);
  const MatrixXd a = random_matrix(rng, 4, 5), b = random_matrix(rng, 4, 5);
  const double s = 0.7;
  const MatrixXd zero = MatrixXd::Zero(4, 5);
  const MatrixXd lhs = sta::film_modulate(MatrixXd(s * a + b), token, p);
  const MatrixXd f0 = sta::film_modulate(zero, token, p);
  // f(x) = g*x + beta, so f(sa + b) - f(0) = s(f(a) - f(0)) + (f(b) - f(0)).
  const MatrixXd rhs = s * (sta::film_modulate(a, token, p) - f0) +
                       (sta::film_modulate(b, token, p) - f0) + f0;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("film tensor front end and per-level parameters") {
  sta::testing::Rng rng(10);
  const auto level = [&](std::size_t h, std::size_t w) {
    auto t = sta::FeatureTensor::zeros({3, h, w});
    for (float& v : t.data) v = static_cast<float>(sta::testing::uniform_real(rng, -2, 2));
    return t;
  };
  const std::vector<sta::FeatureTensor> levels = {level(4, 4), level(2, 2)};
  const Eigen::VectorXf token = Eigen::VectorXf::Random(5);
  const std::vector<sta::FilmParams<float>> shared = {sta::FilmParams<float>::identity(5, 3)};
  const auto out = sta::film_modulate_levels(levels, token, shared);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == levels[0]);
  CHECK(out[1] == levels[1]);

  auto doubled = sta::FilmParams<float>::identity(5, 3);
  doubled.gamma_bias.setConstant(2.0f);
  const std::vector<sta::FilmParams<float>> per_level = {shared[0], doubled};
  const auto mixed = sta::film_modulate_levels(levels, token, per_level);
  CHECK(mixed[0] == levels[0]);
  for (std::size_t i = 0; i < levels[1].data.size(); ++i) {
    CHECK(mixed[1].data[i] == 2.0f * levels[1].data[i]);
  }
  const std::vector<sta::FilmParams<float>> three(3, doubled);
  CHECK_THROWS_AS(sta::film_modulate_levels(levels, token, three), sta::ValidationError);
  CHECK_THROWS_AS(sta::film_modulate(levels[0], token, sta::FilmParams<float>::identity(5, 4)),
                  sta::ValidationError);
}

TEST_CASE("roi fusion with a zero final layer is an identity") {
  sta::testing::Rng rng(11);
  auto p = random_context(rng, 3, 2, 4, 3);
  p.layer2.setZero();
  p.layer2_bias.setZero();
  const VectorXd roi = random_vector(rng, 3, 4.0);
  CHECK(sta::roi_context_fuse(roi, random_vector(rng, 2), p) == roi);
}

TEST_CASE("roi fusion of a zero roi is the residual alone") {
  sta::testing::Rng rng(12);
  const auto p = random_context(rng, 3, 2, 2, 3);
  const VectorXd token = random_vector(rng, 2);
  const VectorXd roi = VectorXd::Zero(3);
  const auto out = sta::roi_context_fuse(roi, token, p);
  const auto ref = sta::oracle::roi_loop(roi, token, p.token_proj, p.token_bias, p.layer1,
                                         p.layer1_bias, p.layer2, p.layer2_bias);
  for (int i = 0; i < 3; ++i) CHECK(out(i) == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("roi fusion matches a hand-unrolled D_roi=3, D_token=2 case") {
  sta::testing::Rng rng(13);
  const auto p = random_context(rng, 3, 2, 2, 3);
  const VectorXd roi = random_vector(rng, 3), token = random_vector(rng, 2);
  const auto out = sta::roi_context_fuse(roi, token, p);
  const auto ref = sta::oracle::roi_loop(roi, token, p.token_proj, p.token_bias, p.layer1,
                                         p.layer1_bias, p.layer2, p.layer2_bias);
  for (int i = 0; i < 3; ++i) CHECK(out(i) == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("roi fusion dimension errors") {
  sta::testing::Rng rng(14);
  const auto p = random_context(rng, 3, 2, 2, 3);
  CHECK_THROWS_AS(sta::roi_context_fuse(random_vector(rng, 4), random_vector(rng, 2), p),
                  sta::ValidationError);
  CHECK_THROWS_AS(sta::roi_context_fuse(random_vector(rng, 3), random_vector(rng, 5), p),
                  sta::ValidationError);
}

TEST_CASE("kernels stay finite at magnitude 1e3") {
  sta::testing::Rng rng(15);
  const auto probe = random_probe(rng, 16, 8, 8);
  const sta::ProbeParams<double> big{probe.key_proj * 1e3, probe.value_proj * 1e3,
                                     probe.query * 1e3};
  const auto pooled = sta::attentive_probe(MatrixXd(random_matrix(rng, 10, 16, 1e3)), big);
  CHECK(pooled.token.allFinite());
  CHECK(pooled.weights.allFinite());
  CHECK(std::abs(pooled.weights.sum() - 1.0) < 1e-12);

  const sta::FilmParams<double> film{random_matrix(rng, 8, 4, 1e3), random_vector(rng, 4, 1e3),
                                     random_matrix(rng, 8, 4, 1e3), random_vector(rng, 4, 1e3)};
  CHECK(sta::film_modulate(random_matrix(rng, 4, 16, 1e3), random_vector(rng, 8, 1e3), film)
            .allFinite());

  const auto ctx = random_context(rng, 8, 8, 4, 8);
  const sta::ContextMlpParams<double> big_ctx{ctx.token_proj * 1e3, ctx.token_bias * 1e3,
                                              ctx.layer1 * 1e3,     ctx.layer1_bias * 1e3,
                                              ctx.layer2 * 1e3,     ctx.layer2_bias * 1e3};
  CHECK(sta::roi_context_fuse(random_vector(rng, 8, 1e3), random_vector(rng, 8, 1e3), big_ctx)
            .allFinite());
}

TEST_CASE("parameter bundles round-trip through named tensors") {
  sta::testing::Rng rng(16);
  const sta::ProbeParams<float> probe{random_matrix(rng, 4, 3).cast<float>(),
                                      random_matrix(rng, 4, 2).cast<float>(),
                                      random_vector(rng, 3).cast<float>()};
  const auto film = sta::FilmParams<float>::identity(2, 5);
  const auto ctx = random_context(rng, 3, 2, 2, 4);
  const sta::ContextMlpParams<float> ctxf{ctx.token_proj.cast<float>(), ctx.token_bias.cast<float>(),
                                          ctx.layer1.cast<float>(),     ctx.layer1_bias.cast<float>(),
                                          ctx.layer2.cast<float>(),     ctx.layer2_bias.cast<float>()};
  sta::NamedTensors bundle;
  sta::add_probe_params(bundle, probe);
  sta::add_film_params(bundle, film);
  sta::add_context_params(bundle, ctxf);

  const auto probe2 = sta::probe_params_from_tensors(bundle);
  CHECK(probe2.key_proj == probe.key_proj);
  CHECK(probe2.value_proj == probe.value_proj);
  CHECK(probe2.query == probe.query);
  const auto film2 = sta::film_params_from_tensors(bundle);
  CHECK(film2.gamma_bias == film.gamma_bias);
  const auto ctx2 = sta::context_params_from_tensors(bundle);
  CHECK(ctx2.layer1 == ctxf.layer1);

  bundle.erase("probe.query");
  bundle.erase("probe.key_proj");
  try {
    sta::probe_params_from_tensors(bundle);
    FAIL("expected a validation error");
  } catch (const sta::ValidationError& e) {
    CHECK(e.issues().size() == 2);
  }
}

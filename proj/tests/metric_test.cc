// Copyright 2026 sdtwsv authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/local_metric.hpp"
#include "sdtwsv/preprocess.hpp"
#include "sdtwsv/rng.hpp"

using namespace sdtwsv;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Two tight clusters around +/- center along axis 0, plus small isotropic
// noise; labels alternate.
std::pair<FrameMatrix, std::vector<int>> two_clusters(int per_class,
                                                      double center,
                                                      double noise,
                                                      uint64_t seed) {
  Philox4x32 rng(seed);
  FrameMatrix data(2 * per_class, 2);
  std::vector<int> labels(static_cast<size_t>(2 * per_class));
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2;
    const double sign = label == 0 ? -1.0 : 1.0;
    data(i, 0) = sign * center + noise * rng.next_gaussian();
    data(i, 1) = noise * rng.next_gaussian();
    labels[static_cast<size_t>(i)] = label;
  }
  return {data, labels};
}

}  // namespace

TEST_SUITE("metric") {

TEST_CASE("cosine_distance worked values") {
  CHECK(cosine_distance(vec2(1, 0), vec2(1, 0)) == 0.0);
  CHECK(cosine_distance(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0));
  CHECK(cosine_distance(vec2(1, 1), vec2(1, 0)) ==
        doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_distance(vec2(0, 0), vec2(1, 0)), Error);
}

TEST_CASE("cosine_distance properties: range, symmetry, scale invariance") {
  Philox4x32 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd u(5), v(5);
    for (int i = 0; i < 5; ++i) {
      u(i) = rng.next_gaussian();
      v(i) = rng.next_gaussian();
    }
    const double d = cosine_distance(u, v);
    CHECK(d >= -1e-12);
    CHECK(d <= 2.0 + 1e-12);
    CHECK(cosine_distance(v, u) == doctest::Approx(d).epsilon(1e-15));
    const double alpha = 0.25 + rng.next_double() * 4.0;
    const double beta = 0.25 + rng.next_double() * 4.0;
    CHECK(cosine_distance(alpha * u, beta * v) ==
          doctest::Approx(d).epsilon(1e-12));
    CHECK(cosine_distance(u, u) == 0.0);  // exact self-distance
  }
}

TEST_CASE("length_normalize") {
  const Eigen::VectorXd n = length_normalize(vec2(3, 4));
  CHECK(n(0) == doctest::Approx(0.6));
  CHECK(n(1) == doctest::Approx(0.8));
  const Eigen::VectorXd unit = vec2(1, 0);
  CHECK(length_normalize(unit) == unit);
  CHECK_THROWS_AS(length_normalize(vec2(0, 0)), Error);
}

TEST_CASE("fit_preprocess: LDA direction for two separated clusters") {
  const auto [data, labels] = two_clusters(200, 1.0, 0.05, 9);
  const PreprocessChain chain = fit_preprocess(data, labels, 1, true);
  REQUIRE(chain.has_lda());
  REQUIRE(chain.lda_projection.rows() == 1);
  const Eigen::VectorXd direction =
      chain.lda_projection.row(0).transpose().normalized();
  CHECK(std::abs(direction(0)) > 0.99);
}

TEST_CASE("fit_preprocess: already-white data gives near-identity chain") {
  Philox4x32 rng(15);
  const int n = 20000;
  FrameMatrix data(n, 3);
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) data(i, j) = rng.next_gaussian();
    labels[static_cast<size_t>(i)] = i % 2;
  }
  const PreprocessChain chain = fit_preprocess(data, labels, 3, false, false);
  CHECK_FALSE(chain.has_lda());
  CHECK(chain.mean.norm() < 0.05);
  CHECK((chain.whitener - Eigen::MatrixXd::Identity(3, 3)).norm() < 0.05);
}

TEST_CASE("fit_preprocess rejects a single speaker for LDA") {
  FrameMatrix data(4, 2);
  data << 1, 0, 2, 0, 3, 0, 4, 0;
  const std::vector<int> labels{0, 0, 0, 0};
  CHECK_THROWS_AS(fit_preprocess(data, labels, 1, true), Error);
}

TEST_CASE("fitted chain whitens its training data") {
  Philox4x32 rng(19);
  const int n = 5000;
  const int dim = 6;
  // Anisotropic, correlated, shifted data.
  Eigen::MatrixXd mix(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) mix(i, j) = rng.next_gaussian();
  FrameMatrix data(n, dim);
  std::vector<int> labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd z(dim);
    for (int j = 0; j < dim; ++j) z(j) = rng.next_gaussian();
    data.row(i) = (mix * z).transpose();
    data(i, 0) += 5.0;
    labels[static_cast<size_t>(i)] = i % 3;
  }
  // Pre-length-norm: transformed data must be exactly centered and white.
  const PreprocessChain chain = fit_preprocess(data, labels, dim, false, false);
  const FrameMatrix transformed = apply_preprocess_rows(chain, data);
  const Eigen::VectorXd mean =
      transformed.colwise().sum().transpose() / static_cast<double>(n);
  CHECK(mean.norm() <= 1e-6 * std::sqrt(static_cast<double>(dim)));
  Eigen::MatrixXd centered =
      transformed.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n);
  CHECK((cov - Eigen::MatrixXd::Identity(dim, dim)).norm() <= 1e-4);

  // With length normalization every output is unit norm.
  const PreprocessChain ln_chain =
      fit_preprocess(data, labels, dim, false, true);
  const FrameMatrix normalized = apply_preprocess_rows(ln_chain, data);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::abs(normalized.row(i).norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("apply_preprocess identity and length-norm-only chains") {
  const PreprocessChain identity = PreprocessChain::identity(2);
  const Eigen::VectorXd v = vec2(3, 4);
  CHECK(apply_preprocess(identity, v) == v);

  PreprocessChain ln = PreprocessChain::identity(2);
  ln.apply_length_norm = true;
  const Eigen::VectorXd n = apply_preprocess(ln, v);
  CHECK(n(0) == doctest::Approx(0.6));
  CHECK(n(1) == doctest::Approx(0.8));

  CHECK_THROWS_AS(apply_preprocess(identity, Eigen::VectorXd::Ones(3)),
                  Error);
}

TEST_CASE("chain round-trips through its binary form") {
  const auto [data, labels] = two_clusters(100, 2.0, 0.3, 33);
  const PreprocessChain chain = fit_preprocess(data, labels, 1, true, true);
  std::stringstream buffer;
  write_chain(buffer, chain);
  const PreprocessChain back = read_chain(buffer);
  CHECK(back.apply_length_norm == chain.apply_length_norm);
  CHECK(back.lda_projection == chain.lda_projection);
  CHECK(back.mean == chain.mean);
  CHECK(back.whitener == chain.whitener);
}

TEST_CASE("metric prepare: cosine casts, plda applies the chain") {
  Philox4x32 rng(71);
  FrameMatrixF raw(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      raw(i, j) = static_cast<float>(1.0 + rng.next_gaussian());
  const EmbeddingSequence seq = make_sequence("s", raw);

  const FrameMatrix cosine_prepared = LocalMetric::cosine().prepare(seq);
  CHECK(cosine_prepared == to_double(seq));

  PreprocessChain ln = PreprocessChain::identity(2);
  ln.apply_length_norm = true;
  auto model = std::make_shared<PldaModel>(
      Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2), ln);
  const FrameMatrix plda_prepared = LocalMetric::plda(model).prepare(seq);
  for (int i = 0; i < 3; ++i) {
    CHECK(plda_prepared.row(i).norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

}  // TEST_SUITE

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

#include "sdtwsv/local_metric.hpp"

#include <algorithm>
#include <cmath>

#include "sdtwsv/errors.hpp"

namespace sdtwsv {

double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine distance needs equal dimensions");
  }
  const double uu = u.squaredNorm();
  const double vv = v.squaredNorm();
  if (!(uu > 0.0) || !(vv > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                "cosine distance of a zero vector is undefined");
  }
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for bitwise-identical
  // inputs the quotient is then exactly 1 and the self-distance exactly 0.
  // The clamp absorbs the last-ulp excursions outside [0, 2].
  return std::clamp(1.0 - u.dot(v) / std::sqrt(uu * vv), 0.0, 2.0);
}

LocalMetric LocalMetric::cosine() { return LocalMetric(MetricKind::kCosine); }

LocalMetric LocalMetric::plda(std::shared_ptr<const PldaModel> model) {
  if (!model) {
    throw Error(ErrorCode::kInvalidArgument,
                "PLDA metric needs a model");
  }
  return LocalMetric(MetricKind::kPlda, std::move(model));
}

std::string LocalMetric::name() const {
  return kind_ == MetricKind::kCosine ? "cosine" : "plda";
}

double LocalMetric::distance(const Eigen::Ref<const Eigen::VectorXd>& u,
                             const Eigen::Ref<const Eigen::VectorXd>& v) const {
  switch (kind_) {
    case MetricKind::kCosine:
      return cosine_distance(u, v);
    case MetricKind::kPlda:
      return plda_distance(*model_, u, v);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric kind");
}

FrameMatrix LocalMetric::prepare(const EmbeddingSequence& seq) const {
  if (kind_ == MetricKind::kCosine) {
    return to_double(seq);
  }
  return apply_preprocess_rows(model_->chain(), to_double(seq));
}

}  // namespace sdtwsv

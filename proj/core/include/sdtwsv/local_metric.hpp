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

#pragma once

#include <memory>
#include <string>

#include "sdtwsv/embedding_sequence.hpp"
#include "sdtwsv/plda.hpp"

namespace sdtwsv {

// 1 - cos(u, v), in [0, 2]. Zero vectors have no direction and are an error.
double cosine_distance(const Eigen::Ref<const Eigen::VectorXd>& u,
                       const Eigen::Ref<const Eigen::VectorXd>& v);

enum class MetricKind { kCosine, kPlda };

// Local distance between embedding vectors; lower = more similar. Cosine
// compares raw embeddings; PLDA is the negated pairwise LLR and expects
// vectors run through the model's preprocessing chain, which prepare()
// applies. Immutable and safe to share across threads.
class LocalMetric {
 public:
  static LocalMetric cosine();
  static LocalMetric plda(std::shared_ptr<const PldaModel> model);

  MetricKind kind() const { return kind_; }
  const PldaModel* model() const { return model_.get(); }
  std::string name() const;

  double distance(const Eigen::Ref<const Eigen::VectorXd>& u,
                  const Eigen::Ref<const Eigen::VectorXd>& v) const;

  // Rows of a sequence in the space this metric scores: a plain cast for
  // cosine, the chain output for PLDA.
  FrameMatrix prepare(const EmbeddingSequence& seq) const;

 private:
  explicit LocalMetric(MetricKind kind,
                       std::shared_ptr<const PldaModel> model = nullptr)
      : kind_(kind), model_(std::move(model)) {}

  MetricKind kind_;
  std::shared_ptr<const PldaModel> model_;
};

}  // namespace sdtwsv

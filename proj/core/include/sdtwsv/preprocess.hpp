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

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "sdtwsv/embedding_sequence.hpp"

namespace sdtwsv {

// Scales a nonzero vector to unit Euclidean norm.
Eigen::VectorXd length_normalize(const Eigen::Ref<const Eigen::VectorXd>& v);

// Fitted embedding front end. Application order is fixed: LDA projection
// (when present), then mean subtraction, then whitening, then optional
// length normalization.
struct PreprocessChain {
  Eigen::MatrixXd lda_projection;  // target_dim x input_dim; empty = no LDA
  Eigen::VectorXd mean;            // in the post-projection space
  Eigen::MatrixXd whitener;        // symmetric PD; inverse sqrt of covariance
  bool apply_length_norm = true;

  bool has_lda() const { return lda_projection.size() > 0; }
  Eigen::Index input_dim() const {
    return has_lda() ? lda_projection.cols() : mean.size();
  }
  Eigen::Index output_dim() const { return mean.size(); }

  static PreprocessChain identity(Eigen::Index dim);
};

// Fits the chain on labelled training rows (labels are dense class indices).
// With use_lda the projection solves the generalized eigenproblem on the
// between/within scatter matrices and keeps the top target_dim directions;
// target_dim must then be <= min(input dim, #classes - 1). The whitener is
// the inverse symmetric square root of the sample covariance of the
// (projected, centered) data, so the transformed training set has zero mean
// and identity covariance before length normalization.
PreprocessChain fit_preprocess(const FrameMatrix& data,
                               const std::vector<int>& labels,
                               Eigen::Index target_dim, bool use_lda,
                               bool length_norm = true);

Eigen::VectorXd apply_preprocess(const PreprocessChain& chain,
                                 const Eigen::Ref<const Eigen::VectorXd>& v);
FrameMatrix apply_preprocess_rows(const PreprocessChain& chain,
                                  const FrameMatrix& rows);

// Adds lambda*I with lambda = 1e-6 * trace/dim when the smallest eigenvalue
// falls below 1e-10 * trace/dim. Keeps near-singular scatter and covariance
// estimates invertible on small data sets. Returns true when it fired.
bool regularize_covariance(Eigen::MatrixXd& covariance);

void write_chain(std::ostream& os, const PreprocessChain& chain);
PreprocessChain read_chain(std::istream& is);

}  // namespace sdtwsv

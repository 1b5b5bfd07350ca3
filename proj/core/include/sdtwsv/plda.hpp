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
#include <filesystem>
#include <vector>

#include "sdtwsv/preprocess.hpp"

namespace sdtwsv {

// Two-covariance PLDA: an observation is x = y + e with the speaker factor
// y ~ N(0, between) and the residual e ~ N(0, within). Both covariances are
// full dim x dim matrices; between is PSD and within PD. A pair (u, v) is
// scored as the log-likelihood ratio of the joint Gaussians
//   same speaker:       Cov = [[B+W, B], [B, B+W]]
//   different speakers: Cov = [[B+W, 0], [0, B+W]]
// which collapses to u'Qu + v'Qv + u'Cv + k with cached Q, C, k.
class PldaModel {
 public:
  PldaModel() = default;
  PldaModel(Eigen::MatrixXd between, Eigen::MatrixXd within,
            PreprocessChain chain);

  Eigen::Index dim() const { return between_.rows(); }
  const Eigen::MatrixXd& between_covariance() const { return between_; }
  const Eigen::MatrixXd& within_covariance() const { return within_; }
  const PreprocessChain& chain() const { return chain_; }

  // log p(u,v | same speaker) - log p(u,v | different speakers).
  // Inputs must already be preprocessed with chain(). Exactly symmetric in
  // (u, v).
  double log_likelihood_ratio(const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& v) const;

 private:
  void compute_scoring_terms();

  Eigen::MatrixXd between_;
  Eigen::MatrixXd within_;
  PreprocessChain chain_;
  Eigen::MatrixXd quad_;   // Q
  Eigen::MatrixXd cross_;  // C
  double constant_ = 0.0;  // k
};

double plda_score(const PldaModel& model,
                  const Eigen::Ref<const Eigen::VectorXd>& u,
                  const Eigen::Ref<const Eigen::VectorXd>& v);

// Negated LLR, so dynamic-programming alignment can minimize it like any
// other local distance.
double plda_distance(const PldaModel& model,
                     const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v);

// EM estimation of the two covariances from labelled rows (dense class
// indices). The rows are expected to be preprocessed already; the chain
// argument is stored in the returned model so scoring can reproduce the
// same front end. When loglik_history is given, the marginal log-likelihood
// of the data is appended once per iteration (evaluated after the M-step);
// the sequence is non-decreasing.
PldaModel plda_train(const FrameMatrix& data, const std::vector<int>& labels,
                     int iterations, PreprocessChain chain,
                     std::vector<double>* loglik_history = nullptr);

PldaModel plda_train(const FrameMatrix& data, const std::vector<int>& labels,
                     int iterations,
                     std::vector<double>* loglik_history = nullptr);

// Binary model container: magic "PLDA", u32 version, u32 dim, row-major
// float64 between and within covariances, then the embedded preprocessing
// chain.
void write_plda(const PldaModel& model, const std::filesystem::path& path);
PldaModel read_plda(const std::filesystem::path& path);

}  // namespace sdtwsv

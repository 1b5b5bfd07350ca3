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

#include "sdtwsv/plda.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/io_util.hpp"

namespace sdtwsv {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'D', 'A'};
constexpr uint32_t kVersion = 1;
constexpr double kLog2Pi = 1.8378770664093454836;

double log_det_pd(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                std::string(what) + " is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Sufficient statistics: per speaker the count and mean, pooled across
// speakers the within-class scatter sum_i sum_j (x_ij - m_i)(x_ij - m_i)'.
struct SpeakerStats {
  std::vector<Eigen::Index> counts;
  Eigen::MatrixXd means;  // one row per speaker
  Eigen::MatrixXd within_scatter;
  Eigen::Index n_samples = 0;
  int n_speakers = 0;
};

SpeakerStats accumulate_stats(const FrameMatrix& data,
                              const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "label count does not match row count");
  }
  int n_speakers = 0;
  for (int label : labels) {
    if (label < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "labels must be dense non-negative class indices");
    }
    n_speakers = std::max(n_speakers, label + 1);
  }
  if (n_speakers < 2) {
    throw Error(ErrorCode::kDomainError,
                "PLDA training needs at least two speakers");
  }
  const Eigen::Index dim = data.cols();
  SpeakerStats stats;
  stats.n_speakers = n_speakers;
  stats.n_samples = data.rows();
  stats.counts.assign(static_cast<size_t>(n_speakers), 0);
  stats.means = Eigen::MatrixXd::Zero(n_speakers, dim);

  Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Eigen::RowVectorXd row = data.row(i).cast<double>();
    const int label = labels[static_cast<size_t>(i)];
    stats.means.row(label) += row;
    second_moment.noalias() += row.transpose() * row;
    ++stats.counts[static_cast<size_t>(label)];
  }
  for (int s = 0; s < n_speakers; ++s) {
    if (stats.counts[static_cast<size_t>(s)] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class indices must be dense: speaker " +
                      std::to_string(s) + " has no samples");
    }
    stats.means.row(s) /= static_cast<double>(stats.counts[static_cast<size_t>(s)]);
  }
  stats.within_scatter = second_moment;
  for (int s = 0; s < n_speakers; ++s) {
    stats.within_scatter.noalias() -=
        static_cast<double>(stats.counts[static_cast<size_t>(s)]) *
        stats.means.row(s).transpose() * stats.means.row(s);
  }
  if (second_moment.trace() <= 0.0) {
    throw Error(ErrorCode::kDomainError,
                "training data is degenerate (zero total scatter)");
  }
  return stats;
}

// Marginal log-likelihood of the data under (between, within). Decomposes
// each speaker block into the deviations around the class mean, which carry
// covariance `within`, and the scaled mean sqrt(n) m_i whose covariance is
// n*between + within.
double marginal_loglik(const SpeakerStats& stats,
                       const Eigen::MatrixXd& between,
                       const Eigen::MatrixXd& within) {
  const Eigen::Index dim = between.rows();
  const double within_count =
      static_cast<double>(stats.n_samples - stats.n_speakers);

  Eigen::LLT<Eigen::MatrixXd> within_llt(within);
  if (within_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                "within covariance is not positive definite");
  }
  const double within_logdet =
      2.0 *
      within_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double ll = -0.5 * (within_count * (within_logdet + dim * kLog2Pi) +
                      within_llt.solve(stats.within_scatter).trace());

  // Group by count so each distinct n costs one factorization.
  std::map<Eigen::Index, Eigen::LLT<Eigen::MatrixXd>> mean_cov;
  for (int s = 0; s < stats.n_speakers; ++s) {
    const Eigen::Index n = stats.counts[static_cast<size_t>(s)];
    auto it = mean_cov.find(n);
    if (it == mean_cov.end()) {
      it = mean_cov
               .emplace(n, Eigen::LLT<Eigen::MatrixXd>(
                               static_cast<double>(n) * between + within))
               .first;
      if (it->second.info() != Eigen::Success) {
        throw Error(ErrorCode::kSingularMatrix,
                    "n*between + within is not positive definite");
      }
    }
    const double logdet =
        2.0 *
        it->second.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::VectorXd mean = stats.means.row(s).transpose();
    const double quad = static_cast<double>(n) *
                        mean.dot(it->second.solve(mean));
    ll += -0.5 * (dim * kLog2Pi + logdet + quad);
  }
  return ll;
}

}  // namespace

PldaModel::PldaModel(Eigen::MatrixXd between, Eigen::MatrixXd within,
                     PreprocessChain chain)
    : between_(std::move(between)),
      within_(std::move(within)),
      chain_(std::move(chain)) {
  if (between_.rows() != between_.cols() || within_.rows() != within_.cols() ||
      between_.rows() != within_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "PLDA covariances must be square and equal-sized");
  }
  if (chain_.output_dim() != between_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "preprocessing chain output dim does not match PLDA dim");
  }
  compute_scoring_terms();
}

void PldaModel::compute_scoring_terms() {
  const Eigen::Index dim = between_.rows();
  const Eigen::MatrixXd total = between_ + within_;
  Eigen::LLT<Eigen::MatrixXd> total_llt(total);
  if (total_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                "between + within is not positive definite");
  }
  const Eigen::MatrixXd total_inv =
      total_llt.solve(Eigen::MatrixXd::Identity(dim, dim));

  // Blockwise inverse of [[T, B], [B, T]]: the diagonal block is the inverse
  // Schur complement A = (T - B T^{-1} B)^{-1}, the off-diagonal block is
  // -T^{-1} B A. The score then reads
  //   LLR = 1/2 u'(T^{-1} - A)u + 1/2 v'(T^{-1} - A)v + u'(T^{-1} B A)v + k
  // with k = 1/2 (log|T| + log|A|).
  const Eigen::MatrixXd schur = total - between_ * total_inv * between_;
  Eigen::LLT<Eigen::MatrixXd> schur_llt(schur);
  if (schur_llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                "same-speaker joint covariance is not positive definite");
  }
  const Eigen::MatrixXd a =
      schur_llt.solve(Eigen::MatrixXd::Identity(dim, dim));

  quad_ = 0.5 * (total_inv - a);
  cross_ = total_inv * between_ * a;
  // Symmetrize against roundoff so scoring is exactly swap-invariant.
  quad_ = 0.5 * (quad_ + quad_.transpose()).eval();
  cross_ = 0.5 * (cross_ + cross_.transpose()).eval();
  constant_ = 0.5 * (log_det_pd(total, "between + within") -
                     log_det_pd(schur, "Schur complement"));
  // log|C_same| = log|T| + log|Schur|; k = 1/2(2 log|T| - log|C_same|).
}

double PldaModel::log_likelihood_ratio(
    const Eigen::Ref<const Eigen::VectorXd>& u,
    const Eigen::Ref<const Eigen::VectorXd>& v) const {
  if (u.size() != dim() || v.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "PLDA score input dimension mismatch");
  }
  const double quad_u = u.dot(quad_ * u);
  const double quad_v = v.dot(quad_ * v);
  // Evaluate the cross term in both orders and average; the two are equal in
  // exact arithmetic, and the average makes the score bitwise symmetric.
  const double cross = 0.5 * (u.dot(cross_ * v) + v.dot(cross_ * u));
  return (quad_u + quad_v) + cross + constant_;
}

double plda_score(const PldaModel& model,
                  const Eigen::Ref<const Eigen::VectorXd>& u,
                  const Eigen::Ref<const Eigen::VectorXd>& v) {
  return model.log_likelihood_ratio(u, v);
}

double plda_distance(const PldaModel& model,
                     const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v) {
  return -model.log_likelihood_ratio(u, v);
}

PldaModel plda_train(const FrameMatrix& data, const std::vector<int>& labels,
                     int iterations, PreprocessChain chain,
                     std::vector<double>* loglik_history) {
  if (iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "iterations must be >= 1");
  }
  const SpeakerStats stats = accumulate_stats(data, labels);
  const Eigen::Index dim = data.cols();
  const double n_samples = static_cast<double>(stats.n_samples);
  const double n_speakers = static_cast<double>(stats.n_speakers);

  // Moment-based starting point: pooled within-class covariance and the
  // scatter of class means (zero-mean model, so means are not re-centered).
  Eigen::MatrixXd within =
      stats.within_scatter / std::max(1.0, n_samples - n_speakers);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(dim, dim);
  for (int s = 0; s < stats.n_speakers; ++s) {
    between.noalias() +=
        stats.means.row(s).transpose() * stats.means.row(s);
  }
  between /= n_speakers;
  regularize_covariance(within);
  regularize_covariance(between);

  for (int iter = 0; iter < iterations; ++iter) {
    Eigen::LLT<Eigen::MatrixXd> between_llt(between);
    Eigen::LLT<Eigen::MatrixXd> within_llt(within);
    if (between_llt.info() != Eigen::Success ||
        within_llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularMatrix,
                  "PLDA EM produced a singular covariance");
    }
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd between_inv = between_llt.solve(identity);
    const Eigen::MatrixXd within_inv = within_llt.solve(identity);

    // E-step: the speaker factor posterior for a speaker with n samples and
    // mean m is N(w, P) with P = (B^{-1} + n W^{-1})^{-1}, w = P n W^{-1} m.
    std::map<Eigen::Index, Eigen::MatrixXd> posterior_cov;
    Eigen::MatrixXd between_acc = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd within_acc = stats.within_scatter;
    for (int s = 0; s < stats.n_speakers; ++s) {
      const Eigen::Index n = stats.counts[static_cast<size_t>(s)];
      auto it = posterior_cov.find(n);
      if (it == posterior_cov.end()) {
        const Eigen::MatrixXd precision =
            between_inv + static_cast<double>(n) * within_inv;
        it = posterior_cov
                 .emplace(n, precision.llt().solve(identity))
                 .first;
      }
      const Eigen::MatrixXd& post = it->second;
      const Eigen::VectorXd mean = stats.means.row(s).transpose();
      const Eigen::VectorXd w =
          post * (static_cast<double>(n) * (within_inv * mean));
      const Eigen::VectorXd residual = mean - w;
      between_acc.noalias() += post + w * w.transpose();
      within_acc.noalias() +=
          static_cast<double>(n) *
          (post + residual * residual.transpose());
    }

    // M-step.
    between = between_acc / n_speakers;
    within = within_acc / n_samples;
    regularize_covariance(within);

    if (loglik_history != nullptr) {
      loglik_history->push_back(marginal_loglik(stats, between, within));
    }
  }

  if (chain.output_dim() == 0) {
    chain = PreprocessChain::identity(dim);
  }
  return PldaModel(std::move(between), std::move(within), std::move(chain));
}

PldaModel plda_train(const FrameMatrix& data, const std::vector<int>& labels,
                     int iterations, std::vector<double>* loglik_history) {
  return plda_train(data, labels, iterations,
                    PreprocessChain::identity(data.cols()), loglik_history);
}

void write_plda(const PldaModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  os.write(kMagic, 4);
  io::write_pod(os, kVersion);
  io::write_pod(os, static_cast<uint32_t>(model.dim()));
  io::write_matrix(os, model.between_covariance());
  io::write_matrix(os, model.within_covariance());
  write_chain(os, model.chain());
  if (!os) {
    throw Error(ErrorCode::kMissingFile, "write failed for " + path.string());
  }
}

PldaModel read_plda(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open PLDA model " + path.string());
  }
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) {
    throw Error(ErrorCode::kMalformedFile,
                "bad magic in PLDA model " + path.string());
  }
  const auto version = io::read_pod<uint32_t>(is, "version");
  if (version != kVersion) {
    throw Error(ErrorCode::kMalformedFile,
                "unsupported PLDA model version in " + path.string());
  }
  const auto dim = io::read_pod<uint32_t>(is, "dim");
  if (dim == 0) {
    throw Error(ErrorCode::kMalformedFile,
                "zero dimension in PLDA model " + path.string());
  }
  Eigen::MatrixXd between = io::read_matrix(is, dim, dim, "between");
  Eigen::MatrixXd within = io::read_matrix(is, dim, dim, "within");
  PreprocessChain chain = read_chain(is);
  return PldaModel(std::move(between), std::move(within), std::move(chain));
}

}  // namespace sdtwsv

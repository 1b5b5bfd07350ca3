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

#include "sdtwsv/preprocess.hpp"

#include <Eigen/Dense>
#include <istream>
#include <ostream>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/io_util.hpp"

namespace sdtwsv {

namespace {

// Unique symmetric PD inverse square root, via the eigendecomposition.
Eigen::MatrixXd inverse_symmetric_sqrt(const Eigen::MatrixXd& covariance) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularMatrix,
                "eigendecomposition failed while whitening");
  }
  const Eigen::VectorXd& evals = solver.eigenvalues();
  if (evals.minCoeff() <= 0.0) {
    throw Error(ErrorCode::kSingularMatrix,
                "covariance is not positive definite; whitening undefined");
  }
  return solver.eigenvectors() *
         evals.array().rsqrt().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

struct ClassStats {
  std::vector<Eigen::Index> counts;
  Eigen::MatrixXd class_means;  // one row per class
  int n_classes = 0;
};

ClassStats collect_class_stats(const FrameMatrix& data,
                               const std::vector<int>& labels) {
  if (data.rows() < 2) {
    throw Error(ErrorCode::kDomainError,
                "need at least two training vectors");
  }
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "label count does not match row count");
  }
  int n_classes = 0;
  for (int label : labels) {
    if (label < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "labels must be dense non-negative class indices");
    }
    n_classes = std::max(n_classes, label + 1);
  }
  ClassStats stats;
  stats.n_classes = n_classes;
  stats.counts.assign(static_cast<size_t>(n_classes), 0);
  stats.class_means = Eigen::MatrixXd::Zero(n_classes, data.cols());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const int label = labels[static_cast<size_t>(i)];
    stats.class_means.row(label) += data.row(i).cast<double>();
    ++stats.counts[static_cast<size_t>(label)];
  }
  for (int c = 0; c < n_classes; ++c) {
    if (stats.counts[static_cast<size_t>(c)] == 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "class indices must be dense: class " + std::to_string(c) +
                      " has no samples");
    }
    stats.class_means.row(c) /=
        static_cast<double>(stats.counts[static_cast<size_t>(c)]);
  }
  return stats;
}

}  // namespace

Eigen::VectorXd length_normalize(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double norm = v.norm();
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                "cannot length-normalize a zero vector");
  }
  return v / norm;
}

PreprocessChain PreprocessChain::identity(Eigen::Index dim) {
  PreprocessChain chain;
  chain.mean = Eigen::VectorXd::Zero(dim);
  chain.whitener = Eigen::MatrixXd::Identity(dim, dim);
  chain.apply_length_norm = false;
  return chain;
}

bool regularize_covariance(Eigen::MatrixXd& covariance) {
  const double scale = covariance.trace() / covariance.rows();
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kDomainError,
                "covariance has non-positive trace; data is degenerate");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.eigenvalues().minCoeff() < 1e-10 * scale) {
    covariance += 1e-6 * scale *
                  Eigen::MatrixXd::Identity(covariance.rows(),
                                            covariance.cols());
    return true;
  }
  return false;
}

PreprocessChain fit_preprocess(const FrameMatrix& data,
                               const std::vector<int>& labels,
                               Eigen::Index target_dim, bool use_lda,
                               bool length_norm) {
  PreprocessChain chain;
  chain.apply_length_norm = length_norm;

  Eigen::MatrixXd working = data.cast<double>();

  if (use_lda) {
    const ClassStats stats = collect_class_stats(data, labels);
    if (stats.n_classes < 2) {
      throw Error(ErrorCode::kDomainError,
                  "LDA needs at least two speakers");
    }
    if (target_dim < 1 ||
        target_dim > std::min<Eigen::Index>(data.cols(),
                                            stats.n_classes - 1)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "LDA target_dim must be in [1, min(dim, #speakers-1)]");
    }
    const Eigen::Index dim = data.cols();
    const double n_total = static_cast<double>(data.rows());
    Eigen::RowVectorXd global_mean =
        working.colwise().sum() / n_total;

    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd between = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < working.rows(); ++i) {
      const Eigen::RowVectorXd centered =
          working.row(i) -
          stats.class_means.row(labels[static_cast<size_t>(i)]);
      within.noalias() += centered.transpose() * centered;
    }
    for (int c = 0; c < stats.n_classes; ++c) {
      const Eigen::RowVectorXd offset =
          stats.class_means.row(c) - global_mean;
      between.noalias() +=
          static_cast<double>(stats.counts[static_cast<size_t>(c)]) *
          offset.transpose() * offset;
    }
    within /= n_total;
    between /= n_total;
    if (regularize_covariance(within)) {
      // Proceed with the ridge; refuse only if it is still singular.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> check(within);
      if (check.eigenvalues().minCoeff() <= 0.0) {
        throw Error(ErrorCode::kSingularMatrix,
                    "within-class scatter is singular even after "
                    "regularization; add more data per speaker");
      }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between,
                                                                     within);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularMatrix,
                  "generalized eigenproblem for LDA failed; within-class "
                  "scatter may be singular (regularization advised)");
    }
    // Eigenvalues ascend; keep the trailing target_dim directions, largest
    // ratio first.
    Eigen::MatrixXd projection(target_dim, dim);
    for (Eigen::Index k = 0; k < target_dim; ++k) {
      projection.row(k) = solver.eigenvectors().col(dim - 1 - k).transpose();
    }
    chain.lda_projection = std::move(projection);
    working = (working * chain.lda_projection.transpose()).eval();
  }

  const double n_total = static_cast<double>(working.rows());
  chain.mean = (working.colwise().sum() / n_total).transpose();
  Eigen::MatrixXd centered = working.rowwise() - chain.mean.transpose();
  Eigen::MatrixXd covariance =
      centered.transpose() * centered / n_total;
  regularize_covariance(covariance);
  chain.whitener = inverse_symmetric_sqrt(covariance);
  return chain;
}

Eigen::VectorXd apply_preprocess(const PreprocessChain& chain,
                                 const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != chain.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector dimension does not match chain input dimension");
  }
  Eigen::VectorXd out =
      chain.has_lda() ? (chain.lda_projection * v).eval() : v.eval();
  out -= chain.mean;
  out = chain.whitener * out;
  if (chain.apply_length_norm) {
    out = length_normalize(out);
  }
  return out;
}

FrameMatrix apply_preprocess_rows(const PreprocessChain& chain,
                                  const FrameMatrix& rows) {
  if (rows.cols() != chain.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row dimension does not match chain input dimension");
  }
  FrameMatrix out(rows.rows(), chain.output_dim());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::VectorXd v = rows.row(i).transpose();
    out.row(i) = apply_preprocess(chain, v).transpose();
  }
  return out;
}

void write_chain(std::ostream& os, const PreprocessChain& chain) {
  io::write_pod(os, static_cast<uint32_t>(chain.input_dim()));
  io::write_pod(os, static_cast<uint32_t>(chain.output_dim()));
  io::write_pod(os, static_cast<uint8_t>(chain.has_lda() ? 1 : 0));
  io::write_pod(os, static_cast<uint8_t>(chain.apply_length_norm ? 1 : 0));
  if (chain.has_lda()) io::write_matrix(os, chain.lda_projection);
  io::write_vector(os, chain.mean);
  io::write_matrix(os, chain.whitener);
}

PreprocessChain read_chain(std::istream& is) {
  PreprocessChain chain;
  const auto input_dim = io::read_pod<uint32_t>(is, "chain input dim");
  const auto output_dim = io::read_pod<uint32_t>(is, "chain output dim");
  const bool has_lda = io::read_pod<uint8_t>(is, "chain lda flag") != 0;
  chain.apply_length_norm =
      io::read_pod<uint8_t>(is, "chain length-norm flag") != 0;
  if (has_lda) {
    chain.lda_projection = io::read_matrix(is, output_dim, input_dim, "lda");
  }
  chain.mean = io::read_vector(is, output_dim, "chain mean");
  chain.whitener = io::read_matrix(is, output_dim, output_dim, "whitener");
  if (!has_lda && input_dim != output_dim) {
    throw Error(ErrorCode::kMalformedFile,
                "chain without LDA must have equal input/output dims");
  }
  return chain;
}

}  // namespace sdtwsv

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

#include "sdtwsv/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/rng.hpp"
#include "text_format.hpp"

namespace sdtwsv {

namespace {

// Stream assignment for the philox substreams, so no two generation jobs
// ever consume the same values.
constexpr uint64_t kPopulationStream = 0;
constexpr uint64_t kSequenceStream = 1;
constexpr uint64_t kTrialStream = 2;
constexpr uint64_t kDistractorStream = 3;
constexpr uint64_t kSpliceStream = 4;
constexpr uint64_t kDeriveStreamBase = 1000;

Eigen::VectorXd gaussian_vector(Philox4x32& rng, Eigen::Index dim) {
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.next_gaussian();
  return z;
}

std::string format_index(const char* prefix, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05zu", prefix, index);
  return buf;
}

}  // namespace

CovarianceSpec CovarianceSpec::scaled_identity(double scale) {
  if (scale < 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance scale must be >= 0");
  }
  CovarianceSpec spec;
  spec.scale = scale;
  return spec;
}

CovarianceSpec CovarianceSpec::full(Eigen::MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance matrix must be square and non-empty");
  }
  CovarianceSpec spec;
  spec.matrix = std::move(matrix);
  return spec;
}

Eigen::MatrixXd CovarianceSpec::materialize(Eigen::Index dim) const {
  if (is_scaled_identity()) {
    return scale * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (matrix.rows() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "covariance matrix dimension mismatch");
  }
  return matrix;
}

Eigen::MatrixXd CovarianceSpec::factor(Eigen::Index dim) const {
  if (is_scaled_identity()) {
    return std::sqrt(scale) * Eigen::MatrixXd::Identity(dim, dim);
  }
  if (matrix.rows() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "covariance matrix dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() < -1e-9 * matrix.norm()) {
    throw Error(ErrorCode::kInvalidArgument,
                "covariance matrix is not positive semidefinite");
  }
  return solver.eigenvectors() *
         solver.eigenvalues().array().max(0.0).sqrt().matrix().asDiagonal() *
         solver.eigenvectors().transpose();
}

Eigen::MatrixXd gen_population(const PopulationSpec& spec) {
  if (spec.n_speakers < 1 || spec.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "population needs n_speakers >= 1 and dim >= 1");
  }
  const Eigen::MatrixXd factor = spec.between.factor(spec.dim);
  Philox4x32 rng(spec.seed, kPopulationStream);
  Eigen::MatrixXd means(spec.n_speakers, spec.dim);
  for (int s = 0; s < spec.n_speakers; ++s) {
    means.row(s) = (factor * gaussian_vector(rng, spec.dim)).transpose();
  }
  return means;
}

EmbeddingSequence gen_sequence(std::string id,
                               const Eigen::Ref<const Eigen::VectorXd>& mean,
                               int length, const CovarianceSpec& within,
                               uint64_t seed,
                               const std::optional<MismatchSpec>& mismatch) {
  if (length < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sequence length must be >= 1");
  }
  const Eigen::Index dim = mean.size();
  const Eigen::MatrixXd factor = within.factor(dim);
  Philox4x32 rng(seed, kSequenceStream);

  int splice_begin = 0, splice_count = 0;  // 0-based half-open frame range
  const Eigen::VectorXd* splice_mean = nullptr;
  if (mismatch && mismatch->splice_fraction > 0.0) {
    if (mismatch->splice_fraction >= 1.0 || mismatch->splice_fraction < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "splice_fraction must lie in [0, 1)");
    }
    if (mismatch->distractor_mean.size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mismatch distractor mean must match the embedding dim");
    }
    splice_count = static_cast<int>(
        std::ceil(mismatch->splice_fraction * static_cast<double>(length)));
    // The run start comes from its own substream, so the frame noise is
    // identical with and without mismatch.
    Philox4x32 splice_rng(seed, kSpliceStream);
    splice_begin = static_cast<int>(
        splice_rng.next_u64() %
        static_cast<uint64_t>(length - splice_count + 1));
    splice_mean = &mismatch->distractor_mean;
  }

  const Eigen::VectorXd base_mean = mean;
  FrameMatrixF frames(length, dim);
  for (int t = 0; t < length; ++t) {
    const bool spliced =
        splice_mean != nullptr && t >= splice_begin &&
        t < splice_begin + splice_count;
    const Eigen::VectorXd noise = factor * gaussian_vector(rng, dim);
    const Eigen::VectorXd frame =
        (spliced ? *splice_mean : base_mean) + noise;
    frames.row(t) = frame.cast<float>().transpose();
  }
  return make_sequence(std::move(id), std::move(frames));
}

SynthTrialSet gen_trialset(const PopulationSpec& spec, int trials_per_class,
                           int seq_length,
                           const std::optional<MismatchSpec>& mismatch) {
  if (spec.n_speakers < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "trial generation needs at least two speakers");
  }
  if (trials_per_class < 1 || seq_length < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "trials_per_class and seq_length must be >= 1");
  }
  const Eigen::MatrixXd means = gen_population(spec);
  Philox4x32 structure_rng(spec.seed, kTrialStream);
  const bool spliced = mismatch && mismatch->splice_fraction > 0.0;
  std::optional<Philox4x32> distractor_rng;
  Eigen::MatrixXd between_factor;
  if (spliced) {
    distractor_rng.emplace(mismatch->distractor_seed, kDistractorStream);
    between_factor = spec.between.factor(spec.dim);
  }
  const std::string condition = spliced ? "spliced" : "clean";

  SynthTrialSet out;
  out.sequences.reserve(static_cast<size_t>(trials_per_class) * 4);
  out.trials.reserve(static_cast<size_t>(trials_per_class) * 2);

  const auto make_trial = [&](size_t index, int enrol_speaker,
                              int test_speaker, TrialLabel label) {
    const uint64_t enrol_seed = structure_rng.next_u64();
    const uint64_t test_seed = structure_rng.next_u64();
    std::optional<MismatchSpec> test_mismatch;
    if (spliced) {
      MismatchSpec m = *mismatch;
      if (m.distractor_mean.size() == 0) {
        m.distractor_mean =
            between_factor * gaussian_vector(*distractor_rng, spec.dim);
      }
      test_mismatch = std::move(m);
    }
    const std::string enrol_id = format_index("e", index);
    const std::string test_id = format_index("x", index);
    out.sequences.push_back(gen_sequence(enrol_id,
                                         means.row(enrol_speaker).transpose(),
                                         seq_length, spec.within, enrol_seed));
    out.sequences.push_back(gen_sequence(test_id,
                                         means.row(test_speaker).transpose(),
                                         seq_length, spec.within, test_seed,
                                         test_mismatch));
    out.trials.push_back(Trial{enrol_id, test_id, label, condition});
  };

  for (int t = 0; t < trials_per_class; ++t) {
    const int speaker = t % spec.n_speakers;
    make_trial(static_cast<size_t>(t), speaker, speaker, TrialLabel::kTarget);
  }
  for (int t = 0; t < trials_per_class; ++t) {
    const int enrol_speaker = t % spec.n_speakers;
    const int offset = static_cast<int>(
        structure_rng.next_u64() %
        static_cast<uint64_t>(spec.n_speakers - 1));
    const int test_speaker = (enrol_speaker + 1 + offset) % spec.n_speakers;
    make_trial(static_cast<size_t>(trials_per_class) + static_cast<size_t>(t),
               enrol_speaker,
               test_speaker, TrialLabel::kNontarget);
  }
  return out;
}

SynthTrainSet gen_trainset(const PopulationSpec& spec, int seqs_per_speaker,
                           int seq_length) {
  if (seqs_per_speaker < 1 || seq_length < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "seqs_per_speaker and seq_length must be >= 1");
  }
  const Eigen::MatrixXd means = gen_population(spec);
  Philox4x32 structure_rng(spec.seed, kTrialStream);
  SynthTrainSet out;
  for (int s = 0; s < spec.n_speakers; ++s) {
    const std::string speaker = format_index("spk", static_cast<size_t>(s));
    for (int k = 0; k < seqs_per_speaker; ++k) {
      const uint64_t seq_seed = structure_rng.next_u64();
      std::string id = speaker + "_" + format_index("s", static_cast<size_t>(k));
      out.sequences.push_back(gen_sequence(std::move(id),
                                           means.row(s).transpose(),
                                           seq_length, spec.within, seq_seed));
      out.speakers.push_back(speaker);
    }
  }
  return out;
}

uint64_t derive_seed(uint64_t seed, uint64_t salt) {
  Philox4x32 rng(seed, kDeriveStreamBase + salt);
  return rng.next_u64();
}

GenSpec read_genspec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open generator spec " + path.string());
  }
  GenSpec spec;
  bool have_distractor_seed = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto strip = [](const std::string& s) {
      const auto begin = s.find_first_not_of(" \t");
      if (begin == std::string::npos) return std::string();
      const auto end = s.find_last_not_of(" \t\r");
      return s.substr(begin, end - begin + 1);
    };
    const std::string stripped = strip(line);
    if (stripped.empty()) continue;
    if (stripped[0] == '#') {
      // The header pins the generator; refuse specs written for another one.
      const std::string prefix = "# generator:";
      if (stripped.rfind(prefix, 0) == 0) {
        const std::string generator = strip(stripped.substr(prefix.size()));
        const std::string expected = std::string(Philox4x32::kName) + " v" +
                                     std::string(Philox4x32::kVersion);
        if (generator != expected) {
          throw Error(ErrorCode::kMalformedFile,
                      "generator spec requires '" + generator +
                          "' but this build provides '" + expected + "'");
        }
      }
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ":" + std::to_string(line_no) +
                      ": expected 'key = value'");
    }
    const std::string key = strip(stripped.substr(0, eq));
    const std::string value = strip(stripped.substr(eq + 1));
    const std::string where = path.string();
    if (key == "n_speakers") {
      spec.n_speakers = static_cast<int>(text::parse_long(value, where));
    } else if (key == "dim") {
      spec.dim = static_cast<int>(text::parse_long(value, where));
    } else if (key == "phi_b_scale") {
      spec.phi_b_scale = text::parse_double(value, where);
    } else if (key == "phi_w_scale") {
      spec.phi_w_scale = text::parse_double(value, where);
    } else if (key == "seed") {
      spec.seed = text::parse_u64(value, where);
    } else if (key == "seq_length") {
      spec.seq_length = static_cast<int>(text::parse_long(value, where));
    } else if (key == "splice_fraction") {
      spec.splice_fraction = text::parse_double(value, where);
    } else if (key == "trials_per_class") {
      spec.trials_per_class = static_cast<int>(text::parse_long(value, where));
    } else if (key == "distractor_seed") {
      spec.distractor_seed = text::parse_u64(value, where);
      have_distractor_seed = true;
    } else if (key == "train_speakers") {
      spec.train_speakers = static_cast<int>(text::parse_long(value, where));
    } else if (key == "train_seqs_per_speaker") {
      spec.train_seqs_per_speaker =
          static_cast<int>(text::parse_long(value, where));
    } else if (key == "train_seq_length") {
      spec.train_seq_length = static_cast<int>(text::parse_long(value, where));
    } else {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ":" + std::to_string(line_no) +
                      ": unknown key '" + key + "'");
    }
  }
  if (!have_distractor_seed) spec.distractor_seed = spec.seed + 1;
  if (spec.n_speakers < 2 || spec.dim < 1 || spec.seq_length < 1 ||
      spec.trials_per_class < 1 || spec.phi_w_scale <= 0.0 ||
      spec.phi_b_scale < 0.0 || spec.splice_fraction < 0.0 ||
      spec.splice_fraction >= 1.0) {
    throw Error(ErrorCode::kMalformedFile,
                "generator spec " + path.string() + " has invalid values");
  }
  return spec;
}

void write_genspec(const GenSpec& spec, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  os << "# generator: " << Philox4x32::kName << " v" << Philox4x32::kVersion
     << '\n';
  os << "n_speakers = " << spec.n_speakers << '\n';
  os << "dim = " << spec.dim << '\n';
  os << "phi_b_scale = " << text::format_g9(spec.phi_b_scale) << '\n';
  os << "phi_w_scale = " << text::format_g9(spec.phi_w_scale) << '\n';
  os << "seed = " << spec.seed << '\n';
  os << "seq_length = " << spec.seq_length << '\n';
  os << "splice_fraction = " << text::format_g9(spec.splice_fraction) << '\n';
  os << "trials_per_class = " << spec.trials_per_class << '\n';
  os << "distractor_seed = " << spec.distractor_seed << '\n';
  os << "train_speakers = " << spec.train_speakers << '\n';
  os << "train_seqs_per_speaker = " << spec.train_seqs_per_speaker << '\n';
  os << "train_seq_length = " << spec.train_seq_length << '\n';
}

}  // namespace sdtwsv

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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sdtwsv/embedding_sequence.hpp"
#include "sdtwsv/verify.hpp"

namespace sdtwsv {

// Covariance for the synthetic population: either scale * identity or a
// full matrix.
struct CovarianceSpec {
  double scale = 1.0;
  Eigen::MatrixXd matrix;  // used when non-empty

  static CovarianceSpec scaled_identity(double scale);
  static CovarianceSpec full(Eigen::MatrixXd matrix);

  bool is_scaled_identity() const { return matrix.size() == 0; }
  Eigen::MatrixXd materialize(Eigen::Index dim) const;
  // F with F F' = covariance, for sampling; the eigen square root for full
  // matrices (PSD allowed), sqrt(scale) * I otherwise.
  Eigen::MatrixXd factor(Eigen::Index dim) const;
};

// Gaussian speaker population that matches the two-covariance PLDA model
// exactly: speaker means ~ N(0, between), embeddings ~ N(mean, within).
struct PopulationSpec {
  int n_speakers = 0;
  int dim = 0;
  CovarianceSpec between;  // PSD
  CovarianceSpec within;   // PD
  uint64_t seed = 0;
};

// Splices a contiguous run of ceil(splice_fraction * length) frames drawn
// around a distractor mean into a generated sequence, standing in for
// grossly mismatched content. When distractor_mean is empty, gen_trialset
// draws one per test sequence from N(0, between) seeded by distractor_seed.
struct MismatchSpec {
  double splice_fraction = 0.0;  // in [0, 1)
  uint64_t distractor_seed = 0;
  Eigen::VectorXd distractor_mean;  // optional; required by gen_sequence
};

// n_speakers x dim speaker means, deterministic in spec.seed.
Eigen::MatrixXd gen_population(const PopulationSpec& spec);

// length i.i.d. draws from N(mean, within), float32-quantized into an
// EmbeddingSequence. With a mismatch the spliced run keeps the same noise
// draws but replaces the mean with the distractor mean, so the run is
// contiguous and exactly ceil(splice_fraction * length) frames long.
EmbeddingSequence gen_sequence(std::string id,
                               const Eigen::Ref<const Eigen::VectorXd>& mean,
                               int length, const CovarianceSpec& within,
                               uint64_t seed,
                               const std::optional<MismatchSpec>& mismatch = {});

struct SynthTrialSet {
  std::vector<EmbeddingSequence> sequences;
  std::vector<Trial> trials;
};

// Balanced target/nontarget trials, one fresh enrolment and test sequence
// per trial. Test sequences are spliced when a mismatch is given; trials are
// tagged "spliced" or "clean" accordingly. Fully reproducible from
// (spec, mismatch seeds).
SynthTrialSet gen_trialset(const PopulationSpec& spec, int trials_per_class,
                           int seq_length,
                           const std::optional<MismatchSpec>& mismatch = {});

struct SynthTrainSet {
  std::vector<EmbeddingSequence> sequences;
  std::vector<std::string> speakers;  // label per sequence
};

// Labelled training sequences: seqs_per_speaker sequences for each of the
// spec's speakers.
SynthTrainSet gen_trainset(const PopulationSpec& spec, int seqs_per_speaker,
                           int seq_length);

// Independent substream of the seed for derived generation jobs.
uint64_t derive_seed(uint64_t seed, uint64_t salt);

// Key-value generator spec file; the header comment pins the random
// generator name and version.
struct GenSpec {
  int n_speakers = 20;
  int dim = 16;
  double phi_b_scale = 1.0;
  double phi_w_scale = 0.25;
  uint64_t seed = 1;
  int seq_length = 100;
  double splice_fraction = 0.0;
  int trials_per_class = 100;
  uint64_t distractor_seed = 0;  // defaults to seed + 1 when unset
  int train_speakers = 100;
  int train_seqs_per_speaker = 5;
  int train_seq_length = 20;
};

GenSpec read_genspec(const std::filesystem::path& path);
void write_genspec(const GenSpec& spec, const std::filesystem::path& path);

}  // namespace sdtwsv

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/eval.hpp"

using namespace sdtwsv;

TEST_SUITE("synth") {

TEST_CASE("gen_population determinism and degenerate covariance") {
  PopulationSpec spec;
  spec.n_speakers = 8;
  spec.dim = 4;
  spec.between = CovarianceSpec::scaled_identity(0.0);
  spec.within = CovarianceSpec::scaled_identity(1.0);
  spec.seed = 5;
  const Eigen::MatrixXd zeros = gen_population(spec);
  CHECK(zeros.norm() == 0.0);

  spec.between = CovarianceSpec::scaled_identity(2.0);
  const Eigen::MatrixXd a = gen_population(spec);
  const Eigen::MatrixXd b = gen_population(spec);
  CHECK(a == b);
  spec.seed = 6;
  CHECK(gen_population(spec) != a);
}

TEST_CASE("population sample covariance approaches the spec") {
  PopulationSpec spec;
  spec.n_speakers = 10000;
  spec.dim = 4;
  spec.between = CovarianceSpec::scaled_identity(1.0);
  spec.within = CovarianceSpec::scaled_identity(1.0);
  spec.seed = 7;
  const Eigen::MatrixXd means = gen_population(spec);
  const Eigen::MatrixXd covariance =
      means.transpose() * means / static_cast<double>(spec.n_speakers);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(4, 4);
  CHECK((covariance - identity).norm() / identity.norm() < 0.10);
}

TEST_CASE("within-speaker sample covariance approaches phi_w") {
  // Full-matrix covariance path: diagonal with spread eigenvalues.
  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(4, 4);
  within.diagonal() << 2.0, 1.0, 0.5, 0.25;
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(4, 3.0);
  const EmbeddingSequence seq =
      gen_sequence("big", mean, 100000, CovarianceSpec::full(within), 11);
  const FrameMatrix frames = to_double(seq);
  const Eigen::VectorXd sample_mean =
      frames.colwise().sum().transpose() / static_cast<double>(frames.rows());
  Eigen::MatrixXd centered = frames.rowwise() - sample_mean.transpose();
  const Eigen::MatrixXd covariance =
      centered.transpose() * centered / static_cast<double>(frames.rows());
  CHECK((sample_mean - mean).norm() < 0.05);
  CHECK((covariance - within).norm() / within.norm() < 0.10);
}

TEST_CASE("gen_sequence determinism, zero variance, and splicing") {
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(3, 1.5);

  SUBCASE("zero within variance repeats the mean exactly") {
    const EmbeddingSequence seq =
        gen_sequence("const", mean, 5, CovarianceSpec::scaled_identity(0.0), 3);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(seq.vectors(i, j) == 1.5f);
  }

  SUBCASE("same seed, same sequence") {
    const auto a =
        gen_sequence("a", mean, 20, CovarianceSpec::scaled_identity(1.0), 77);
    const auto b =
        gen_sequence("b", mean, 20, CovarianceSpec::scaled_identity(1.0), 77);
    CHECK(a.vectors == b.vectors);
  }

  SUBCASE("splice replaces an exact contiguous run") {
    MismatchSpec mismatch;
    mismatch.splice_fraction = 0.5;
    mismatch.distractor_seed = 1;
    mismatch.distractor_mean = Eigen::VectorXd::Constant(3, -40.0);
    const auto clean =
        gen_sequence("c", mean, 100, CovarianceSpec::scaled_identity(1.0), 13);
    const auto spliced = gen_sequence(
        "s", mean, 100, CovarianceSpec::scaled_identity(1.0), 13, mismatch);
    int first = -1, last = -1, differing = 0;
    for (int i = 0; i < 100; ++i) {
      if (clean.vectors.row(i) != spliced.vectors.row(i)) {
        ++differing;
        if (first < 0) first = i;
        last = i;
      }
    }
    CHECK(differing == 50);
    CHECK(last - first + 1 == 50);  // contiguous
  }
}

TEST_CASE("gen_trialset shape, balance, determinism") {
  PopulationSpec spec;
  spec.n_speakers = 6;
  spec.dim = 5;
  spec.between = CovarianceSpec::scaled_identity(4.0);
  spec.within = CovarianceSpec::scaled_identity(0.5);
  spec.seed = 17;

  const SynthTrialSet set = gen_trialset(spec, 10, 15);
  REQUIRE(set.trials.size() == 20);
  int targets = 0, nontargets = 0;
  for (const Trial& trial : set.trials) {
    targets += trial.label == TrialLabel::kTarget ? 1 : 0;
    nontargets += trial.label == TrialLabel::kNontarget ? 1 : 0;
    CHECK(trial.condition == "clean");
  }
  CHECK(targets == 10);
  CHECK(nontargets == 10);
  CHECK(set.sequences.size() == 40);  // one enrol + one test per trial

  const SynthTrialSet again = gen_trialset(spec, 10, 15);
  REQUIRE(again.sequences.size() == set.sequences.size());
  for (size_t i = 0; i < set.sequences.size(); ++i) {
    CHECK(again.sequences[i].id == set.sequences[i].id);
    CHECK(again.sequences[i].vectors == set.sequences[i].vectors);
  }
}

TEST_CASE("strongly separated population yields EER 0 under mean cosine") {
  PopulationSpec spec;
  spec.n_speakers = 10;
  spec.dim = 8;
  spec.between = CovarianceSpec::scaled_identity(100.0);
  spec.within = CovarianceSpec::scaled_identity(0.01);
  spec.seed = 19;
  const SynthTrialSet set = gen_trialset(spec, 100, 10);
  SequenceMap sequences;
  for (const auto& seq : set.sequences) sequences.emplace(seq.id, seq);

  ScoreRequest request;
  request.method = ScoreRequest::Method::kMean;
  request.threads = 2;
  const auto scored =
      score_trials(set.trials, sequences, LocalMetric::cosine(), request);
  CHECK(pooled_eer(scored) == 0.0);
}

TEST_CASE("spliced sequences: mean pooling suffers, clean run survives") {
  PopulationSpec spec;
  spec.n_speakers = 10;
  spec.dim = 8;
  spec.between = CovarianceSpec::scaled_identity(4.0);
  spec.within = CovarianceSpec::scaled_identity(0.25);
  spec.seed = 29;

  MismatchSpec mismatch;
  mismatch.splice_fraction = 0.45;
  mismatch.distractor_seed = 31;

  const SynthTrialSet clean = gen_trialset(spec, 40, 60);
  const SynthTrialSet spliced = gen_trialset(spec, 40, 60, mismatch);
  for (const Trial& trial : spliced.trials) {
    CHECK(trial.condition == "spliced");
  }

  const auto mean_target_score = [](const SynthTrialSet& set) {
    SequenceMap sequences;
    for (const auto& seq : set.sequences) sequences.emplace(seq.id, seq);
    ScoreRequest request;
    request.method = ScoreRequest::Method::kMean;
    request.threads = 2;
    const auto scored =
        score_trials(set.trials, sequences, LocalMetric::cosine(), request);
    double sum = 0.0;
    int count = 0;
    for (const auto& s : scored) {
      if (s.trial.label == TrialLabel::kTarget) {
        sum += s.score;
        ++count;
      }
    }
    return sum / count;
  };
  // Distractor content dilutes the pooled embedding of target trials.
  CHECK(mean_target_score(spliced) < mean_target_score(clean) - 0.02);

  // But SDTW still finds near-clean fragments: the best fragment of a
  // spliced target trial scores about as well as the clean-trial average.
  SequenceMap sequences;
  for (const auto& seq : spliced.sequences) sequences.emplace(seq.id, seq);
  ScoreRequest request;
  request.method = ScoreRequest::Method::kSdtw;
  request.sdtw = SdtwConfig{1, 20};
  request.agg = AggregationPolicy::min();
  request.threads = 2;
  const auto sdtw_scored =
      score_trials(spliced.trials, sequences, LocalMetric::cosine(), request);
  double target_sum = 0.0, nontarget_sum = 0.0;
  int target_count = 0, nontarget_count = 0;
  for (const auto& s : sdtw_scored) {
    if (s.trial.label == TrialLabel::kTarget) {
      target_sum += s.score;
      ++target_count;
    } else {
      nontarget_sum += s.score;
      ++nontarget_count;
    }
  }
  CHECK(target_sum / target_count > nontarget_sum / nontarget_count);
}

TEST_CASE("same-speaker SDTW beats different-speaker on most draws") {
  PopulationSpec spec;
  spec.n_speakers = 2;
  spec.dim = 6;
  spec.between = CovarianceSpec::scaled_identity(9.0);
  spec.within = CovarianceSpec::scaled_identity(0.25);
  spec.seed = 37;
  const Eigen::MatrixXd means = gen_population(spec);

  int wins = 0;
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) {
    const auto enrol = gen_sequence(
        "e", means.row(0), 12, spec.within, derive_seed(1000, k));
    const auto same = gen_sequence(
        "s", means.row(0), 12, spec.within, derive_seed(2000, k));
    const auto other = gen_sequence(
        "o", means.row(1), 12, spec.within, derive_seed(3000, k));
    const auto same_score = score_trial_sdtw(
        enrol, same, LocalMetric::cosine(), SdtwConfig{1, 4},
        AggregationPolicy::mean());
    const auto other_score = score_trial_sdtw(
        enrol, other, LocalMetric::cosine(), SdtwConfig{1, 4},
        AggregationPolicy::mean());
    wins += same_score.score > other_score.score ? 1 : 0;
  }
  CHECK(wins >= draws * 95 / 100);
}

TEST_CASE("genspec file round-trip and validation") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sdtwsv_synth_test";
  fs::create_directories(dir);

  GenSpec spec;
  spec.n_speakers = 12;
  spec.dim = 9;
  spec.phi_b_scale = 2.5;
  spec.phi_w_scale = 0.75;
  spec.seed = 99;
  spec.seq_length = 44;
  spec.splice_fraction = 0.3;
  spec.trials_per_class = 55;
  spec.distractor_seed = 100;
  write_genspec(spec, dir / "spec.txt");
  const GenSpec back = read_genspec(dir / "spec.txt");
  CHECK(back.n_speakers == 12);
  CHECK(back.dim == 9);
  CHECK(back.phi_b_scale == doctest::Approx(2.5));
  CHECK(back.phi_w_scale == doctest::Approx(0.75));
  CHECK(back.seed == 99);
  CHECK(back.seq_length == 44);
  CHECK(back.splice_fraction == doctest::Approx(0.3));
  CHECK(back.trials_per_class == 55);
  CHECK(back.distractor_seed == 100);

  {
    std::ofstream os(dir / "bad_key.txt");
    os << "n_speakers = 4\nwhatever = 1\n";
  }
  CHECK_THROWS_AS(read_genspec(dir / "bad_key.txt"), Error);

  {
    std::ofstream os(dir / "bad_generator.txt");
    os << "# generator: mt19937 v1\nn_speakers = 4\n";
  }
  CHECK_THROWS_AS(read_genspec(dir / "bad_generator.txt"), Error);
}

}  // TEST_SUITE

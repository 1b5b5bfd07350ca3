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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdtwsv/align.hpp"
#include "sdtwsv/embedding_sequence.hpp"
#include "sdtwsv/local_metric.hpp"

namespace sdtwsv {

enum class TrialLabel { kTarget, kNontarget, kUnknown };

TrialLabel parse_trial_label(const std::string& text);
std::string to_string(TrialLabel label);

// One enrolment/test pair to accept or reject. The condition tag is free
// form ("C1".."C8" style) and may be empty.
struct Trial {
  std::string enrol_id;
  std::string test_id;
  TrialLabel label = TrialLabel::kUnknown;
  std::string condition;
};

struct AggregationPolicy {
  enum class Kind { kMean, kLowestK, kMin };
  Kind kind = Kind::kMean;
  int k = 1;  // lowest-k only; clamped to the list length

  static AggregationPolicy mean() { return {Kind::kMean, 1}; }
  static AggregationPolicy lowest_k(int k) { return {Kind::kLowestK, k}; }
  static AggregationPolicy min() { return {Kind::kMin, 1}; }
};

AggregationPolicy parse_aggregation(const std::string& kind, int k);

// Combines fragment average distances into one distance. Empty input is an
// error: it means no fragment satisfied the length constraint and the caller
// should fall back to mean-embedding scoring.
double aggregate(std::span<const double> values,
                 const AggregationPolicy& policy);

// Similarity score for a trial: higher = more likely the same speaker.
struct TrialScore {
  Trial trial;
  double score = 0.0;
  int n_fragments = 0;
};

// Segmental-DTW trial score: negated aggregate of the fragment average
// distances over all regions whose optimal path reached the minimum
// fragment length. When no region does, falls back to the mean-embedding
// score for the same metric and reports n_fragments = 0.
TrialScore score_trial_sdtw(const EmbeddingSequence& enrol,
                            const EmbeddingSequence& test,
                            const LocalMetric& metric, const SdtwConfig& cfg,
                            const AggregationPolicy& policy);

// Mean-embedding baseline: each sequence is pooled into one vector (raw
// average for cosine, average of preprocessed rows for PLDA) and the pair is
// scored by cosine similarity or the PLDA log-likelihood ratio.
TrialScore score_trial_mean(const EmbeddingSequence& enrol,
                            const EmbeddingSequence& test,
                            const LocalMetric& metric);

// Variants on metric-prepared frame matrices; used by the scoring engine and
// parameter sweeps so sequences are prepared once.
double mean_score_prepared(const FrameMatrix& enrol, const FrameMatrix& test,
                           const LocalMetric& metric);
double sdtw_score_prepared(const FrameMatrix& enrol, const FrameMatrix& test,
                           const LocalMetric& metric, const SdtwConfig& cfg,
                           const AggregationPolicy& policy, int* n_fragments);
// Score from precomputed per-region paths plus the mean fallback.
double sdtw_score_from_paths(const std::vector<AlignmentPath>& paths,
                             const FrameMatrix& enrol, const FrameMatrix& test,
                             const LocalMetric& metric, int min_fragment_len,
                             const AggregationPolicy& policy,
                             int* n_fragments);

using SequenceMap = std::unordered_map<std::string, EmbeddingSequence>;

// Loads <id>.eseq for every id referenced by the trials.
SequenceMap load_sequences_for_trials(const std::filesystem::path& dir,
                                      const std::vector<Trial>& trials);

struct ScoreRequest {
  enum class Method { kSdtw, kMean };
  Method method = Method::kSdtw;
  SdtwConfig sdtw;
  AggregationPolicy agg = AggregationPolicy::mean();
  int threads = 1;
  // When set, an id may be a comma-separated list of sequence ids; the trial
  // score is the average over all enrol x test pairs.
  bool multi_id = false;
};

// Scores all trials; output order equals input order regardless of the
// thread count, and scores are bitwise independent of it.
std::vector<TrialScore> score_trials(const std::vector<Trial>& trials,
                                     const SequenceMap& sequences,
                                     const LocalMetric& metric,
                                     const ScoreRequest& request);

// weight * a + (1 - weight) * b over identical trial lists. With znorm each
// system is shifted/scaled to zero mean and unit variance over its list
// first.
std::vector<TrialScore> fuse(const std::vector<TrialScore>& a,
                             const std::vector<TrialScore>& b, double weight,
                             bool znorm = false);

// Accept iff score >= threshold.
bool decide(double score, double threshold);

// Trial list TSV: enrol_id, test_id, label, optional condition.
std::vector<Trial> read_trials(const std::filesystem::path& path);
void write_trials(const std::vector<Trial>& trials,
                  const std::filesystem::path& path);

// Score TSV: enrol_id, test_id, score (9 significant digits), n_fragments.
std::vector<TrialScore> read_scores(const std::filesystem::path& path);
void write_scores(const std::vector<TrialScore>& scores,
                  const std::filesystem::path& path);

}  // namespace sdtwsv

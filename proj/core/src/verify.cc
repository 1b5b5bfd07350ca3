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

#include "sdtwsv/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdtwsv/errors.hpp"
#include "parallel.hpp"
#include "text_format.hpp"

namespace sdtwsv {

namespace {

std::vector<std::string> split_ids(const std::string& field) {
  std::vector<std::string> ids;
  size_t begin = 0;
  while (true) {
    const size_t comma = field.find(',', begin);
    if (comma == std::string::npos) {
      ids.push_back(field.substr(begin));
      break;
    }
    ids.push_back(field.substr(begin, comma - begin));
    begin = comma + 1;
  }
  return ids;
}

const EmbeddingSequence& sequence_or_throw(const SequenceMap& sequences,
                                           const std::string& id) {
  const auto it = sequences.find(id);
  if (it == sequences.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "trial references unknown sequence id '" + id + "'");
  }
  return it->second;
}

}  // namespace

TrialLabel parse_trial_label(const std::string& text) {
  if (text == "target") return TrialLabel::kTarget;
  if (text == "nontarget") return TrialLabel::kNontarget;
  if (text == "unknown") return TrialLabel::kUnknown;
  throw Error(ErrorCode::kMalformedFile,
              "unknown trial label '" + text + "'");
}

std::string to_string(TrialLabel label) {
  switch (label) {
    case TrialLabel::kTarget:
      return "target";
    case TrialLabel::kNontarget:
      return "nontarget";
    case TrialLabel::kUnknown:
      return "unknown";
  }
  return "unknown";
}

AggregationPolicy parse_aggregation(const std::string& kind, int k) {
  if (kind == "mean") return AggregationPolicy::mean();
  if (kind == "min") return AggregationPolicy::min();
  if (kind == "lowest_k") {
    if (k < 1) {
      throw Error(ErrorCode::kInvalidArgument, "lowest_k needs k >= 1");
    }
    return AggregationPolicy::lowest_k(k);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown aggregation '" + kind + "'");
}

double aggregate(std::span<const double> values,
                 const AggregationPolicy& policy) {
  if (values.empty()) {
    throw Error(ErrorCode::kDomainError,
                "no valid alignment: no fragment met the length constraint");
  }
  switch (policy.kind) {
    case AggregationPolicy::Kind::kMean: {
      double sum = 0.0;
      for (double v : values) sum += v;
      return sum / static_cast<double>(values.size());
    }
    case AggregationPolicy::Kind::kLowestK: {
      if (policy.k < 1) {
        throw Error(ErrorCode::kInvalidArgument, "lowest_k needs k >= 1");
      }
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      const size_t k =
          std::min(sorted.size(), static_cast<size_t>(policy.k));
      double sum = 0.0;
      for (size_t i = 0; i < k; ++i) sum += sorted[i];
      return sum / static_cast<double>(k);
    }
    case AggregationPolicy::Kind::kMin:
      return *std::min_element(values.begin(), values.end());
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregation kind");
}

double mean_score_prepared(const FrameMatrix& enrol, const FrameMatrix& test,
                           const LocalMetric& metric) {
  const Eigen::VectorXd mean_e =
      enrol.colwise().sum().transpose() / static_cast<double>(enrol.rows());
  const Eigen::VectorXd mean_t =
      test.colwise().sum().transpose() / static_cast<double>(test.rows());
  if (metric.kind() == MetricKind::kCosine) {
    // Cosine similarity of the pooled embeddings; the renormalization of the
    // means cancels in the ratio.
    return 1.0 - cosine_distance(mean_e, mean_t);
  }
  return plda_score(*metric.model(), mean_e, mean_t);
}

double sdtw_score_from_paths(const std::vector<AlignmentPath>& paths,
                             const FrameMatrix& enrol, const FrameMatrix& test,
                             const LocalMetric& metric, int min_fragment_len,
                             const AggregationPolicy& policy,
                             int* n_fragments) {
  const std::vector<Fragment> fragments =
      fragments_from_paths(paths, min_fragment_len);
  std::vector<double> dists;
  dists.reserve(fragments.size());
  for (const Fragment& fragment : fragments) {
    if (!fragment.short_path) dists.push_back(fragment.avg_dist);
  }
  if (n_fragments != nullptr) {
    *n_fragments = static_cast<int>(dists.size());
  }
  if (dists.empty()) {
    return mean_score_prepared(enrol, test, metric);
  }
  // Distances become similarities exactly once, at this boundary.
  return -aggregate(dists, policy);
}

double sdtw_score_prepared(const FrameMatrix& enrol, const FrameMatrix& test,
                           const LocalMetric& metric, const SdtwConfig& cfg,
                           const AggregationPolicy& policy, int* n_fragments) {
  const auto paths = sdtw_paths(enrol, test, metric, cfg.band_radius);
  return sdtw_score_from_paths(paths, enrol, test, metric,
                               cfg.min_fragment_len, policy, n_fragments);
}

TrialScore score_trial_sdtw(const EmbeddingSequence& enrol,
                            const EmbeddingSequence& test,
                            const LocalMetric& metric, const SdtwConfig& cfg,
                            const AggregationPolicy& policy) {
  const FrameMatrix prepared_e = metric.prepare(enrol);
  const FrameMatrix prepared_t = metric.prepare(test);
  TrialScore result;
  result.trial = Trial{enrol.id, test.id, TrialLabel::kUnknown, ""};
  result.score = sdtw_score_prepared(prepared_e, prepared_t, metric, cfg,
                                     policy, &result.n_fragments);
  return result;
}

TrialScore score_trial_mean(const EmbeddingSequence& enrol,
                            const EmbeddingSequence& test,
                            const LocalMetric& metric) {
  const FrameMatrix prepared_e = metric.prepare(enrol);
  const FrameMatrix prepared_t = metric.prepare(test);
  TrialScore result;
  result.trial = Trial{enrol.id, test.id, TrialLabel::kUnknown, ""};
  result.n_fragments = 0;
  result.score = mean_score_prepared(prepared_e, prepared_t, metric);
  return result;
}

SequenceMap load_sequences_for_trials(const std::filesystem::path& dir,
                                      const std::vector<Trial>& trials) {
  SequenceMap sequences;
  for (const Trial& trial : trials) {
    for (const std::string& field : {trial.enrol_id, trial.test_id}) {
      for (const std::string& id : split_ids(field)) {
        if (sequences.count(id)) continue;
        EmbeddingSequence seq = read_sequence(dir / (id + ".eseq"));
        if (seq.id != id) {
          throw Error(ErrorCode::kMalformedFile,
                      "sequence file " + (dir / (id + ".eseq")).string() +
                          " carries id '" + seq.id + "'");
        }
        sequences.emplace(id, std::move(seq));
      }
    }
  }
  return sequences;
}

std::vector<TrialScore> score_trials(const std::vector<Trial>& trials,
                                     const SequenceMap& sequences,
                                     const LocalMetric& metric,
                                     const ScoreRequest& request) {
  // Prepare every referenced sequence once, in parallel.
  std::vector<const EmbeddingSequence*> unique_seqs;
  std::unordered_map<std::string, size_t> prepared_index;
  for (const Trial& trial : trials) {
    for (const std::string& field : {trial.enrol_id, trial.test_id}) {
      const auto ids = request.multi_id ? split_ids(field)
                                        : std::vector<std::string>{field};
      for (const std::string& id : ids) {
        if (prepared_index.count(id)) continue;
        prepared_index.emplace(id, unique_seqs.size());
        unique_seqs.push_back(&sequence_or_throw(sequences, id));
      }
    }
  }
  std::vector<FrameMatrix> prepared(unique_seqs.size());
  parallel_for(unique_seqs.size(), request.threads, [&](size_t i) {
    prepared[i] = metric.prepare(*unique_seqs[i]);
  });

  const auto score_pair = [&](const FrameMatrix& e, const FrameMatrix& t,
                              int* n_fragments) {
    if (request.method == ScoreRequest::Method::kMean) {
      if (n_fragments != nullptr) *n_fragments = 0;
      return mean_score_prepared(e, t, metric);
    }
    return sdtw_score_prepared(e, t, metric, request.sdtw, request.agg,
                               n_fragments);
  };

  std::vector<TrialScore> results(trials.size());
  parallel_for(trials.size(), request.threads, [&](size_t i) {
    const Trial& trial = trials[i];
    TrialScore& out = results[i];
    out.trial = trial;
    if (!request.multi_id) {
      const FrameMatrix& e = prepared[prepared_index.at(trial.enrol_id)];
      const FrameMatrix& t = prepared[prepared_index.at(trial.test_id)];
      out.score = score_pair(e, t, &out.n_fragments);
      return;
    }
    // Multiple enrolment/test sequences: average the pairwise trial scores.
    const auto enrol_ids = split_ids(trial.enrol_id);
    const auto test_ids = split_ids(trial.test_id);
    double sum = 0.0;
    int fragments = 0;
    for (const auto& eid : enrol_ids) {
      for (const auto& tid : test_ids) {
        int n = 0;
        sum += score_pair(prepared[prepared_index.at(eid)],
                          prepared[prepared_index.at(tid)], &n);
        fragments += n;
      }
    }
    const double pairs =
        static_cast<double>(enrol_ids.size()) * test_ids.size();
    out.score = sum / pairs;
    out.n_fragments = fragments;
  });
  return results;
}

std::vector<TrialScore> fuse(const std::vector<TrialScore>& a,
                             const std::vector<TrialScore>& b, double weight,
                             bool znorm) {
  if (weight < 0.0 || weight > 1.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "fusion weight must lie in [0, 1]");
  }
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "fusion needs identical trial lists (size mismatch)");
  }
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].trial.enrol_id != b[i].trial.enrol_id ||
        a[i].trial.test_id != b[i].trial.test_id) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fusion trial mismatch at row " + std::to_string(i + 1));
    }
  }
  const auto normalized = [&](const std::vector<TrialScore>& scores) {
    std::vector<double> values(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) values[i] = scores[i].score;
    if (!znorm) return values;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    const double sigma = std::sqrt(var);
    for (double& v : values) v = sigma > 0.0 ? (v - mean) / sigma : 0.0;
    return values;
  };
  const std::vector<double> va = normalized(a);
  const std::vector<double> vb = normalized(b);
  std::vector<TrialScore> fused(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    fused[i].trial = a[i].trial;
    fused[i].score = weight * va[i] + (1.0 - weight) * vb[i];
    fused[i].n_fragments = a[i].n_fragments + b[i].n_fragments;
  }
  return fused;
}

bool decide(double score, double threshold) {
  if (!std::isfinite(score)) {
    throw Error(ErrorCode::kNonFiniteValue, "cannot decide on a non-finite score");
  }
  return score >= threshold;
}

std::vector<Trial> read_trials(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open trial list " + path.string());
  }
  std::vector<Trial> trials;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::split_tsv(line);
    if (fields.size() != 3 && fields.size() != 4) {
      throw Error(ErrorCode::kMalformedFile,
                  "trial list " + path.string() + ":" +
                      std::to_string(line_no) +
                      " must have 3 or 4 tab-separated fields");
    }
    Trial trial;
    trial.enrol_id = fields[0];
    trial.test_id = fields[1];
    trial.label = parse_trial_label(fields[2]);
    if (fields.size() == 4) trial.condition = fields[3];
    trials.push_back(std::move(trial));
  }
  if (trials.empty()) {
    throw Error(ErrorCode::kMalformedFile,
                "trial list " + path.string() + " is empty");
  }
  return trials;
}

void write_trials(const std::vector<Trial>& trials,
                  const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  for (const Trial& trial : trials) {
    os << trial.enrol_id << '\t' << trial.test_id << '\t'
       << to_string(trial.label);
    if (!trial.condition.empty()) os << '\t' << trial.condition;
    os << '\n';
  }
}

std::vector<TrialScore> read_scores(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open score file " + path.string());
  }
  std::vector<TrialScore> scores;
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::split_tsv(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kMalformedFile,
                  "score file " + path.string() + ":" +
                      std::to_string(line_no) +
                      " must have 4 tab-separated fields");
    }
    TrialScore score;
    score.trial.enrol_id = fields[0];
    score.trial.test_id = fields[1];
    score.score = text::parse_double(fields[2], path.string());
    if (!std::isfinite(score.score)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite score in " + path.string() + ":" +
                      std::to_string(line_no));
    }
    score.n_fragments =
        static_cast<int>(text::parse_long(fields[3], path.string()));
    scores.push_back(std::move(score));
  }
  if (scores.empty()) {
    throw Error(ErrorCode::kMalformedFile,
                "score file " + path.string() + " is empty");
  }
  return scores;
}

void write_scores(const std::vector<TrialScore>& scores,
                  const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  for (const TrialScore& score : scores) {
    os << score.trial.enrol_id << '\t' << score.trial.test_id << '\t'
       << text::format_g9(score.score) << '\t' << score.n_fragments << '\n';
  }
}

}  // namespace sdtwsv

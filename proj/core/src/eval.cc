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

#include "sdtwsv/eval.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "sdtwsv/errors.hpp"
#include "parallel.hpp"
#include "text_format.hpp"

namespace sdtwsv {

namespace {

// (FA, FR) at a threshold, with accept iff score >= threshold.
std::pair<double, double> error_rates(const std::vector<double>& targets_sorted,
                                      const std::vector<double>& nontargets_sorted,
                                      double threshold) {
  const auto below_t = std::lower_bound(targets_sorted.begin(),
                                        targets_sorted.end(), threshold) -
                       targets_sorted.begin();
  const auto below_n = std::lower_bound(nontargets_sorted.begin(),
                                        nontargets_sorted.end(), threshold) -
                       nontargets_sorted.begin();
  const double fr =
      static_cast<double>(below_t) / static_cast<double>(targets_sorted.size());
  const double fa =
      static_cast<double>(nontargets_sorted.size() - below_n) /
      static_cast<double>(nontargets_sorted.size());
  return {fa, fr};
}

struct RatePoints {
  std::vector<double> thresholds;  // distinct scores, ascending
  std::vector<std::pair<double, double>> rates;  // (FA, FR) per threshold
  std::vector<double> targets_sorted, nontargets_sorted;
};

RatePoints rate_points(std::span<const double> target_scores,
                       std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty()) {
    throw Error(ErrorCode::kDomainError,
                "EER needs at least one target and one nontarget score");
  }
  RatePoints pts;
  pts.targets_sorted.assign(target_scores.begin(), target_scores.end());
  pts.nontargets_sorted.assign(nontarget_scores.begin(),
                               nontarget_scores.end());
  std::sort(pts.targets_sorted.begin(), pts.targets_sorted.end());
  std::sort(pts.nontargets_sorted.begin(), pts.nontargets_sorted.end());
  std::set<double> distinct(pts.targets_sorted.begin(),
                            pts.targets_sorted.end());
  distinct.insert(pts.nontargets_sorted.begin(), pts.nontargets_sorted.end());
  for (double threshold : distinct) {
    pts.thresholds.push_back(threshold);
    pts.rates.push_back(
        error_rates(pts.targets_sorted, pts.nontargets_sorted, threshold));
  }
  return pts;
}

double eer_from_rates(const RatePoints& pts) {
  // FA - FR is non-increasing over the swept thresholds. Extend the sweep
  // with threshold -inf (FA 1, FR 0) and +inf (FA 0, FR 1) so a sign change
  // always exists, then interpolate linearly inside the bracketing segment.
  std::vector<std::pair<double, double>> rates;
  rates.reserve(pts.rates.size() + 2);
  rates.emplace_back(1.0, 0.0);
  rates.insert(rates.end(), pts.rates.begin(), pts.rates.end());
  rates.emplace_back(0.0, 1.0);
  for (size_t k = 0; k + 1 < rates.size(); ++k) {
    const double diff_a = rates[k].first - rates[k].second;
    const double diff_b = rates[k + 1].first - rates[k + 1].second;
    if (diff_a < 0.0 || diff_b > 0.0) continue;
    if (diff_a == diff_b) return rates[k].first;  // both zero
    const double t = diff_a / (diff_a - diff_b);
    return rates[k].first + t * (rates[k + 1].first - rates[k].first);
  }
  throw Error(ErrorCode::kDomainError, "no EER crossing found");
}

}  // namespace

double compute_eer(std::span<const double> target_scores,
                   std::span<const double> nontarget_scores) {
  return eer_from_rates(rate_points(target_scores, nontarget_scores));
}

DetCurve det_points(std::span<const double> target_scores,
                    std::span<const double> nontarget_scores) {
  const RatePoints pts = rate_points(target_scores, nontarget_scores);
  DetCurve curve;
  curve.points = pts.rates;
  curve.eer = eer_from_rates(pts);
  return curve;
}

std::vector<TrialScore> join_scores_with_trials(
    const std::vector<TrialScore>& scores, const std::vector<Trial>& trials) {
  std::map<std::pair<std::string, std::string>, const Trial*> index;
  for (const Trial& trial : trials) {
    index[{trial.enrol_id, trial.test_id}] = &trial;
  }
  std::vector<TrialScore> joined;
  joined.reserve(scores.size());
  for (const TrialScore& score : scores) {
    const auto it =
        index.find({score.trial.enrol_id, score.trial.test_id});
    if (it == index.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "score for (" + score.trial.enrol_id + ", " +
                      score.trial.test_id + ") has no matching trial");
    }
    TrialScore out = score;
    out.trial = *it->second;
    joined.push_back(std::move(out));
  }
  return joined;
}

ConditionReport condition_report(const std::vector<TrialScore>& scored,
                                 const std::vector<std::string>& conditions) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>
      by_condition;  // tag -> (targets, nontargets)
  for (const std::string& tag : conditions) {
    by_condition[tag];
  }
  for (const TrialScore& s : scored) {
    const std::string tag =
        s.trial.condition.empty() ? "all" : s.trial.condition;
    if (!conditions.empty() && !by_condition.count(tag)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trial condition '" + tag + "' is not in the expected set");
    }
    switch (s.trial.label) {
      case TrialLabel::kTarget:
        by_condition[tag].first.push_back(s.score);
        break;
      case TrialLabel::kNontarget:
        by_condition[tag].second.push_back(s.score);
        break;
      case TrialLabel::kUnknown:
        throw Error(ErrorCode::kDomainError,
                    "cannot evaluate a trial with unknown label");
    }
  }
  ConditionReport report;
  double sum = 0.0;
  for (const auto& [tag, lists] : by_condition) {
    if (lists.first.empty() || lists.second.empty()) {
      throw Error(ErrorCode::kDomainError,
                  "condition '" + tag +
                      "' is missing target or nontarget trials");
    }
    const double eer = compute_eer(lists.first, lists.second);
    report.per_condition.emplace_back(tag, eer);
    sum += eer;
  }
  report.average = sum / static_cast<double>(report.per_condition.size());
  return report;
}

double pooled_eer(const std::vector<TrialScore>& scored) {
  std::vector<double> targets, nontargets;
  for (const TrialScore& s : scored) {
    switch (s.trial.label) {
      case TrialLabel::kTarget:
        targets.push_back(s.score);
        break;
      case TrialLabel::kNontarget:
        nontargets.push_back(s.score);
        break;
      case TrialLabel::kUnknown:
        throw Error(ErrorCode::kDomainError,
                    "cannot evaluate a trial with unknown label");
    }
  }
  return compute_eer(targets, nontargets);
}

std::vector<SweepCell> sweep(const std::vector<Trial>& trials,
                             const SequenceMap& sequences,
                             const std::vector<LocalMetric>& metrics,
                             const std::vector<int>& band_radii,
                             const std::vector<int>& min_fragment_lens,
                             const AggregationPolicy& policy, int threads) {
  if (trials.empty() || metrics.empty() || band_radii.empty() ||
      min_fragment_lens.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sweep needs trials, metrics and non-empty parameter lists");
  }
  bool tagged = true;
  for (const Trial& trial : trials) {
    if (trial.condition.empty()) tagged = false;
  }

  std::vector<SweepCell> cells;
  for (const LocalMetric& metric : metrics) {
    // Prepare sequences once per metric.
    std::vector<const EmbeddingSequence*> unique_seqs;
    std::unordered_map<std::string, size_t> index;
    for (const Trial& trial : trials) {
      for (const std::string& id : {trial.enrol_id, trial.test_id}) {
        if (index.count(id)) continue;
        const auto it = sequences.find(id);
        if (it == sequences.end()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "trial references unknown sequence id '" + id + "'");
        }
        index.emplace(id, unique_seqs.size());
        unique_seqs.push_back(&it->second);
      }
    }
    std::vector<FrameMatrix> prepared(unique_seqs.size());
    parallel_for(unique_seqs.size(), threads, [&](size_t i) {
      prepared[i] = metric.prepare(*unique_seqs[i]);
    });

    for (int radius : band_radii) {
      // One DP pass per trial serves every fragment length.
      std::vector<std::vector<double>> scores(
          min_fragment_lens.size(), std::vector<double>(trials.size()));
      parallel_for(trials.size(), threads, [&](size_t t) {
        const FrameMatrix& e = prepared[index.at(trials[t].enrol_id)];
        const FrameMatrix& x = prepared[index.at(trials[t].test_id)];
        const auto paths = sdtw_paths(e, x, metric, radius);
        for (size_t li = 0; li < min_fragment_lens.size(); ++li) {
          scores[li][t] = sdtw_score_from_paths(
              paths, e, x, metric, min_fragment_lens[li], policy, nullptr);
        }
      });
      for (size_t li = 0; li < min_fragment_lens.size(); ++li) {
        std::vector<TrialScore> scored(trials.size());
        for (size_t t = 0; t < trials.size(); ++t) {
          scored[t].trial = trials[t];
          scored[t].score = scores[li][t];
        }
        SweepCell cell;
        cell.metric = metric.kind();
        cell.band_radius = radius;
        cell.min_fragment_len = min_fragment_lens[li];
        cell.avg_eer = tagged ? condition_report(scored).average
                              : pooled_eer(scored);
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

void write_report(const ConditionReport& report,
                  const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  for (const auto& [tag, eer] : report.per_condition) {
    os << tag << '\t' << text::format_g9(eer) << '\n';
  }
  os << "average\t" << text::format_g9(report.average) << '\n';
}

void write_sweep(const std::vector<SweepCell>& cells,
                 const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  for (const SweepCell& cell : cells) {
    os << (cell.metric == MetricKind::kCosine ? "cosine" : "plda") << '\t'
       << cell.band_radius << '\t' << cell.min_fragment_len << '\t'
       << text::format_g9(cell.avg_eer) << '\n';
  }
}

}  // namespace sdtwsv

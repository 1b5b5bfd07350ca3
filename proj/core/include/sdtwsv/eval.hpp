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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdtwsv/verify.hpp"

namespace sdtwsv {

// Equal error rate from similarity scores (higher = target). Sweeps the
// accept-iff-score>=threshold rule over the distinct score values; the false
// accept rate is then non-increasing and the false reject rate
// non-decreasing, and the EER is read off by linear interpolation where the
// two staircases cross.
double compute_eer(std::span<const double> target_scores,
                   std::span<const double> nontarget_scores);

struct DetCurve {
  // (false-accept rate, false-reject rate), one point per distinct score
  // value taken as the threshold, in increasing threshold order.
  std::vector<std::pair<double, double>> points;
  double eer = 0.0;
};

DetCurve det_points(std::span<const double> target_scores,
                    std::span<const double> nontarget_scores);

struct ConditionReport {
  std::vector<std::pair<std::string, double>> per_condition;  // sorted by tag
  double average = 0.0;
};

// Per-condition EER plus the unweighted average across conditions. Trials
// must carry target/nontarget labels; every condition needs at least one of
// each. When `conditions` is non-empty it fixes the expected tag set and a
// trial outside it is an error; otherwise the tags found in the data are
// used. Untagged trials fall under the tag "all".
ConditionReport condition_report(const std::vector<TrialScore>& scored,
                                 const std::vector<std::string>& conditions = {});

// Single EER over all trials, ignoring condition tags.
double pooled_eer(const std::vector<TrialScore>& scored);

// Attaches labels and conditions from a trial list to bare scores, matching
// by (enrol_id, test_id); order follows the score list.
std::vector<TrialScore> join_scores_with_trials(
    const std::vector<TrialScore>& scores, const std::vector<Trial>& trials);

struct SweepCell {
  MetricKind metric = MetricKind::kCosine;
  int band_radius = 1;
  int min_fragment_len = 30;
  double avg_eer = 0.0;
};

// Segmental-DTW scoring over the full (metric, band radius, fragment length)
// grid. Per-region paths are shared across the fragment-length axis, so each
// (metric, radius) pair runs the dynamic programming once per trial. The
// reported figure is the condition-averaged EER (pooled when no trial
// carries a condition tag).
std::vector<SweepCell> sweep(const std::vector<Trial>& trials,
                             const SequenceMap& sequences,
                             const std::vector<LocalMetric>& metrics,
                             const std::vector<int>& band_radii,
                             const std::vector<int>& min_fragment_lens,
                             const AggregationPolicy& policy, int threads);

// Report TSV: one "condition<TAB>eer" row per condition plus an "average"
// row. Sweep TSV: metric, band radius, fragment length, average EER.
void write_report(const ConditionReport& report,
                  const std::filesystem::path& path);
void write_sweep(const std::vector<SweepCell>& cells,
                 const std::filesystem::path& path);

}  // namespace sdtwsv

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

#include <span>
#include <utility>
#include <vector>

#include "sdtwsv/embedding_sequence.hpp"
#include "sdtwsv/local_metric.hpp"

namespace sdtwsv {

// A partial-alignment region: the anchored start cell plus the diagonal band
// |(i - start_i) - (j - start_j)| <= band_radius of width 2*band_radius + 1.
struct Region {
  int start_i = 1;  // 1-based
  int start_j = 1;
  int band_radius = 1;
};

// A monotone alignment path. Steps advance by (1,0), (0,1) or (1,1); the
// accumulated distance is the sum of the per-step local distances.
struct AlignmentPath {
  std::vector<std::pair<int, int>> steps;  // 1-based (i, j)
  std::vector<double> step_dists;
  double accumulated = 0.0;

  int length() const { return static_cast<int>(steps.size()); }
};

// Contiguous subpath [begin, end] (1-based positions into the parent path)
// with its average local distance. short_path marks paths whose total length
// was below the minimum fragment length; such fragments are kept for
// diagnostics but excluded from score aggregation.
struct Fragment {
  int region_index = 0;
  int begin = 1;
  int end = 1;
  double avg_dist = 0.0;
  bool short_path = false;

  int length() const { return end - begin + 1; }
};

struct SdtwConfig {
  int band_radius = 1;       // R
  int min_fragment_len = 30;  // L
};

// Start cells of all partial-alignment regions for sequence lengths
// (len_x, len_y): down the first column at rows 1, 2R+2, 4R+3, ... and
// across the first row at the same spacing, the (1,1) start listed once.
std::vector<std::pair<int, int>> region_starts(int len_x, int len_y,
                                               int band_radius);

// Minimum-cost path that starts at the region's start cell, stays inside the
// band, and ends at its first cell on the terminal frontier i = rows(X) or
// j = rows(Y). Ties between frontier cells break toward smaller i then
// smaller j; ties between predecessors prefer diagonal, then vertical, then
// horizontal. A start cell already on the frontier yields a single-cell path.
AlignmentPath banded_dtw(const FrameMatrix& x, const FrameMatrix& y,
                         const LocalMetric& metric, const Region& region);

struct MinAvgWindow {
  int begin = 1;  // 1-based, inclusive
  int end = 1;
  double avg = 0.0;
};

// The contiguous window of length >= min(min_len, list length) minimizing
// the mean value; ties break toward the earliest begin, then the shortest
// window. Runs in O(n * min_len): a window of length >= 2*min_len always
// contains a length-min_len prefix with average <= its own, so only lengths
// up to 2*min_len - 1 need scanning.
MinAvgWindow min_avg_fragment(std::span<const double> step_dists, int min_len);

// One banded DTW per staggered region start; paths returned in region
// order.
std::vector<AlignmentPath> sdtw_paths(const FrameMatrix& x,
                                      const FrameMatrix& y,
                                      const LocalMetric& metric,
                                      int band_radius);

// Best fragment of each path, flagged short when the whole path is below
// min_len.
std::vector<Fragment> fragments_from_paths(
    const std::vector<AlignmentPath>& paths, int min_len);

// Full segmental DTW: one fragment per region.
std::vector<Fragment> sdtw(const FrameMatrix& x, const FrameMatrix& y,
                           const LocalMetric& metric, const SdtwConfig& cfg);

}  // namespace sdtwsv

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

#include "sdtwsv/align.hpp"

#include <algorithm>
#include <limits>

#include "sdtwsv/errors.hpp"

namespace sdtwsv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Band-local dynamic-programming grid for one region. Row r covers the
// cells of sequence index i = start_i + r; within a row the band admits
// columns j with (i - start_i) - band_radius <= j - start_j <=
// (i - start_i) + band_radius, stored at band offset j - j_min(r).
struct BandGrid {
  int start_i, start_j, radius, rows, cols, width;

  BandGrid(const Region& region, int len_x, int len_y)
      : start_i(region.start_i),
        start_j(region.start_j),
        radius(region.band_radius),
        rows(len_x - region.start_i + 1),
        cols(len_y),
        width(2 * region.band_radius + 1),
        cost(static_cast<size_t>(rows) * width, kInf),
        dist(static_cast<size_t>(rows) * width, 0.0),
        pred(static_cast<size_t>(rows) * width, kNone) {}

  int j_min(int r) const { return std::max(start_j, start_j + r - radius); }
  int j_max(int r) const { return std::min(cols, start_j + r + radius); }

  double& cost_at(int r, int j) { return cost[index(r, j)]; }
  double& dist_at(int r, int j) { return dist[index(r, j)]; }
  uint8_t& pred_at(int r, int j) { return pred[index(r, j)]; }

  bool in_band(int r, int j) const {
    return r >= 0 && r < rows && j >= j_min(r) && j <= j_max(r);
  }

  static constexpr uint8_t kNone = 0;
  static constexpr uint8_t kStart = 1;
  static constexpr uint8_t kDiagonal = 2;
  static constexpr uint8_t kVertical = 3;
  static constexpr uint8_t kHorizontal = 4;

 private:
  size_t index(int r, int j) const {
    return static_cast<size_t>(r) * width + (j - j_min(r));
  }

  std::vector<double> cost;
  std::vector<double> dist;
  std::vector<uint8_t> pred;
};

}  // namespace

std::vector<std::pair<int, int>> region_starts(int len_x, int len_y,
                                               int band_radius) {
  if (len_x < 1 || len_y < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sequence lengths must be >= 1");
  }
  if (band_radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "band radius must be >= 0");
  }
  const int spacing = 2 * band_radius + 1;
  std::vector<std::pair<int, int>> starts;
  for (int k = 0; spacing * k + 1 <= len_x; ++k) {
    starts.emplace_back(spacing * k + 1, 1);
  }
  for (int l = 1; spacing * l + 1 <= len_y; ++l) {
    starts.emplace_back(1, spacing * l + 1);
  }
  return starts;
}

AlignmentPath banded_dtw(const FrameMatrix& x, const FrameMatrix& y,
                         const LocalMetric& metric, const Region& region) {
  const int len_x = static_cast<int>(x.rows());
  const int len_y = static_cast<int>(y.rows());
  if (x.cols() != y.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sequences must share one embedding dimension");
  }
  if (region.start_i < 1 || region.start_i > len_x || region.start_j < 1 ||
      region.start_j > len_y) {
    throw Error(ErrorCode::kInvalidArgument,
                "region start outside the distance matrix");
  }
  if (region.band_radius < 0) {
    throw Error(ErrorCode::kInvalidArgument, "band radius must be >= 0");
  }

  BandGrid grid(region, len_x, len_y);
  const auto local = [&](int i, int j) {
    return metric.distance(x.row(i - 1).transpose(), y.row(j - 1).transpose());
  };
  const auto is_terminal = [&](int i, int j) {
    return i == len_x || j == len_y;
  };

  {
    const double d = local(region.start_i, region.start_j);
    grid.cost_at(0, region.start_j) = d;
    grid.dist_at(0, region.start_j) = d;
    grid.pred_at(0, region.start_j) = BandGrid::kStart;
  }

  // Fill row by row. A cell extends only from non-terminal predecessors:
  // a path must stop at its first frontier cell, so frontier cells have no
  // outgoing transitions. Local distances are evaluated lazily, only for
  // cells some path can actually reach.
  for (int r = 0; r < grid.rows; ++r) {
    const int i = region.start_i + r;
    const int lo = grid.j_min(r);
    const int hi = grid.j_max(r);
    if (lo > grid.cols) break;  // band has moved past the last column
    for (int j = lo; j <= hi; ++j) {
      if (r == 0 && j == region.start_j) continue;
      double best = kInf;
      uint8_t from = BandGrid::kNone;
      // Diagonal, vertical, horizontal; strict improvement keeps the
      // preference order on ties.
      if (grid.in_band(r - 1, j - 1) && !is_terminal(i - 1, j - 1)) {
        const double c = grid.cost_at(r - 1, j - 1);
        if (c < best) {
          best = c;
          from = BandGrid::kDiagonal;
        }
      }
      if (grid.in_band(r - 1, j) && !is_terminal(i - 1, j)) {
        const double c = grid.cost_at(r - 1, j);
        if (c < best) {
          best = c;
          from = BandGrid::kVertical;
        }
      }
      if (grid.in_band(r, j - 1) && !is_terminal(i, j - 1)) {
        const double c = grid.cost_at(r, j - 1);
        if (c < best) {
          best = c;
          from = BandGrid::kHorizontal;
        }
      }
      if (from == BandGrid::kNone || best == kInf) continue;  // unreachable
      const double d = local(i, j);
      grid.cost_at(r, j) = best + d;
      grid.dist_at(r, j) = d;
      grid.pred_at(r, j) = from;
    }
  }

  // Pick the reachable frontier cell with minimal accumulated distance;
  // scan order (increasing i, then j) implements the tie rule.
  int best_r = -1, best_j = -1;
  double best_cost = kInf;
  for (int r = 0; r < grid.rows; ++r) {
    const int i = region.start_i + r;
    const int lo = grid.j_min(r);
    const int hi = grid.j_max(r);
    if (lo > grid.cols) break;
    for (int j = lo; j <= hi; ++j) {
      if (!is_terminal(i, j)) continue;
      const double c = grid.cost_at(r, j);
      if (c < best_cost) {
        best_cost = c;
        best_r = r;
        best_j = j;
      }
    }
  }
  if (best_r < 0) {
    // Unreachable frontier cannot happen: the start diagonal alone walks to
    // a frontier inside the band.
    throw Error(ErrorCode::kDomainError, "no reachable terminal cell");
  }

  AlignmentPath path;
  {
    int r = best_r, j = best_j;
    std::vector<std::pair<int, int>> rev;
    std::vector<double> rev_dists;
    while (true) {
      rev.emplace_back(region.start_i + r, j);
      rev_dists.push_back(grid.dist_at(r, j));
      const uint8_t from = grid.pred_at(r, j);
      if (from == BandGrid::kStart) break;
      if (from == BandGrid::kDiagonal) {
        --r;
        --j;
      } else if (from == BandGrid::kVertical) {
        --r;
      } else {
        --j;
      }
    }
    path.steps.assign(rev.rbegin(), rev.rend());
    path.step_dists.assign(rev_dists.rbegin(), rev_dists.rend());
  }
  path.accumulated = best_cost;
  return path;
}

MinAvgWindow min_avg_fragment(std::span<const double> step_dists,
                              int min_len) {
  const int n = static_cast<int>(step_dists.size());
  if (n == 0) {
    throw Error(ErrorCode::kDomainError,
                "min_avg_fragment needs a non-empty list");
  }
  if (min_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min fragment length must be >= 1");
  }
  const int lo = std::min(min_len, n);
  const int hi = std::min(2 * lo - 1, n);

  MinAvgWindow best;
  bool have_best = false;
  for (int begin = 0; begin + lo <= n; ++begin) {
    double sum = 0.0;
    for (int k = 0; k < lo - 1; ++k) sum += step_dists[begin + k];
    for (int len = lo; len <= hi && begin + len <= n; ++len) {
      sum += step_dists[begin + len - 1];
      const double avg = sum / len;
      if (!have_best || avg < best.avg) {
        best = MinAvgWindow{begin + 1, begin + len, avg};
        have_best = true;
      }
    }
  }
  return best;
}

std::vector<AlignmentPath> sdtw_paths(const FrameMatrix& x,
                                      const FrameMatrix& y,
                                      const LocalMetric& metric,
                                      int band_radius) {
  if (x.rows() < 1 || y.rows() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sequences must be non-empty");
  }
  const auto starts = region_starts(static_cast<int>(x.rows()),
                                    static_cast<int>(y.rows()), band_radius);
  std::vector<AlignmentPath> paths;
  paths.reserve(starts.size());
  for (const auto& [si, sj] : starts) {
    paths.push_back(banded_dtw(x, y, metric, Region{si, sj, band_radius}));
  }
  return paths;
}

std::vector<Fragment> fragments_from_paths(
    const std::vector<AlignmentPath>& paths, int min_len) {
  std::vector<Fragment> fragments;
  fragments.reserve(paths.size());
  for (size_t r = 0; r < paths.size(); ++r) {
    const AlignmentPath& path = paths[r];
    const MinAvgWindow w = min_avg_fragment(path.step_dists, min_len);
    fragments.push_back(Fragment{static_cast<int>(r), w.begin, w.end, w.avg,
                                 path.length() < min_len});
  }
  return fragments;
}

std::vector<Fragment> sdtw(const FrameMatrix& x, const FrameMatrix& y,
                           const LocalMetric& metric, const SdtwConfig& cfg) {
  if (cfg.min_fragment_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min fragment length must be >= 1");
  }
  return fragments_from_paths(sdtw_paths(x, y, metric, cfg.band_radius),
                              cfg.min_fragment_len);
}

}  // namespace sdtwsv

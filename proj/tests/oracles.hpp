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

// Independent reference implementations used only by tests. Each one takes
// the slow-but-obvious route (exhaustive enumeration, direct construction)
// so it shares no code path with the library implementation it checks.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Banded DTW by exhaustive path enumeration. Walks every monotone path from
// the start cell that stays inside the band and stops at its first cell with
// i == len_x or j == len_y, and returns the minimum accumulated distance.
// Feasible for len_x, len_y <= ~8.
inline double exhaustive_banded_dtw(
    const std::function<double(int, int)>& local, int len_x, int len_y,
    int start_i, int start_j, int band_radius) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> walk = [&](int i, int j,
                                                   double acc) {
    acc += local(i, j);
    if (i == len_x || j == len_y) {
      best = std::min(best, acc);
      return;
    }
    const auto in_band = [&](int ni, int nj) {
      return ni <= len_x && nj <= len_y &&
             std::abs((ni - start_i) - (nj - start_j)) <= band_radius;
    };
    if (in_band(i + 1, j + 1)) walk(i + 1, j + 1, acc);
    if (in_band(i + 1, j)) walk(i + 1, j, acc);
    if (in_band(i, j + 1)) walk(i, j + 1, acc);
  };
  walk(start_i, start_j, 0.0);
  return best;
}

// Plain full DTW from (1,1) to (len_x, len_y), no band.
inline double full_dtw(const std::function<double(int, int)>& local,
                       int len_x, int len_y) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(
      static_cast<size_t>(len_x) + 1,
      std::vector<double>(static_cast<size_t>(len_y) + 1, inf));
  for (int i = 1; i <= len_x; ++i) {
    for (int j = 1; j <= len_y; ++j) {
      const double d = local(i, j);
      if (i == 1 && j == 1) {
        cost[1][1] = d;
        continue;
      }
      double prev = inf;
      if (i > 1 && j > 1) prev = std::min(prev, cost[i - 1][j - 1]);
      if (i > 1) prev = std::min(prev, cost[i - 1][j]);
      if (j > 1) prev = std::min(prev, cost[i][j - 1]);
      cost[i][j] = prev + d;
    }
  }
  return cost[static_cast<size_t>(len_x)][static_cast<size_t>(len_y)];
}

// ---------------------------------------------------------------------------
// Minimum-average window by full O(n^2) enumeration over every length
// >= min(min_len, n), with the tie rule: earliest begin, then shortest.
struct BruteWindow {
  int begin = 1;
  int end = 1;
  double avg = 0.0;
};

inline BruteWindow brute_min_avg_window(std::span<const double> values,
                                        int min_len) {
  const int n = static_cast<int>(values.size());
  const int lo = std::min(min_len, n);
  BruteWindow best;
  bool have = false;
  for (int begin = 0; begin < n; ++begin) {
    double sum = 0.0;
    for (int end = begin; end < n; ++end) {
      sum += values[end];
      const int len = end - begin + 1;
      if (len < lo) continue;
      const double avg = sum / len;
      if (!have || avg < best.avg) {
        best = BruteWindow{begin + 1, end + 1, avg};
        have = true;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// PLDA log-likelihood ratio by direct construction of the 2d x 2d joint
// Gaussians.
inline double joint_gaussian_llr(const Eigen::MatrixXd& between,
                                 const Eigen::MatrixXd& within,
                                 const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& v) {
  const Eigen::Index d = between.rows();
  const Eigen::MatrixXd total = between + within;
  Eigen::MatrixXd same(2 * d, 2 * d), diff(2 * d, 2 * d);
  same.topLeftCorner(d, d) = total;
  same.topRightCorner(d, d) = between;
  same.bottomLeftCorner(d, d) = between;
  same.bottomRightCorner(d, d) = total;
  diff.setZero();
  diff.topLeftCorner(d, d) = total;
  diff.bottomRightCorner(d, d) = total;

  Eigen::VectorXd x(2 * d);
  x << u, v;
  const auto log_pdf = [&](const Eigen::MatrixXd& cov) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
    const double log_det = ldlt.vectorD().array().log().sum();
    const double quad = x.dot(ldlt.solve(x));
    const double log_2pi = std::log(2.0 * 3.14159265358979323846);
    return -0.5 * (static_cast<double>(2 * d) * log_2pi + log_det + quad);
  };
  return log_pdf(same) - log_pdf(diff);
}

// ---------------------------------------------------------------------------
// EER by threshold enumeration at every midpoint between consecutive
// distinct scores (plus one below and one above everything); reports
// (FA + FR) / 2 at the point where |FA - FR| is smallest.
inline double brute_eer(std::span<const double> targets,
                        std::span<const double> nontargets) {
  std::set<double> distinct(targets.begin(), targets.end());
  distinct.insert(nontargets.begin(), nontargets.end());
  std::vector<double> sorted(distinct.begin(), distinct.end());
  std::vector<double> thresholds;
  thresholds.push_back(sorted.front() - 1.0);
  for (size_t k = 0; k + 1 < sorted.size(); ++k) {
    thresholds.push_back(0.5 * (sorted[k] + sorted[k + 1]));
  }
  // Also the scores themselves, since accept is >= threshold.
  thresholds.insert(thresholds.end(), sorted.begin(), sorted.end());
  thresholds.push_back(sorted.back() + 1.0);

  double best_gap = std::numeric_limits<double>::infinity();
  double best_eer = 0.5;
  for (double threshold : thresholds) {
    size_t fa = 0, fr = 0;
    for (double s : nontargets) fa += s >= threshold ? 1 : 0;
    for (double s : targets) fr += s < threshold ? 1 : 0;
    const double fa_rate = static_cast<double>(fa) / nontargets.size();
    const double fr_rate = static_cast<double>(fr) / targets.size();
    const double gap = std::abs(fa_rate - fr_rate);
    if (gap < best_gap) {
      best_gap = gap;
      best_eer = 0.5 * (fa_rate + fr_rate);
    }
  }
  return best_eer;
}

}  // namespace oracles

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
#include <string>
#include <vector>

namespace sdtwsv {

// One parsed invocation of the command-line tool. Plain files are the only
// medium between stages, so every subcommand is a pure function of its
// input files and flags.
struct RunConfig {
  std::string command;  // synth-gen | plda-train | score | fuse | eval |
                        // sweep | align

  // synth-gen
  std::filesystem::path genspec_path;
  std::filesystem::path out_dir;

  // shared inputs
  std::filesystem::path seq_dir;
  std::filesystem::path trials_path;
  std::filesystem::path labels_path;
  std::filesystem::path model_path;
  std::filesystem::path out_path;
  std::filesystem::path scores_a;  // fuse input A, eval input
  std::filesystem::path scores_b;  // fuse input B
  std::filesystem::path enrol_path;  // align
  std::filesystem::path test_path;   // align

  std::string method = "sdtw";   // score: sdtw | mean
  std::string metric = "plda";   // cosine | plda
  int band_radius = 1;           // R
  int min_fragment_len = 30;     // L
  std::string agg = "mean";      // mean | lowest_k | min
  int agg_k = 1;
  bool multi_id = false;

  double fusion_weight = 0.5;
  bool znorm = false;

  bool pooled = false;  // eval: add a pooled-EER row

  int lda_dim = 0;  // plda-train: 0 disables LDA
  bool length_norm = true;
  int iterations = 10;

  std::vector<std::string> sweep_metrics{"cosine", "plda"};
  std::vector<int> sweep_radii{1, 2, 5};
  std::vector<int> sweep_lens{10, 30, 50};

  int threads = 0;  // 0: SDTWSV_THREADS env var, else hardware concurrency

  // Checks flag combinations without touching any input file; throws Error
  // with kInvalidArgument on bad combinations.
  void validate() const;
};

// Executes one subcommand; returns 0 on success and throws Error otherwise.
int run(const RunConfig& config);

// Resolved worker count for a configured value (see RunConfig::threads).
int resolve_threads(int configured);

}  // namespace sdtwsv

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

#include <CLI11.hpp>
#include <iostream>

#include "sdtwsv/commands.hpp"
#include "sdtwsv/errors.hpp"

namespace {

void add_metric_flags(CLI::App* cmd, sdtwsv::RunConfig* cfg) {
  cmd->add_option("--metric", cfg->metric, "Local distance: cosine or plda")
      ->check(CLI::IsMember({"cosine", "plda"}));
  cmd->add_option("--model", cfg->model_path,
                  "PLDA model file (required with --metric plda)");
}

void add_sdtw_flags(CLI::App* cmd, sdtwsv::RunConfig* cfg) {
  cmd->add_option("--radius,-R", cfg->band_radius,
                  "Band radius R of each alignment region");
  cmd->add_option("--min-len,-L", cfg->min_fragment_len,
                  "Minimum fragment length L");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Speaker-verification scoring over embedding sequences: segmental "
      "DTW alignment with cosine or PLDA local distances, mean-embedding "
      "baselines, score fusion and EER evaluation."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sdtwsv 0.1.0");

  sdtwsv::RunConfig cfg;

  CLI::App* synth = app.add_subcommand(
      "synth-gen", "Generate a synthetic trial set and training data");
  synth->add_option("--spec", cfg.genspec_path, "Generator spec file")
      ->required();
  synth->add_option("--out-dir", cfg.out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand(
      "plda-train", "Fit the preprocessing chain and train a PLDA model");
  train->add_option("--seq-dir", cfg.seq_dir,
                    "Directory with <id>.eseq training sequences")
      ->required();
  train->add_option("--labels", cfg.labels_path,
                    "TSV mapping sequence id to speaker")
      ->required();
  train->add_option("--out", cfg.out_path, "Output model file")->required();
  train->add_option("--iterations", cfg.iterations, "EM iterations");
  train->add_option("--lda-dim", cfg.lda_dim,
                    "LDA output dimension (0 disables LDA)");
  train->add_flag("--no-length-norm",
                  [&cfg](int64_t) { cfg.length_norm = false; },
                  "Skip length normalization in the chain");

  CLI::App* score =
      app.add_subcommand("score", "Score a trial list against sequences");
  score->add_option("--trials", cfg.trials_path, "Trial list TSV")->required();
  score->add_option("--seq-dir", cfg.seq_dir,
                    "Directory with <id>.eseq files")
      ->required();
  score->add_option("--out", cfg.out_path, "Output score TSV")->required();
  score->add_option("--method", cfg.method, "sdtw or mean")
      ->check(CLI::IsMember({"sdtw", "mean"}));
  add_metric_flags(score, &cfg);
  add_sdtw_flags(score, &cfg);
  score->add_option("--agg", cfg.agg,
                    "Fragment aggregation: mean, lowest_k or min")
      ->check(CLI::IsMember({"mean", "lowest_k", "min"}));
  score->add_option("--agg-k", cfg.agg_k, "K for lowest_k aggregation");
  score->add_flag("--multi-id", cfg.multi_id,
                  "Treat comma-separated ids as multiple sequences per side");
  score->add_option("--threads", cfg.threads,
                    "Worker threads (0: SDTWSV_THREADS or all cores)");

  CLI::App* fuse_cmd =
      app.add_subcommand("fuse", "Fuse two score files on the score level");
  fuse_cmd->add_option("--a", cfg.scores_a, "First score TSV")->required();
  fuse_cmd->add_option("--b", cfg.scores_b, "Second score TSV")->required();
  fuse_cmd->add_option("--out", cfg.out_path, "Output score TSV")->required();
  fuse_cmd->add_option("--weight", cfg.fusion_weight,
                       "Weight of system A in [0, 1]");
  fuse_cmd->add_flag("--znorm", cfg.znorm,
                     "Zero-mean/unit-variance each system first");

  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Per-condition EER report for a score file");
  eval_cmd->add_option("--scores", cfg.scores_a, "Score TSV")->required();
  eval_cmd->add_option("--trials", cfg.trials_path, "Trial list with labels")
      ->required();
  eval_cmd->add_option("--out", cfg.out_path, "Output report TSV")
      ->required();
  eval_cmd->add_flag("--pooled", cfg.pooled,
                     "Add a pooled-EER row over all trials");

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Average EER over a (metric, R, L) grid");
  sweep_cmd->add_option("--trials", cfg.trials_path, "Trial list TSV")
      ->required();
  sweep_cmd->add_option("--seq-dir", cfg.seq_dir,
                        "Directory with <id>.eseq files")
      ->required();
  sweep_cmd->add_option("--out", cfg.out_path, "Output sweep TSV")
      ->required();
  sweep_cmd->add_option("--metrics", cfg.sweep_metrics,
                        "Metrics to sweep (cosine plda)")
      ->delimiter(',');
  sweep_cmd->add_option("--model", cfg.model_path, "PLDA model file");
  sweep_cmd->add_option("--radii", cfg.sweep_radii, "Band radii to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--lens", cfg.sweep_lens,
                        "Minimum fragment lengths to sweep")
      ->delimiter(',');
  sweep_cmd->add_option("--agg", cfg.agg,
                        "Fragment aggregation: mean, lowest_k or min")
      ->check(CLI::IsMember({"mean", "lowest_k", "min"}));
  sweep_cmd->add_option("--agg-k", cfg.agg_k, "K for lowest_k aggregation");
  sweep_cmd->add_option("--threads", cfg.threads,
                        "Worker threads (0: SDTWSV_THREADS or all cores)");

  CLI::App* align_cmd = app.add_subcommand(
      "align", "Dump the per-region fragments for one sequence pair");
  align_cmd->add_option("--enrol", cfg.enrol_path, "Enrolment sequence file")
      ->required();
  align_cmd->add_option("--test", cfg.test_path, "Test sequence file")
      ->required();
  align_cmd->add_option("--out", cfg.out_path,
                        "Output file (stdout when omitted)");
  add_metric_flags(align_cmd, &cfg);
  add_sdtw_flags(align_cmd, &cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 uses 0 for --help; map real parse failures to the invalid
    // argument status.
    return code == 0 ? 0 : static_cast<int>(sdtwsv::ErrorCode::kInvalidArgument);
  }

  cfg.command = app.get_subcommands().front()->get_name();
  try {
    return sdtwsv::run(cfg);
  } catch (const sdtwsv::Error& e) {
    std::cerr << "sdtwsv " << cfg.command << ": " << e.what() << std::endl;
    return e.exit_status();
  } catch (const std::exception& e) {
    std::cerr << "sdtwsv " << cfg.command << ": " << e.what() << std::endl;
    return 1;
  }
}

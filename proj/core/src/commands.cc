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

#include "sdtwsv/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>
#include <unordered_map>

#include "sdtwsv/align.hpp"
#include "sdtwsv/errors.hpp"
#include "sdtwsv/eval.hpp"
#include "sdtwsv/plda.hpp"
#include "sdtwsv/synth.hpp"
#include "sdtwsv/verify.hpp"
#include "text_format.hpp"

namespace sdtwsv {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, message);
}

LocalMetric make_metric(const std::string& name,
                        const std::filesystem::path& model_path) {
  if (name == "cosine") return LocalMetric::cosine();
  if (name == "plda") {
    return LocalMetric::plda(
        std::make_shared<PldaModel>(read_plda(model_path)));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + name + "'");
}

void run_synth_gen(const RunConfig& cfg) {
  const GenSpec spec = read_genspec(cfg.genspec_path);
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir / "seqs");
  fs::create_directories(cfg.out_dir / "train");

  PopulationSpec population;
  population.n_speakers = spec.n_speakers;
  population.dim = spec.dim;
  population.between = CovarianceSpec::scaled_identity(spec.phi_b_scale);
  population.within = CovarianceSpec::scaled_identity(spec.phi_w_scale);
  population.seed = spec.seed;

  std::optional<MismatchSpec> mismatch;
  if (spec.splice_fraction > 0.0) {
    MismatchSpec m;
    m.splice_fraction = spec.splice_fraction;
    m.distractor_seed = spec.distractor_seed;
    mismatch = std::move(m);
  }
  const SynthTrialSet trialset =
      gen_trialset(population, spec.trials_per_class, spec.seq_length,
                   mismatch);
  for (const EmbeddingSequence& seq : trialset.sequences) {
    write_sequence(seq, cfg.out_dir / "seqs" / (seq.id + ".eseq"));
  }
  write_trials(trialset.trials, cfg.out_dir / "trials.tsv");

  // Disjoint training population from a derived seed.
  PopulationSpec train_population = population;
  train_population.n_speakers = spec.train_speakers;
  train_population.seed = derive_seed(spec.seed, 1);
  const SynthTrainSet trainset = gen_trainset(
      train_population, spec.train_seqs_per_speaker, spec.train_seq_length);
  std::ofstream labels(cfg.out_dir / "train" / "labels.tsv", std::ios::trunc);
  if (!labels) {
    throw Error(ErrorCode::kMissingFile, "cannot write train labels");
  }
  for (size_t i = 0; i < trainset.sequences.size(); ++i) {
    const EmbeddingSequence& seq = trainset.sequences[i];
    write_sequence(seq, cfg.out_dir / "train" / (seq.id + ".eseq"));
    labels << seq.id << '\t' << trainset.speakers[i] << '\n';
  }
  write_genspec(spec, cfg.out_dir / "genspec.txt");
}

void run_plda_train(const RunConfig& cfg) {
  // labels.tsv rows: sequence id, speaker tag. Every frame of a sequence is
  // one training sample with that speaker.
  std::ifstream labels_in(cfg.labels_path);
  if (!labels_in) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open labels " + cfg.labels_path.string());
  }
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  size_t line_no = 0;
  while (std::getline(labels_in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = text::split_tsv(line);
    if (fields.size() != 2) {
      throw Error(ErrorCode::kMalformedFile,
                  cfg.labels_path.string() + ":" + std::to_string(line_no) +
                      ": expected 'id<TAB>speaker'");
    }
    rows.emplace_back(fields[0], fields[1]);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kMalformedFile,
                "label file " + cfg.labels_path.string() + " is empty");
  }

  std::unordered_map<std::string, int> speaker_index;
  Eigen::Index n_frames = 0;
  Eigen::Index dim = -1;
  std::vector<EmbeddingSequence> sequences;
  sequences.reserve(rows.size());
  for (const auto& [id, speaker] : rows) {
    EmbeddingSequence seq = read_sequence(cfg.seq_dir / (id + ".eseq"));
    if (dim < 0) dim = seq.dim();
    if (seq.dim() != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "training sequences disagree on dimension");
    }
    n_frames += seq.length();
    speaker_index.emplace(speaker,
                          static_cast<int>(speaker_index.size()));
    sequences.push_back(std::move(seq));
  }
  FrameMatrix data(n_frames, dim);
  std::vector<int> labels;
  labels.reserve(static_cast<size_t>(n_frames));
  Eigen::Index row = 0;
  for (size_t i = 0; i < sequences.size(); ++i) {
    const FrameMatrix frames = to_double(sequences[i]);
    data.middleRows(row, frames.rows()) = frames;
    row += frames.rows();
    const int speaker = speaker_index.at(rows[i].second);
    labels.insert(labels.end(), static_cast<size_t>(frames.rows()), speaker);
  }

  const bool use_lda = cfg.lda_dim > 0;
  const PreprocessChain chain =
      fit_preprocess(data, labels, use_lda ? cfg.lda_dim : dim, use_lda,
                     cfg.length_norm);
  const FrameMatrix transformed = apply_preprocess_rows(chain, data);
  const PldaModel model =
      plda_train(transformed, labels, cfg.iterations, chain);
  write_plda(model, cfg.out_path);
}

void run_score(const RunConfig& cfg) {
  const std::vector<Trial> trials = read_trials(cfg.trials_path);
  const SequenceMap sequences =
      load_sequences_for_trials(cfg.seq_dir, trials);
  const LocalMetric metric = make_metric(cfg.metric, cfg.model_path);
  ScoreRequest request;
  request.method = cfg.method == "mean" ? ScoreRequest::Method::kMean
                                        : ScoreRequest::Method::kSdtw;
  request.sdtw = SdtwConfig{cfg.band_radius, cfg.min_fragment_len};
  request.agg = parse_aggregation(cfg.agg, cfg.agg_k);
  request.threads = resolve_threads(cfg.threads);
  request.multi_id = cfg.multi_id;
  const std::vector<TrialScore> scores =
      score_trials(trials, sequences, metric, request);
  write_scores(scores, cfg.out_path);
}

void run_fuse(const RunConfig& cfg) {
  const std::vector<TrialScore> a = read_scores(cfg.scores_a);
  const std::vector<TrialScore> b = read_scores(cfg.scores_b);
  write_scores(fuse(a, b, cfg.fusion_weight, cfg.znorm), cfg.out_path);
}

void run_eval(const RunConfig& cfg) {
  const std::vector<TrialScore> scores = read_scores(cfg.scores_a);
  const std::vector<Trial> trials = read_trials(cfg.trials_path);
  const std::vector<TrialScore> joined =
      join_scores_with_trials(scores, trials);
  ConditionReport report = condition_report(joined);
  if (cfg.pooled) {
    report.per_condition.emplace_back("pooled", pooled_eer(joined));
  }
  write_report(report, cfg.out_path);
}

void run_sweep(const RunConfig& cfg) {
  const std::vector<Trial> trials = read_trials(cfg.trials_path);
  const SequenceMap sequences =
      load_sequences_for_trials(cfg.seq_dir, trials);
  std::vector<LocalMetric> metrics;
  for (const std::string& name : cfg.sweep_metrics) {
    metrics.push_back(make_metric(name, cfg.model_path));
  }
  const std::vector<SweepCell> cells =
      sweep(trials, sequences, metrics, cfg.sweep_radii, cfg.sweep_lens,
            parse_aggregation(cfg.agg, cfg.agg_k),
            resolve_threads(cfg.threads));
  write_sweep(cells, cfg.out_path);
}

void run_align(const RunConfig& cfg) {
  const EmbeddingSequence enrol = read_sequence(cfg.enrol_path);
  const EmbeddingSequence test = read_sequence(cfg.test_path);
  const LocalMetric metric = make_metric(cfg.metric, cfg.model_path);
  const FrameMatrix x = metric.prepare(enrol);
  const FrameMatrix y = metric.prepare(test);
  const auto starts = region_starts(static_cast<int>(x.rows()),
                                    static_cast<int>(y.rows()),
                                    cfg.band_radius);
  const auto fragments =
      sdtw(x, y, metric, SdtwConfig{cfg.band_radius, cfg.min_fragment_len});

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path, std::ios::trunc);
    if (!file) {
      throw Error(ErrorCode::kMissingFile,
                  "cannot open " + cfg.out_path.string() + " for writing");
    }
    os = &file;
  }
  for (size_t r = 0; r < fragments.size(); ++r) {
    const Fragment& f = fragments[r];
    const auto& [si, sj] = starts[static_cast<size_t>(f.region_index)];
    *os << si << '\t' << sj << '\t' << f.begin << '\t' << f.end << '\t'
        << f.length() << '\t' << text::format_g9(f.avg_dist) << '\n';
  }
}

std::vector<int> parse_int_list(const std::string& what,
                                const std::vector<int>& values) {
  for (int v : values) {
    if (v < 0) {
      throw Error(ErrorCode::kInvalidArgument, what + " must be >= 0");
    }
  }
  return values;
}

}  // namespace

int resolve_threads(int configured) {
  if (configured > 0) return configured;
  if (const char* env = std::getenv("SDTWSV_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void RunConfig::validate() const {
  const bool plda_metric = metric == "plda";
  if (command == "synth-gen") {
    require(!genspec_path.empty(), "synth-gen needs --spec");
    require(!out_dir.empty(), "synth-gen needs --out-dir");
  } else if (command == "plda-train") {
    require(!seq_dir.empty(), "plda-train needs --seq-dir");
    require(!labels_path.empty(), "plda-train needs --labels");
    require(!out_path.empty(), "plda-train needs --out");
    require(iterations >= 1, "--iterations must be >= 1");
    require(lda_dim >= 0, "--lda-dim must be >= 0");
  } else if (command == "score") {
    require(!trials_path.empty(), "score needs --trials");
    require(!seq_dir.empty(), "score needs --seq-dir");
    require(!out_path.empty(), "score needs --out");
    require(method == "sdtw" || method == "mean",
            "--method must be sdtw or mean");
    require(metric == "cosine" || metric == "plda",
            "--metric must be cosine or plda");
    require(!plda_metric || !model_path.empty(),
            "--metric plda needs --model");
    require(band_radius >= 0, "--radius must be >= 0");
    require(min_fragment_len >= 1, "--min-len must be >= 1");
    parse_aggregation(agg, agg_k);
  } else if (command == "fuse") {
    require(!scores_a.empty() && !scores_b.empty(), "fuse needs --a and --b");
    require(!out_path.empty(), "fuse needs --out");
    require(fusion_weight >= 0.0 && fusion_weight <= 1.0,
            "--weight must lie in [0, 1]");
  } else if (command == "eval") {
    require(!scores_a.empty(), "eval needs --scores");
    require(!trials_path.empty(), "eval needs --trials");
    require(!out_path.empty(), "eval needs --out");
  } else if (command == "sweep") {
    require(!trials_path.empty(), "sweep needs --trials");
    require(!seq_dir.empty(), "sweep needs --seq-dir");
    require(!out_path.empty(), "sweep needs --out");
    require(!sweep_metrics.empty() && !sweep_radii.empty() &&
                !sweep_lens.empty(),
            "sweep needs non-empty metric/radius/length lists");
    for (const std::string& name : sweep_metrics) {
      require(name == "cosine" || name == "plda",
              "sweep metrics must be cosine or plda");
      require(name != "plda" || !model_path.empty(),
              "sweep over plda needs --model");
    }
    parse_int_list("--radii", sweep_radii);
    for (int len : sweep_lens) {
      require(len >= 1, "--lens entries must be >= 1");
    }
    parse_aggregation(agg, agg_k);
  } else if (command == "align") {
    require(!enrol_path.empty() && !test_path.empty(),
            "align needs --enrol and --test");
    require(metric == "cosine" || metric == "plda",
            "--metric must be cosine or plda");
    require(!plda_metric || !model_path.empty(),
            "--metric plda needs --model");
    require(band_radius >= 0, "--radius must be >= 0");
    require(min_fragment_len >= 1, "--min-len must be >= 1");
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown command '" + command + "'");
  }
}

int run(const RunConfig& config) {
  config.validate();
  if (config.command == "synth-gen") {
    run_synth_gen(config);
  } else if (config.command == "plda-train") {
    run_plda_train(config);
  } else if (config.command == "score") {
    run_score(config);
  } else if (config.command == "fuse") {
    run_fuse(config);
  } else if (config.command == "eval") {
    run_eval(config);
  } else if (config.command == "sweep") {
    run_sweep(config);
  } else if (config.command == "align") {
    run_align(config);
  }
  return 0;
}

}  // namespace sdtwsv

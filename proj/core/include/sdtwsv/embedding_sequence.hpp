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

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace sdtwsv {

// Frame matrices are frames-by-dim and row-major, so one embedding is one
// contiguous row. Raw sequences are stored in float32 to match the on-disk
// format; all downstream math runs in double.
using FrameMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FrameMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// An identified sequence of fixed-dimension embedding vectors, one per row.
// Immutable after construction and safe to share across threads.
struct EmbeddingSequence {
  std::string id;
  FrameMatrixF vectors;  // N x dim

  Eigen::Index length() const { return vectors.rows(); }
  Eigen::Index dim() const { return vectors.cols(); }
};

// Validates the sequence invariants: non-empty id, N >= 1, dim >= 1 and all
// entries finite. Throws Error on violation.
EmbeddingSequence make_sequence(std::string id, FrameMatrixF vectors);

FrameMatrix to_double(const EmbeddingSequence& seq);

struct WindowSpec {
  int window_len = 200;
  int step = 50;
};

// 1-based start indices s of every full window (s + window_len - 1 <=
// n_frames). An utterance shorter than one window yields the single
// truncated window starting at 1.
std::vector<int> window_starts(int n_frames, const WindowSpec& spec);

// Binary sequence file: magic "ESEQ", u32 version=1, u32 dim, u64 count,
// u16 id length, id bytes, then count*dim little-endian float32 row-major.
// read_sequence also accepts a plain-text form for hand-written fixtures:
// an optional "#id: <name>" header line followed by one whitespace-separated
// vector per line.
EmbeddingSequence read_sequence(const std::filesystem::path& path);
void write_sequence(const EmbeddingSequence& seq,
                    const std::filesystem::path& path);

}  // namespace sdtwsv

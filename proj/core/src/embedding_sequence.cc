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

#include "sdtwsv/embedding_sequence.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "sdtwsv/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "sequence file I/O assumes a little-endian host");

namespace sdtwsv {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'E', 'Q'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!is) {
    throw Error(ErrorCode::kMalformedFile,
                "sequence file truncated while reading " + what);
  }
  return value;
}

void check_finite(const FrameMatrixF& m, const std::string& where) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue,
                "non-finite embedding value in " + where);
  }
}

EmbeddingSequence read_text_sequence(const std::filesystem::path& path,
                                     std::istream& is) {
  std::string id = path.stem().string();
  std::vector<std::vector<float>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (first && line.rfind("#id:", 0) == 0) {
      first = false;
      id = line.substr(4);
      const auto begin = id.find_first_not_of(" \t");
      const auto end = id.find_last_not_of(" \t\r");
      id = begin == std::string::npos ? "" : id.substr(begin, end - begin + 1);
      continue;
    }
    first = false;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<float> row;
    double value;
    while (ls >> value) row.push_back(static_cast<float>(value));
    if (!ls.eof()) {
      throw Error(ErrorCode::kMalformedFile,
                  "unparsable vector line in " + path.string());
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "inconsistent vector dimension in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kMalformedFile,
                "no vectors in text sequence " + path.string());
  }
  FrameMatrixF m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return make_sequence(std::move(id), std::move(m));
}

}  // namespace

EmbeddingSequence make_sequence(std::string id, FrameMatrixF vectors) {
  if (id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sequence id must be non-empty");
  }
  if (vectors.rows() < 1 || vectors.cols() < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "sequence '" + id + "' must have N >= 1 and dim >= 1");
  }
  check_finite(vectors, "sequence '" + id + "'");
  return EmbeddingSequence{std::move(id), std::move(vectors)};
}

FrameMatrix to_double(const EmbeddingSequence& seq) {
  return seq.vectors.cast<double>();
}

std::vector<int> window_starts(int n_frames, const WindowSpec& spec) {
  if (n_frames < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_frames must be >= 1");
  }
  if (spec.window_len < 1 || spec.step < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "window_len and step must be >= 1");
  }
  std::vector<int> starts;
  if (n_frames < spec.window_len) {
    starts.push_back(1);
    return starts;
  }
  for (int s = 1; s + spec.window_len - 1 <= n_frames; s += spec.step) {
    starts.push_back(s);
  }
  return starts;
}

EmbeddingSequence read_sequence(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open sequence file " + path.string());
  }
  char magic[4] = {};
  is.read(magic, 4);
  if (is.gcount() == 4 && std::equal(magic, magic + 4, kMagic)) {
    const auto version = read_pod<uint32_t>(is, "version");
    if (version != kVersion) {
      throw Error(ErrorCode::kMalformedFile,
                  "unsupported sequence file version in " + path.string());
    }
    const auto dim = read_pod<uint32_t>(is, "dim");
    const auto count = read_pod<uint64_t>(is, "count");
    if (dim == 0 || count == 0) {
      throw Error(ErrorCode::kMalformedFile,
                  "empty sequence in " + path.string());
    }
    const auto id_len = read_pod<uint16_t>(is, "id length");
    std::string id(id_len, '\0');
    is.read(id.data(), id_len);
    if (!is) {
      throw Error(ErrorCode::kMalformedFile,
                  "sequence file truncated while reading id in " +
                      path.string());
    }
    FrameMatrixF m(static_cast<Eigen::Index>(count),
                   static_cast<Eigen::Index>(dim));
    const std::streamsize payload =
        static_cast<std::streamsize>(sizeof(float)) * m.size();
    is.read(reinterpret_cast<char*>(m.data()), payload);
    if (is.gcount() != payload) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "payload size does not match header dim*count in " +
                      path.string());
    }
    // A well-formed file ends exactly at the payload.
    if (is.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "trailing bytes after payload in " + path.string());
    }
    check_finite(m, path.string());
    return make_sequence(std::move(id), std::move(m));
  }
  // Not binary: retry as text.
  is.clear();
  is.seekg(0);
  return read_text_sequence(path, is);
}

void write_sequence(const EmbeddingSequence& seq,
                    const std::filesystem::path& path) {
  if (seq.id.size() > 0xFFFF) {
    throw Error(ErrorCode::kInvalidArgument, "sequence id too long");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw Error(ErrorCode::kMissingFile,
                "cannot open " + path.string() + " for writing");
  }
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, static_cast<uint32_t>(seq.dim()));
  write_pod(os, static_cast<uint64_t>(seq.length()));
  write_pod(os, static_cast<uint16_t>(seq.id.size()));
  os.write(seq.id.data(), static_cast<std::streamsize>(seq.id.size()));
  os.write(reinterpret_cast<const char*>(seq.vectors.data()),
           static_cast<std::streamsize>(sizeof(float)) * seq.vectors.size());
  if (!os) {
    throw Error(ErrorCode::kMissingFile, "write failed for " + path.string());
  }
}

}  // namespace sdtwsv

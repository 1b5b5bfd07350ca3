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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sdtwsv/errors.hpp"
#include "sdtwsv/rng.hpp"

using namespace sdtwsv;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdtwsv_embedseq_test";
  fs::create_directories(dir);
  return dir / name;
}

FrameMatrixF random_frames(int rows, int cols, uint64_t seed) {
  Philox4x32 rng(seed);
  FrameMatrixF m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = static_cast<float>(rng.next_gaussian());
  return m;
}

}  // namespace

TEST_SUITE("embedseq") {

TEST_CASE("window_starts examples") {
  const WindowSpec spec{200, 50};
  CHECK(window_starts(300, spec) == std::vector<int>{1, 51, 101});
  CHECK(window_starts(200, spec) == std::vector<int>{1});
  // Shorter than one window: a single truncated window.
  CHECK(window_starts(150, spec) == std::vector<int>{1});
}

TEST_CASE("window_starts count and spacing") {
  Philox4x32 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int window_len = 1 + static_cast<int>(rng.next_u64() % 64);
    const int step = 1 + static_cast<int>(rng.next_u64() % 32);
    const int n = 1 + static_cast<int>(rng.next_u64() % 400);
    const auto starts = window_starts(n, WindowSpec{window_len, step});
    REQUIRE(!starts.empty());
    CHECK(starts.front() == 1);
    for (size_t k = 1; k < starts.size(); ++k) {
      CHECK(starts[k] - starts[k - 1] == step);
    }
    if (n >= window_len) {
      CHECK(static_cast<int>(starts.size()) ==
            1 + (n - window_len) / step);
      CHECK(starts.back() + window_len - 1 <= n);
    } else {
      CHECK(starts.size() == 1);
    }
  }
}

TEST_CASE("binary round-trip is exact") {
  SUBCASE("one vector, dim 1, zero") {
    const auto seq = make_sequence("tiny", FrameMatrixF::Zero(1, 1));
    const auto path = temp_file("tiny.eseq");
    write_sequence(seq, path);
    const auto back = read_sequence(path);
    CHECK(back.id == "tiny");
    CHECK(back.vectors == seq.vectors);
  }
  SUBCASE("random 10x128") {
    const auto seq = make_sequence("utt-0001", random_frames(10, 128, 5));
    const auto path = temp_file("rand.eseq");
    write_sequence(seq, path);
    const auto back = read_sequence(path);
    CHECK(back.id == seq.id);
    REQUIRE(back.vectors.rows() == seq.vectors.rows());
    REQUIRE(back.vectors.cols() == seq.vectors.cols());
    CHECK(back.vectors == seq.vectors);  // bit-exact
  }
}

TEST_CASE("round-trip property over random shapes") {
  Philox4x32 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 1 + static_cast<int>(rng.next_u64() % 20);
    const int cols = 1 + static_cast<int>(rng.next_u64() % 40);
    const auto seq = make_sequence("seq" + std::to_string(trial),
                                   random_frames(rows, cols, 100 + trial));
    const auto path = temp_file("prop.eseq");
    write_sequence(seq, path);
    const auto back = read_sequence(path);
    CHECK(back.id == seq.id);
    CHECK(back.vectors == seq.vectors);
  }
}

TEST_CASE("payload shorter than header dims is a dimension mismatch") {
  const auto seq = make_sequence("trunc", random_frames(4, 8, 3));
  const auto path = temp_file("trunc.eseq");
  write_sequence(seq, path);
  // Chop one float off the payload.
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - sizeof(float));
  try {
    read_sequence(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("bad magic is malformed, missing file is missing") {
  const auto path = temp_file("garbage.eseq");
  {
    std::ofstream os(path, std::ios::binary);
    os << "\x01\x02garbage\xff";
  }
  try {
    read_sequence(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedFile);
  }
  try {
    read_sequence(temp_file("does_not_exist.eseq"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingFile);
  }
}

TEST_CASE("text fixtures parse") {
  const auto path = temp_file("fixture.txt");
  {
    std::ofstream os(path);
    os << "#id: hand-written\n";
    os << "1.0 2.0 3.0\n";
    os << "4.0 5.0 6.0\n";
  }
  const auto seq = read_sequence(path);
  CHECK(seq.id == "hand-written");
  CHECK(seq.length() == 2);
  CHECK(seq.dim() == 3);
  CHECK(seq.vectors(1, 2) == 6.0f);

  // Inconsistent row width is a dimension mismatch.
  {
    std::ofstream os(path);
    os << "1.0 2.0 3.0\n";
    os << "4.0 5.0\n";
  }
  try {
    read_sequence(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
}

TEST_CASE("non-finite values are rejected") {
  // 1e39 overflows float32 to infinity during conversion.
  const auto path = temp_file("nonfinite.txt");
  {
    std::ofstream os(path);
    os << "1.0 1e39\n";
  }
  try {
    read_sequence(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFiniteValue);
  }
  // Same failure through the binary path: patch a NaN into the payload.
  const auto seq = make_sequence("ok", FrameMatrixF::Constant(2, 2, 1.0f));
  const auto bin = temp_file("nan.eseq");
  write_sequence(seq, bin);
  {
    std::fstream os(bin, std::ios::in | std::ios::out | std::ios::binary);
    os.seekp(-4, std::ios::end);
    const float nan = std::numeric_limits<float>::quiet_NaN();
    os.write(reinterpret_cast<const char*>(&nan), sizeof(nan));
  }
  try {
    read_sequence(bin);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFiniteValue);
  }
  FrameMatrixF bad(1, 2);
  bad << 1.0f, std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(make_sequence("bad", bad), Error);
}

TEST_CASE("empty id and empty matrix are invalid") {
  CHECK_THROWS_AS(make_sequence("", FrameMatrixF::Zero(1, 1)), Error);
  CHECK_THROWS_AS(make_sequence("x", FrameMatrixF(0, 4)), Error);
}

}  // TEST_SUITE

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

#include <array>
#include <cstdint>
#include <string_view>

namespace sdtwsv {

// Counter-based generator philox4x32-10 (Salmon et al., SC'11), with the
// reference multipliers 0xD2511F53 / 0xCD9E8D57 and Weyl key increments
// 0x9E3779B9 / 0xBB67AE85. The 64-bit seed is the key; the stream selects
// the upper counter words, so each (seed, stream) pair owns a disjoint
// substream of 2^64 blocks. Output is reproducible bit-for-bit across
// platforms and runs.
class Philox4x32 {
 public:
  static constexpr std::string_view kName = "philox4x32-10";
  static constexpr std::string_view kVersion = "1";

  explicit Philox4x32(uint64_t seed, uint64_t stream = 0);

  uint32_t next_u32();
  uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double next_double();

  // Standard normal deviate; Box-Muller on (0,1] x [0,1) uniforms with the
  // second deviate of each pair cached.
  double next_gaussian();

  // One raw 10-round block; exposed for known-answer tests.
  static std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& counter,
                                       const std::array<uint32_t, 2>& key);

 private:
  void refill();

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 4> counter_;
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace sdtwsv

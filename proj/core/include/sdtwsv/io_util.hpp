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
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "sdtwsv/errors.hpp"

namespace sdtwsv::io {

// Little-endian raw binary helpers for the model containers. Matrices go
// out row-major float64 regardless of in-memory layout.

template <typename T>
void write_pod(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!is) {
    throw Error(ErrorCode::kMalformedFile, "truncated while reading " + what);
  }
  return value;
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) write_pod(os, m(i, j));
}

inline Eigen::MatrixXd read_matrix(std::istream& is, Eigen::Index rows,
                                   Eigen::Index cols,
                                   const std::string& what) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = read_pod<double>(is, what);
  return m;
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) write_pod(os, v(i));
}

inline Eigen::VectorXd read_vector(std::istream& is, Eigen::Index size,
                                   const std::string& what) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = read_pod<double>(is, what);
  return v;
}

}  // namespace sdtwsv::io

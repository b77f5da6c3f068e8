/*
 * Copyright 2026 The lexattr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LEXATTR_MATRIX_H_
#define LEXATTR_MATRIX_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lexattr {

// Dense row-major matrix of doubles. Small and value-semantic: the model
// weights and per-token embeddings are at most a few thousand entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool SameShape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Per-token input embeddings (L x d), the integration variable of every
// path method. `padding` is either empty (no PAD rows) or holds one flag per
// row; flagged rows are excluded from the reference model's pooling.
struct EmbeddingMatrix {
  Matrix values;
  std::vector<std::uint8_t> padding;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : values(rows, cols, fill) {}
  explicit EmbeddingMatrix(Matrix m) : values(std::move(m)) {}

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
  bool is_padding(std::size_t r) const {
    return !padding.empty() && padding[r] != 0;
  }
  bool SameShape(const EmbeddingMatrix& other) const {
    return values.SameShape(other.values);
  }

  friend bool operator==(const EmbeddingMatrix&,
                         const EmbeddingMatrix&) = default;
};

// True when every entry is finite.
bool AllFinite(std::span<const double> values);

double Dot(std::span<const double> a, std::span<const double> b);

}  // namespace lexattr

#endif  // LEXATTR_MATRIX_H_

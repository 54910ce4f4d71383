// Copyright 2026 The ahnpl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Vector arithmetic and cosine-similarity primitives for the shared
// image/text embedding space. All arithmetic is double precision and every
// reduction runs in ascending index order, so results are bitwise
// reproducible.

#ifndef AHNPL_EMBEDDING_H_
#define AHNPL_EMBEDDING_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace ahnpl {

// A real vector in the shared multimodal space. Holds encoder outputs
// (raw) as well as normalized vectors; nothing about the type forces unit
// norm.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}
  EmbeddingVector(std::initializer_list<double> values) : values_(values) {}

  static EmbeddingVector Zeros(std::size_t dim) {
    return EmbeddingVector(std::vector<double>(dim, 0.0));
  }

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  const std::vector<double>& vector() const { return values_; }

  bool AllFinite() const;

  friend bool operator==(const EmbeddingVector&,
                         const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

double Dot(std::span<const double> a, std::span<const double> b);
double L2Norm(std::span<const double> v);

// Returns v / ||v||. Fails on a zero or non-finite vector.
absl::StatusOr<EmbeddingVector> L2Normalize(const EmbeddingVector& v);

// a.b / (||a|| ||b||). Fails on a dimension mismatch or a zero-norm input.
absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b);

// Unchecked cosine for hot loops; callers guarantee equal dims and nonzero
// norms. Produces exactly the same bits as CosineSimilarity.
double CosineUnchecked(std::span<const double> a, std::span<const double> b);

// Accumulates upstream * d cos(a, b) / da into grad_a and the matching term
// into grad_b. An empty gradient span skips that side.
void AccumulateCosineGradient(std::span<const double> a,
                              std::span<const double> b, double upstream,
                              std::span<double> grad_a,
                              std::span<double> grad_b);

// Row axis indexes texts, column axis indexes images.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t text, std::size_t image) const {
    return entries_[text * cols_ + image];
  }
  double& operator()(std::size_t text, std::size_t image) {
    return entries_[text * cols_ + image];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

absl::StatusOr<SimilarityMatrix> ComputeSimilarityMatrix(
    std::span<const EmbeddingVector> texts,
    std::span<const EmbeddingVector> images);

// Embedding file: UTF-8, header line "#dim D", then one record per line,
// "id<TAB>v1 v2 ... vD".
struct EmbeddingRecord {
  std::string id;
  EmbeddingVector vector;
};

std::string FormatReal(double value);
std::string FormatEmbeddingLine(const std::string& id,
                                std::span<const double> values);
absl::StatusOr<EmbeddingRecord> ParseEmbeddingLine(const std::string& line,
                                                   std::size_t dim);

absl::Status WriteEmbeddingFile(const std::string& path, std::size_t dim,
                                std::span<const EmbeddingRecord> records);
absl::StatusOr<std::vector<EmbeddingRecord>> ReadEmbeddingFile(
    const std::string& path);

}  // namespace ahnpl

#endif  // AHNPL_EMBEDDING_H_

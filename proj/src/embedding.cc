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

#include "ahnpl/embedding.h"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace ahnpl {

bool EmbeddingVector::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double L2Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

absl::StatusOr<EmbeddingVector> L2Normalize(const EmbeddingVector& v) {
  if (v.dim() == 0) return absl::InvalidArgumentError("empty vector");
  if (!v.AllFinite()) {
    return absl::InvalidArgumentError("cannot normalize non-finite vector");
  }
  const double norm = L2Norm(v.values());
  if (norm == 0.0) {
    return absl::InvalidArgumentError("cannot normalize zero vector");
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x /= norm;
  return EmbeddingVector(std::move(out));
}

double CosineUnchecked(std::span<const double> a, std::span<const double> b) {
  return Dot(a, b) / (L2Norm(a) * L2Norm(b));
}

absl::StatusOr<double> CosineSimilarity(const EmbeddingVector& a,
                                        const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension mismatch: ", a.dim(), " vs ", b.dim()));
  }
  if (a.dim() == 0) return absl::InvalidArgumentError("empty vectors");
  if (L2Norm(a.values()) == 0.0 || L2Norm(b.values()) == 0.0) {
    return absl::InvalidArgumentError("cosine of zero-norm vector");
  }
  return CosineUnchecked(a.values(), b.values());
}

void AccumulateCosineGradient(std::span<const double> a,
                              std::span<const double> b, double upstream,
                              std::span<double> grad_a,
                              std::span<double> grad_b) {
  if (upstream == 0.0) return;
  const double norm_a = L2Norm(a);
  const double norm_b = L2Norm(b);
  const double inv_ab = 1.0 / (norm_a * norm_b);
  const double cosine = Dot(a, b) * inv_ab;
  // d cos / da = b / (|a||b|) - cos * a / |a|^2, symmetric in b.
  if (!grad_a.empty()) {
    const double self = cosine / (norm_a * norm_a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      grad_a[i] += upstream * (b[i] * inv_ab - self * a[i]);
    }
  }
  if (!grad_b.empty()) {
    const double self = cosine / (norm_b * norm_b);
    for (std::size_t i = 0; i < b.size(); ++i) {
      grad_b[i] += upstream * (a[i] * inv_ab - self * b[i]);
    }
  }
}

absl::StatusOr<SimilarityMatrix> ComputeSimilarityMatrix(
    std::span<const EmbeddingVector> texts,
    std::span<const EmbeddingVector> images) {
  if (texts.empty()) return absl::InvalidArgumentError("no texts");
  if (texts.size() != images.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "count mismatch: ", texts.size(), " texts vs ", images.size(),
        " images"));
  }
  SimilarityMatrix sims(texts.size(), images.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = 0; j < images.size(); ++j) {
      absl::StatusOr<double> s = CosineSimilarity(texts[i], images[j]);
      if (!s.ok()) return s.status();
      sims(i, j) = *s;
    }
  }
  return sims;
}

std::string FormatReal(double value) { return absl::StrFormat("%.17g", value); }

std::string FormatEmbeddingLine(const std::string& id,
                                std::span<const double> values) {
  std::string line = id;
  line.push_back('\t');
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) line.push_back(' ');
    line += FormatReal(values[i]);
  }
  return line;
}

absl::StatusOr<EmbeddingRecord> ParseEmbeddingLine(const std::string& line,
                                                   std::size_t dim) {
  const std::size_t tab = line.find('\t');
  if (tab == std::string::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("embedding line has no tab: '", line, "'"));
  }
  EmbeddingRecord record;
  record.id = line.substr(0, tab);
  std::vector<double> values;
  values.reserve(dim);
  for (absl::string_view field :
       absl::StrSplit(absl::string_view(line).substr(tab + 1), ' ',
                      absl::SkipEmpty())) {
    double v = 0.0;
    if (!absl::SimpleAtod(field, &v) || !std::isfinite(v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad real '", field, "' in record ", record.id));
    }
    values.push_back(v);
  }
  if (values.size() != dim) {
    return absl::InvalidArgumentError(absl::StrCat(
        "record ", record.id, " has ", values.size(), " values, expected ",
        dim));
  }
  record.vector = EmbeddingVector(std::move(values));
  return record;
}

absl::Status WriteEmbeddingFile(const std::string& path, std::size_t dim,
                                std::span<const EmbeddingRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << "#dim " << dim << '\n';
  for (const EmbeddingRecord& r : records) {
    if (r.vector.dim() != dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("record ", r.id, " has dim ", r.vector.dim()));
    }
    out << FormatEmbeddingLine(r.id, r.vector.values()) << '\n';
  }
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<EmbeddingRecord>> ReadEmbeddingFile(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": empty file"));
  }
  absl::string_view header(line);
  std::size_t dim = 0;
  if (!absl::ConsumePrefix(&header, "#dim ") ||
      !absl::SimpleAtoi(header, &dim) || dim == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": expected '#dim D' header"));
  }
  std::vector<EmbeddingRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    absl::StatusOr<EmbeddingRecord> record = ParseEmbeddingLine(line, dim);
    if (!record.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": ", record.status().message()));
    }
    records.push_back(*std::move(record));
  }
  return records;
}

}  // namespace ahnpl

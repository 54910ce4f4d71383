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

#include "ahnpl/encoders.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/match.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace ahnpl {
namespace {

ParamBlock MakeBlock(std::string name, int rows, int cols) {
  return ParamBlock{std::move(name), rows, cols,
                    std::vector<double>(static_cast<std::size_t>(rows) * cols,
                                        0.0)};
}

void FillGaussian(ParamBlock& block, double stddev, Rng& rng) {
  for (double& v : block.values) v = stddev * StandardNormal(rng);
}

// Hidden text representation h (length H).
std::vector<double> TextHidden(const EncoderParams& params,
                               std::span<const int> token_ids) {
  const int hidden = params.config.hidden_dim;
  const bool positional =
      params.config.variant == TextEncoderVariant::kPositionAware;
  std::vector<double> h(hidden, 0.0);
  for (std::size_t p = 0; p < token_ids.size(); ++p) {
    auto e = params.token_embedding.row(token_ids[p]);
    if (positional) {
      auto pos = params.position_embedding.row(static_cast<int>(p));
      for (int k = 0; k < hidden; ++k) h[k] += e[k] * pos[k];
    } else {
      for (int k = 0; k < hidden; ++k) h[k] += e[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(token_ids.size());
  for (double& v : h) v *= inv;
  return h;
}

// e = W^T x + b for W (in x out).
EmbeddingVector Affine(const ParamBlock& weight, const ParamBlock& bias,
                       std::span<const double> x) {
  std::vector<double> out(bias.values);
  for (int r = 0; r < weight.rows; ++r) {
    const double xr = x[r];
    auto w = weight.row(r);
    for (int c = 0; c < weight.cols; ++c) out[c] += xr * w[c];
  }
  return EmbeddingVector(std::move(out));
}

void AffineBackward(const ParamBlock& weight, std::span<const double> x,
                    std::span<const double> grad_out, ParamBlock& grad_weight,
                    ParamBlock& grad_bias, std::span<double> grad_x) {
  for (int c = 0; c < weight.cols; ++c) grad_bias.values[c] += grad_out[c];
  for (int r = 0; r < weight.rows; ++r) {
    auto gw = grad_weight.row(r);
    auto w = weight.row(r);
    double gx = 0.0;
    for (int c = 0; c < weight.cols; ++c) {
      gw[c] += x[r] * grad_out[c];
      gx += w[c] * grad_out[c];
    }
    if (!grad_x.empty()) grad_x[r] += gx;
  }
}

absl::Status ReadBlock(std::istream& in, ParamBlock& block) {
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError("truncated checkpoint");
  }
  std::vector<std::string> header = absl::StrSplit(line, ' ');
  int rows = 0;
  int cols = 0;
  if (header.size() != 4 || header[0] != "#block" ||
      header[1] != block.name || !absl::SimpleAtoi(header[2], &rows) ||
      !absl::SimpleAtoi(header[3], &cols) || rows != block.rows ||
      cols != block.cols) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected block ", block.name, " ", block.rows, "x", block.cols,
        ", got '", line, "'"));
  }
  if (!std::getline(in, line) || line != absl::StrCat("#dim ", cols)) {
    return absl::InvalidArgumentError(
        absl::StrCat("block ", block.name, ": expected '#dim ", cols, "'"));
  }
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) {
      return absl::InvalidArgumentError(
          absl::StrCat("block ", block.name, " truncated"));
    }
    absl::StatusOr<EmbeddingRecord> record = ParseEmbeddingLine(line, cols);
    if (!record.ok()) return record.status();
    if (record->id != absl::StrCat(r)) {
      return absl::InvalidArgumentError(
          absl::StrCat("block ", block.name, ": row ", r, " out of order"));
    }
    std::copy(record->vector.values().begin(), record->vector.values().end(),
              block.row(r).begin());
  }
  return absl::OkStatus();
}

}  // namespace

std::string VariantName(TextEncoderVariant variant) {
  return variant == TextEncoderVariant::kBagOfTokens ? "bag" : "position";
}

absl::StatusOr<TextEncoderVariant> ParseVariant(const std::string& name) {
  if (name == "bag") return TextEncoderVariant::kBagOfTokens;
  if (name == "position") return TextEncoderVariant::kPositionAware;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown text encoder variant '", name, "'"));
}

absl::Status EncoderConfig::Validate() const {
  if (vocab_size < 1 || hidden_dim < 1 || embed_dim < 1 || feature_dim < 1 ||
      max_length < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        "encoder dims must be positive (V=", vocab_size, " H=", hidden_dim,
        " D=", embed_dim, " F=", feature_dim, " L=", max_length, ")"));
  }
  return absl::OkStatus();
}

Vocabulary::Vocabulary() { Add(kUnknownToken); }

int Vocabulary::Add(const std::string& word) {
  auto [it, inserted] = ids_.emplace(word, size());
  if (inserted) words_.push_back(word);
  return it->second;
}

int Vocabulary::Lookup(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnknownId : it->second;
}

std::vector<int> Vocabulary::Encode(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(Lookup(t));
  return ids;
}

EncoderParams EncoderParams::Zeros(const EncoderConfig& config) {
  EncoderParams p;
  p.config = config;
  p.token_embedding =
      MakeBlock("token_embedding", config.vocab_size, config.hidden_dim);
  p.position_embedding =
      MakeBlock("position_embedding", config.max_length, config.hidden_dim);
  p.text_projection =
      MakeBlock("text_projection", config.hidden_dim, config.embed_dim);
  p.text_bias = MakeBlock("text_bias", 1, config.embed_dim);
  p.image_projection =
      MakeBlock("image_projection", config.feature_dim, config.embed_dim);
  p.image_bias = MakeBlock("image_bias", 1, config.embed_dim);
  return p;
}

std::vector<ParamBlock*> EncoderParams::Blocks() {
  return {&token_embedding, &position_embedding, &text_projection,
          &text_bias,       &image_projection,   &image_bias};
}

std::vector<const ParamBlock*> EncoderParams::Blocks() const {
  return {&token_embedding, &position_embedding, &text_projection,
          &text_bias,       &image_projection,   &image_bias};
}

std::size_t EncoderParams::NumValues() const {
  std::size_t n = 0;
  for (const ParamBlock* b : Blocks()) n += b->values.size();
  return n;
}

bool EncoderParams::AllFinite() const {
  for (const ParamBlock* b : Blocks()) {
    for (double v : b->values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

absl::StatusOr<EncoderParams> InitParams(const EncoderConfig& config,
                                         Rng& rng) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  EncoderParams p = EncoderParams::Zeros(config);
  // Lookup tables have fan-in 1.
  FillGaussian(p.token_embedding, 1.0, rng);
  FillGaussian(p.position_embedding, 1.0, rng);
  FillGaussian(p.text_projection, 1.0 / std::sqrt(config.hidden_dim), rng);
  FillGaussian(p.image_projection, 1.0 / std::sqrt(config.feature_dim), rng);
  return p;
}

absl::StatusOr<EmbeddingVector> EncodeText(const EncoderParams& params,
                                           std::span<const int> token_ids) {
  if (token_ids.empty()) return absl::InvalidArgumentError("empty caption");
  if (params.config.variant == TextEncoderVariant::kPositionAware &&
      static_cast<int>(token_ids.size()) > params.config.max_length) {
    return absl::InvalidArgumentError(
        absl::StrCat("caption of ", token_ids.size(),
                     " tokens exceeds max_length ", params.config.max_length));
  }
  for (int id : token_ids) {
    if (id < 0 || id >= params.config.vocab_size) {
      return absl::OutOfRangeError(absl::StrCat("token id ", id,
                                                " outside vocabulary of ",
                                                params.config.vocab_size));
    }
  }
  const std::vector<double> h = TextHidden(params, token_ids);
  return Affine(params.text_projection, params.text_bias, h);
}

absl::StatusOr<EmbeddingVector> EncodeImage(const EncoderParams& params,
                                            std::span<const double> features) {
  if (static_cast<int>(features.size()) != params.config.feature_dim) {
    return absl::InvalidArgumentError(
        absl::StrCat("image features have dim ", features.size(),
                     ", expected ", params.config.feature_dim));
  }
  return Affine(params.image_projection, params.image_bias, features);
}

void BackwardText(const EncoderParams& params, std::span<const int> token_ids,
                  std::span<const double> grad_embedding,
                  EncoderGradients& grads) {
  const int hidden = params.config.hidden_dim;
  const std::vector<double> h = TextHidden(params, token_ids);
  std::vector<double> grad_h(hidden, 0.0);
  AffineBackward(params.text_projection, h, grad_embedding,
                 grads.text_projection, grads.text_bias, grad_h);
  const double inv = 1.0 / static_cast<double>(token_ids.size());
  const bool positional =
      params.config.variant == TextEncoderVariant::kPositionAware;
  for (std::size_t p = 0; p < token_ids.size(); ++p) {
    auto g_e = grads.token_embedding.row(token_ids[p]);
    if (positional) {
      const int pos_row = static_cast<int>(p);
      auto e = params.token_embedding.row(token_ids[p]);
      auto pos = params.position_embedding.row(pos_row);
      auto g_pos = grads.position_embedding.row(pos_row);
      for (int k = 0; k < hidden; ++k) {
        g_e[k] += grad_h[k] * pos[k] * inv;
        g_pos[k] += grad_h[k] * e[k] * inv;
      }
    } else {
      for (int k = 0; k < hidden; ++k) g_e[k] += grad_h[k] * inv;
    }
  }
}

void BackwardImage(const EncoderParams& params,
                   std::span<const double> features,
                   std::span<const double> grad_embedding,
                   EncoderGradients& grads) {
  AffineBackward(params.image_projection, features, grad_embedding,
                 grads.image_projection, grads.image_bias, {});
}

absl::Status SaveCheckpoint(const std::string& path,
                            const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  const EncoderConfig& c = checkpoint.params.config;
  out << "#ahnpl-ckpt v1\n";
  out << "#config variant=" << VariantName(c.variant)
      << " vocab=" << c.vocab_size << " hidden=" << c.hidden_dim
      << " embed=" << c.embed_dim << " feature=" << c.feature_dim
      << " max_length=" << c.max_length << '\n';
  out << "#margin_a " << FormatReal(checkpoint.margin_a) << '\n';
  out << "#vocab " << checkpoint.vocab.size() << '\n';
  for (int id = 0; id < checkpoint.vocab.size(); ++id) {
    out << id << '\t' << checkpoint.vocab.Word(id) << '\n';
  }
  for (const ParamBlock* block : checkpoint.params.Blocks()) {
    out << "#block " << block->name << ' ' << block->rows << ' '
        << block->cols << '\n';
    out << "#dim " << block->cols << '\n';
    for (int r = 0; r < block->rows; ++r) {
      out << FormatEmbeddingLine(absl::StrCat(r), block->row(r)) << '\n';
    }
  }
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("write failed: ", path));
}

absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  auto bad = [&](absl::string_view why) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", why));
  };
  std::string line;
  if (!std::getline(in, line) || line != "#ahnpl-ckpt v1") {
    return bad("missing '#ahnpl-ckpt v1' header");
  }

  EncoderConfig config;
  if (!std::getline(in, line) || !absl::StartsWith(line, "#config ")) {
    return bad("missing #config line");
  }
  for (absl::string_view field :
       absl::StrSplit(absl::string_view(line).substr(8), ' ')) {
    std::pair<std::string, std::string> kv = absl::StrSplit(field, '=');
    bool ok = true;
    if (kv.first == "variant") {
      absl::StatusOr<TextEncoderVariant> v = ParseVariant(kv.second);
      ok = v.ok();
      if (ok) config.variant = *v;
    } else if (kv.first == "vocab") {
      ok = absl::SimpleAtoi(kv.second, &config.vocab_size);
    } else if (kv.first == "hidden") {
      ok = absl::SimpleAtoi(kv.second, &config.hidden_dim);
    } else if (kv.first == "embed") {
      ok = absl::SimpleAtoi(kv.second, &config.embed_dim);
    } else if (kv.first == "feature") {
      ok = absl::SimpleAtoi(kv.second, &config.feature_dim);
    } else if (kv.first == "max_length") {
      ok = absl::SimpleAtoi(kv.second, &config.max_length);
    } else {
      ok = false;
    }
    if (!ok) return bad(absl::StrCat("bad config field '", field, "'"));
  }
  if (absl::Status s = config.Validate(); !s.ok()) return s;

  Checkpoint checkpoint;
  absl::string_view rest;
  if (!std::getline(in, line)) return bad("missing #margin_a");
  rest = line;
  if (!absl::ConsumePrefix(&rest, "#margin_a ") ||
      !absl::SimpleAtod(rest, &checkpoint.margin_a) ||
      !std::isfinite(checkpoint.margin_a)) {
    return bad("bad #margin_a line");
  }

  int vocab_size = 0;
  if (!std::getline(in, line)) return bad("missing #vocab");
  rest = line;
  if (!absl::ConsumePrefix(&rest, "#vocab ") ||
      !absl::SimpleAtoi(rest, &vocab_size) ||
      vocab_size != config.vocab_size) {
    return bad("bad #vocab line");
  }
  for (int id = 0; id < vocab_size; ++id) {
    if (!std::getline(in, line)) return bad("truncated vocabulary");
    std::vector<std::string> fields = absl::StrSplit(line, '\t');
    if (fields.size() != 2 || fields[0] != absl::StrCat(id)) {
      return bad(absl::StrCat("bad vocabulary line ", id));
    }
    if (checkpoint.vocab.Add(fields[1]) != id) {
      return bad(absl::StrCat("vocabulary id ", id, " is inconsistent"));
    }
  }

  checkpoint.params = EncoderParams::Zeros(config);
  for (ParamBlock* block : checkpoint.params.Blocks()) {
    if (absl::Status s = ReadBlock(in, *block); !s.ok()) {
      return bad(s.message());
    }
  }
  return checkpoint;
}

}  // namespace ahnpl

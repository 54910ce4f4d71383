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

// Toy dual encoders mapping captions and image feature vectors into the
// shared D-dimensional space, with exact backward passes.
//
// Text:  h = mean_p g(w_p, p),  e_T = W_t^T h + b_t
//        bag variant       g(w, p) = E[w]
//        position variant  g(w, p) = E[w] * P[p]   (elementwise)
// Image: e_I = W_v^T f + b_v
//
// The position variant multiplies rather than concatenates the position
// vector: mean pooling of a concatenated position block is identical for
// every caption of a given length, so it cannot see word order.

#ifndef AHNPL_ENCODERS_H_
#define AHNPL_ENCODERS_H_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ahnpl/embedding.h"
#include "ahnpl/random.h"

namespace ahnpl {

enum class TextEncoderVariant { kBagOfTokens, kPositionAware };

std::string VariantName(TextEncoderVariant variant);
absl::StatusOr<TextEncoderVariant> ParseVariant(const std::string& name);

struct EncoderConfig {
  TextEncoderVariant variant = TextEncoderVariant::kPositionAware;
  int vocab_size = 0;      // V
  int hidden_dim = 64;     // H
  int embed_dim = 32;      // D
  int feature_dim = 0;     // F
  int max_length = 16;     // Rows of the position table.

  absl::Status Validate() const;
};

// Word <-> id map. Id 0 is reserved for unknown words.
class Vocabulary {
 public:
  static constexpr int kUnknownId = 0;
  static constexpr char kUnknownToken[] = "<unk>";

  Vocabulary();
  int Add(const std::string& word);
  int Lookup(const std::string& word) const;
  const std::string& Word(int id) const { return words_[id]; }
  int size() const { return static_cast<int>(words_.size()); }
  std::vector<int> Encode(const std::vector<std::string>& tokens) const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

// A named dense row-major block.
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  std::span<double> row(int r) {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * cols,
            static_cast<std::size_t>(cols)};
  }
};

struct EncoderParams {
  EncoderConfig config;
  ParamBlock token_embedding;     // V x H
  ParamBlock position_embedding;  // max_length x H; unused by the bag variant
  ParamBlock text_projection;     // H x D
  ParamBlock text_bias;           // 1 x D
  ParamBlock image_projection;    // F x D
  ParamBlock image_bias;          // 1 x D

  // Zero-valued blocks with the shapes of `config`.
  static EncoderParams Zeros(const EncoderConfig& config);

  std::vector<ParamBlock*> Blocks();
  std::vector<const ParamBlock*> Blocks() const;
  std::size_t NumValues() const;
  bool AllFinite() const;
};

// Gradients mirror parameter shapes exactly.
using EncoderGradients = EncoderParams;

// Gaussian init with standard deviation 1/sqrt(fan_in); biases zero.
absl::StatusOr<EncoderParams> InitParams(const EncoderConfig& config,
                                         Rng& rng);

absl::StatusOr<EmbeddingVector> EncodeText(const EncoderParams& params,
                                           std::span<const int> token_ids);
absl::StatusOr<EmbeddingVector> EncodeImage(const EncoderParams& params,
                                            std::span<const double> features);

// Accumulate d(loss)/d(params) given d(loss)/d(embedding). Inputs must have
// passed the corresponding Encode call.
void BackwardText(const EncoderParams& params, std::span<const int> token_ids,
                  std::span<const double> grad_embedding,
                  EncoderGradients& grads);
void BackwardImage(const EncoderParams& params,
                   std::span<const double> features,
                   std::span<const double> grad_embedding,
                   EncoderGradients& grads);

// Checkpoint file: "#ahnpl-ckpt v1", a config line, the vocabulary, the
// margin parameter, then each parameter block as "#block NAME ROWS COLS"
// followed by an embedding-format section ("#dim COLS" and one
// "row<TAB>values" line per row).
struct Checkpoint {
  EncoderParams params;
  Vocabulary vocab;
  double margin_a = 0.0;
};

absl::Status SaveCheckpoint(const std::string& path,
                            const Checkpoint& checkpoint);
absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path);

}  // namespace ahnpl

#endif  // AHNPL_ENCODERS_H_

/*
 * Copyright 2026 The ItsIRL Authors.
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

#ifndef ITSIRL_ENCODER_H_
#define ITSIRL_ENCODER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "itsirl/autodiff.h"
#include "itsirl/tensor.h"

namespace itsirl {

// Whitespace/lowercase token vocabulary. Ids 0-3 are reserved.
class TokenVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr std::string_view kReserved[] = {"[PAD]", "[UNK]", "[CLS]",
                                                   "[SEP]"};

  TokenVocab();
  // tokens must start with the four reserved tokens in order.
  explicit TokenVocab(std::vector<std::string> tokens);

  // Reserved tokens, then corpus tokens by descending frequency, ties
  // broken lexicographically.
  static TokenVocab build(std::span<const std::string> texts);

  int id(std::string_view token) const;  // kUnk when absent
  const std::string& token(int id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

TokenVocab load_vocab(const std::filesystem::path& path);
void write_vocab(const TokenVocab& vocab, const std::filesystem::path& path);

std::vector<std::string> split_words(std::string_view text);

// [CLS] m [SEP] s [SEP]. When longer than max_len, tokens are dropped from
// the end of the longer segment first; the three special tokens always stay.
std::vector<int> tokenize(std::string_view mention, std::string_view context,
                          const TokenVocab& vocab, std::size_t max_len = 128);

struct AffineParams {
  Tensor weight;
  Tensor bias;
};

// Toy stand-in for a transformer: mean-pooled token embeddings, then
// affine + relu, then a linear affine producing h in R^d.
struct EncoderParams {
  Tensor embedding;  // V x d_e
  AffineParams hidden;  // d x d_e
  AffineParams output;  // d x d
};

struct EncoderVars {
  Var embedding, hidden_w, hidden_b, output_w, output_b;
};

Var encode(Tape& tape, const EncoderVars& vars, std::span<const int> tokens);
Tensor encode(const EncoderParams& params, std::span<const int> tokens);

// Precomputed dense representations keyed by example id.
class ExternalVectorStore {
 public:
  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return dim_; }
  bool contains(const std::string& id) const { return vectors_.count(id) > 0; }
  // Throws DataError for unknown ids.
  const Tensor& at(const std::string& id) const;
  // Throws FormatError on duplicate id or mismatched dimension.
  void insert(std::string id, Tensor vec);
  const std::map<std::string, Tensor>& entries() const { return vectors_; }

 private:
  std::map<std::string, Tensor> vectors_;
  std::size_t dim_ = 0;
};

// JSON-lines {"id": string, "vec": [numbers]}.
ExternalVectorStore load_external_vectors(const std::filesystem::path& path);
// Values are written at 32-bit precision.
void write_external_vectors(const ExternalVectorStore& store,
                            const std::filesystem::path& path);

}  // namespace itsirl

#endif  // ITSIRL_ENCODER_H_

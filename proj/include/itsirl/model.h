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

#ifndef ITSIRL_MODEL_H_
#define ITSIRL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "itsirl/autodiff.h"
#include "itsirl/encoder.h"
#include "itsirl/optimizer.h"
#include "itsirl/tensor.h"

namespace itsirl {

// Interpretable representation: one probability per entity type.
using TypeVector = std::vector<double>;

struct ModelConfig {
  std::size_t dim = 64;        // d, width of h and of every decoder layer
  std::size_t embed_dim = 64;  // toy encoder token embedding width
  std::size_t num_types = 0;   // |T|
  std::size_t vocab_size = 0;
  int decoder_depth = 3;  // affine layers after the projection
  bool type_bias = true;
  double lambda = 1.0;
  std::size_t max_len = 128;
  // h comes from an ExternalVectorStore; the toy encoder is unused.
  bool external_encoder = false;

  // Throws DimensionError on an unusable configuration.
  void validate() const;
};

enum class ParamGroup { kEncoder, kTypeLayer, kProjection, kDecoder, kHead };

struct NamedTensor {
  std::string name;
  ParamGroup group;
  Tensor* tensor;
};

struct ItsIRLParams {
  ModelConfig config;
  EncoderParams encoder;
  AffineParams type_layer;  // E (|T| x d), b_E
  AffineParams projection;  // P (d x |T|), b_P
  std::vector<AffineParams> decoder;

  // Every learnable tensor in canonical order. Encoder tensors are omitted
  // for external-encoder models and the type bias when type_bias is off.
  std::vector<NamedTensor> tensors();
  std::vector<std::pair<std::string, const Tensor*>> tensors() const;
};

// Scaled uniform init: weights in +-sqrt(6 / (fan_in + fan_out)), zero bias.
void init_affine(AffineParams& layer, std::size_t out, std::size_t in,
                 std::uint64_t seed);
ItsIRLParams initialize_params(const ModelConfig& config, std::uint64_t seed);
// Fresh projection and decoder stack (depth from config).
void reinitialize_decoder(ItsIRLParams& params, std::uint64_t seed);

// Encoder input: tokens for the toy encoder, or a precomputed h.
struct ModelInput {
  std::vector<int> tokens;
  std::optional<Tensor> external_h;
};

struct ModelVars {
  EncoderVars encoder;
  Var type_w, type_b;
  Var proj_w, proj_b;
  std::vector<std::pair<Var, Var>> decoder;
};

// Registers params on the tape. Tensors in a trainable group get gradients
// and their (name, leaf) pairs are appended to leaves when given.
ModelVars bind_model(Tape& tape, const ItsIRLParams& params,
                     const std::set<ParamGroup>& trainable,
                     std::vector<std::pair<std::string, Var>>* leaves = nullptr);

Var represent(Tape& tape, const ModelVars& vars, const ModelInput& input);
// t = sigmoid(E h + b_E)
Var type_layer(Tape& tape, const ModelVars& vars, Var h);
// r = decoder(P t + b_P); relu between decoder layers, linear output.
Var decode(Tape& tape, const ModelVars& vars, Var t);

struct LossVars {
  Var total, recon, typing;
};
// L = L_recon + lambda * L_et with L_recon = mse(decode(t), h) and
// L_et = bce_multi(t, gold).
LossVars pretrain_loss(Tape& tape, const ModelVars& vars, Var h,
                       std::span<const int> gold, double lambda);

// Value-level conveniences over frozen params.
Tensor represent(const ItsIRLParams& params, const ModelInput& input);
Tensor type_layer(const ItsIRLParams& params, const Tensor& h);
Tensor decode(const ItsIRLParams& params, const Tensor& t);

struct PretrainLossValue {
  double total = 0, recon = 0, typing = 0;
};
PretrainLossValue pretrain_loss(const ItsIRLParams& params, const Tensor& h,
                                std::span<const int> gold);

// |{ j : t_j > tau }|
std::size_t sparsity_at(std::span<const double> t, double tau);

// ---------------------------------------------------------------------------
// Pre-training.

struct PretrainExample {
  std::string id;
  ModelInput input;
  std::vector<int> gold;  // type indices
};

enum class PretrainMode { kIer, kEndToEnd, kDecoderOnly };

const char* to_string(PretrainMode mode);
PretrainMode parse_pretrain_mode(std::string_view text);

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 32;
  AdamConfig adam;
};

// Corpus-mean losses; components absent from a mode's objective are empty.
struct LossSummary {
  double objective = 0;
  std::optional<double> recon;
  std::optional<double> typing;
};

struct EpochRecord {
  int epoch = 0;
  LossSummary mean;  // running mean over the epoch's minibatches
};

struct PretrainTrace {
  PretrainMode mode = PretrainMode::kEndToEnd;
  LossSummary initial;  // full corpus, before the first update
  LossSummary final;    // full corpus, after the last update
  std::vector<EpochRecord> epochs;
};

struct PretrainResult {
  ItsIRLParams params;
  PretrainTrace trace;
};

LossSummary corpus_loss(std::span<const PretrainExample> corpus,
                        const ItsIRLParams& params, PretrainMode mode);

// Typing-only training of encoder + type layer.
PretrainResult pretrain_ier(std::span<const PretrainExample> corpus,
                            ItsIRLParams params, const TrainConfig& config,
                            std::uint64_t seed);
// Minimizes L over every parameter.
PretrainResult pretrain_end_to_end(std::span<const PretrainExample> corpus,
                                   ItsIRLParams params,
                                   const TrainConfig& config,
                                   std::uint64_t seed);
// Keeps encoder and type layer of frozen_ier, draws a fresh projection and
// decoder from seed, and minimizes L_recon over those alone.
PretrainResult pretrain_decoder_only(std::span<const PretrainExample> corpus,
                                     const ItsIRLParams& frozen_ier,
                                     const TrainConfig& config,
                                     std::uint64_t seed);

}  // namespace itsirl

#endif  // ITSIRL_MODEL_H_

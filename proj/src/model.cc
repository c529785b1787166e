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

#include "itsirl/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "itsirl/errors.h"
#include "trainer.h"

namespace itsirl {

void ModelConfig::validate() const {
  if (dim == 0) throw DimensionError("model dimension must be positive");
  if (num_types == 0) throw DimensionError("type system is empty");
  if (decoder_depth < 1) throw DimensionError("decoder depth must be >= 1");
  if (!external_encoder && (embed_dim == 0 || vocab_size < 4)) {
    throw DimensionError(
        "toy encoder needs embed_dim > 0 and the four reserved tokens");
  }
  if (lambda < 0) throw DimensionError("lambda must be non-negative");
}

namespace {

template <typename Params, typename Visit>
void visit_tensors(Params& p, Visit&& visit) {
  if (!p.config.external_encoder) {
    visit("encoder.embedding", ParamGroup::kEncoder, p.encoder.embedding);
    visit("encoder.hidden.weight", ParamGroup::kEncoder,
          p.encoder.hidden.weight);
    visit("encoder.hidden.bias", ParamGroup::kEncoder, p.encoder.hidden.bias);
    visit("encoder.output.weight", ParamGroup::kEncoder,
          p.encoder.output.weight);
    visit("encoder.output.bias", ParamGroup::kEncoder, p.encoder.output.bias);
  }
  visit("type.weight", ParamGroup::kTypeLayer, p.type_layer.weight);
  if (p.config.type_bias) {
    visit("type.bias", ParamGroup::kTypeLayer, p.type_layer.bias);
  }
  visit("projection.weight", ParamGroup::kProjection, p.projection.weight);
  visit("projection.bias", ParamGroup::kProjection, p.projection.bias);
  for (std::size_t i = 0; i < p.decoder.size(); ++i) {
    const std::string prefix = "decoder." + std::to_string(i);
    visit(prefix + ".weight", ParamGroup::kDecoder, p.decoder[i].weight);
    visit(prefix + ".bias", ParamGroup::kDecoder, p.decoder[i].bias);
  }
}

void uniform_fill(Tensor& t, double limit, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values()) v = dist(rng);
}

}  // namespace

std::vector<NamedTensor> ItsIRLParams::tensors() {
  std::vector<NamedTensor> out;
  visit_tensors(*this, [&](std::string name, ParamGroup g, Tensor& t) {
    out.push_back({std::move(name), g, &t});
  });
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ItsIRLParams::tensors()
    const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  visit_tensors(*this, [&](std::string name, ParamGroup, const Tensor& t) {
    out.emplace_back(std::move(name), &t);
  });
  return out;
}

void init_affine(AffineParams& layer, std::size_t out, std::size_t in,
                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  layer.weight = Tensor(out, in);
  uniform_fill(layer.weight, std::sqrt(6.0 / static_cast<double>(in + out)),
               rng);
  layer.bias = Tensor(out, 1);
}

ItsIRLParams initialize_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ItsIRLParams p;
  p.config = config;
  // Each tensor draws from its own stream so adding a layer never shifts
  // the others.
  std::seed_seq seq{seed};
  std::vector<std::uint64_t> seeds(8);
  seq.generate(seeds.begin(), seeds.end());
  const std::size_t d = config.dim;
  const std::size_t types = config.num_types;
  if (!config.external_encoder) {
    std::mt19937_64 rng(seeds[0]);
    p.encoder.embedding = Tensor(config.vocab_size, config.embed_dim);
    uniform_fill(p.encoder.embedding,
                 std::sqrt(6.0 / static_cast<double>(config.vocab_size +
                                                     config.embed_dim)),
                 rng);
    init_affine(p.encoder.hidden, d, config.embed_dim, seeds[1]);
    init_affine(p.encoder.output, d, d, seeds[2]);
  }
  init_affine(p.type_layer, types, d, seeds[3]);
  reinitialize_decoder(p, seeds[4]);
  return p;
}

void reinitialize_decoder(ItsIRLParams& params, std::uint64_t seed) {
  const std::size_t d = params.config.dim;
  std::seed_seq seq{seed, std::uint64_t{0x6465636f646572}};
  std::vector<std::uint64_t> seeds(params.config.decoder_depth + 1);
  seq.generate(seeds.begin(), seeds.end());
  init_affine(params.projection, d, params.config.num_types, seeds[0]);
  params.decoder.assign(params.config.decoder_depth, AffineParams{});
  for (int i = 0; i < params.config.decoder_depth; ++i) {
    init_affine(params.decoder[i], d, d, seeds[i + 1]);
  }
}

ModelVars bind_model(Tape& tape, const ItsIRLParams& params,
                     const std::set<ParamGroup>& trainable,
                     std::vector<std::pair<std::string, Var>>* leaves) {
  auto bind = [&](const std::string& name, ParamGroup group,
                  const Tensor& t) {
    const bool train = trainable.count(group) > 0;
    const Var v = tape.parameter(t, train);
    if (train && leaves != nullptr) leaves->emplace_back(name, v);
    return v;
  };
  ModelVars vars;
  const ModelConfig& c = params.config;
  if (!c.external_encoder) {
    const EncoderParams& e = params.encoder;
    vars.encoder.embedding =
        bind("encoder.embedding", ParamGroup::kEncoder, e.embedding);
    vars.encoder.hidden_w =
        bind("encoder.hidden.weight", ParamGroup::kEncoder, e.hidden.weight);
    vars.encoder.hidden_b =
        bind("encoder.hidden.bias", ParamGroup::kEncoder, e.hidden.bias);
    vars.encoder.output_w =
        bind("encoder.output.weight", ParamGroup::kEncoder, e.output.weight);
    vars.encoder.output_b =
        bind("encoder.output.bias", ParamGroup::kEncoder, e.output.bias);
  }
  vars.type_w =
      bind("type.weight", ParamGroup::kTypeLayer, params.type_layer.weight);
  if (c.type_bias) {
    vars.type_b =
        bind("type.bias", ParamGroup::kTypeLayer, params.type_layer.bias);
  }
  vars.proj_w = bind("projection.weight", ParamGroup::kProjection,
                     params.projection.weight);
  vars.proj_b = bind("projection.bias", ParamGroup::kProjection,
                     params.projection.bias);
  for (std::size_t i = 0; i < params.decoder.size(); ++i) {
    const std::string prefix = "decoder." + std::to_string(i);
    const Var w =
        bind(prefix + ".weight", ParamGroup::kDecoder, params.decoder[i].weight);
    const Var b =
        bind(prefix + ".bias", ParamGroup::kDecoder, params.decoder[i].bias);
    vars.decoder.emplace_back(w, b);
  }
  return vars;
}

Var represent(Tape& tape, const ModelVars& vars, const ModelInput& input) {
  if (input.external_h.has_value()) return tape.constant(*input.external_h);
  if (!vars.encoder.embedding.valid()) {
    throw DataError("model uses external vectors but input has none");
  }
  return encode(tape, vars.encoder, input.tokens);
}

Var type_layer(Tape& tape, const ModelVars& vars, Var h) {
  const Var logits = vars.type_b.valid()
                         ? affine(tape, vars.type_w, vars.type_b, h)
                         : matvec(tape, vars.type_w, h);
  return sigmoid(tape, logits);
}

Var decode(Tape& tape, const ModelVars& vars, Var t) {
  Var z = affine(tape, vars.proj_w, vars.proj_b, t);
  for (std::size_t i = 0; i < vars.decoder.size(); ++i) {
    z = affine(tape, vars.decoder[i].first, vars.decoder[i].second, z);
    if (i + 1 < vars.decoder.size()) z = relu(tape, z);
  }
  return z;
}

LossVars pretrain_loss(Tape& tape, const ModelVars& vars, Var h,
                       std::span<const int> gold, double lambda) {
  const Var t = type_layer(tape, vars, h);
  const Var r = decode(tape, vars, t);
  LossVars out;
  out.recon = mse(tape, r, h);
  out.typing = bce_multi(tape, t, gold);
  out.total = add_scaled(tape, out.recon, out.typing, lambda);
  return out;
}

Tensor represent(const ItsIRLParams& params, const ModelInput& input) {
  Tape tape;
  const ModelVars vars = bind_model(tape, params, {});
  return tape.value(represent(tape, vars, input));
}

Tensor type_layer(const ItsIRLParams& params, const Tensor& h) {
  Tape tape;
  const ModelVars vars = bind_model(tape, params, {});
  return tape.value(type_layer(tape, vars, tape.constant(h)));
}

Tensor decode(const ItsIRLParams& params, const Tensor& t) {
  Tape tape;
  const ModelVars vars = bind_model(tape, params, {});
  return tape.value(decode(tape, vars, tape.constant(t)));
}

PretrainLossValue pretrain_loss(const ItsIRLParams& params, const Tensor& h,
                                std::span<const int> gold) {
  Tape tape;
  const ModelVars vars = bind_model(tape, params, {});
  const LossVars l = pretrain_loss(tape, vars, tape.constant(h), gold,
                                   params.config.lambda);
  return {tape.value(l.total)[0], tape.value(l.recon)[0],
          tape.value(l.typing)[0]};
}

std::size_t sparsity_at(std::span<const double> t, double tau) {
  return static_cast<std::size_t>(
      std::count_if(t.begin(), t.end(), [tau](double v) { return v > tau; }));
}

// ---------------------------------------------------------------------------

const char* to_string(PretrainMode mode) {
  switch (mode) {
    case PretrainMode::kIer:
      return "ier";
    case PretrainMode::kEndToEnd:
      return "end-to-end";
    case PretrainMode::kDecoderOnly:
      return "decoder-only";
  }
  return "?";
}

PretrainMode parse_pretrain_mode(std::string_view text) {
  if (text == "ier") return PretrainMode::kIer;
  if (text == "end-to-end") return PretrainMode::kEndToEnd;
  if (text == "decoder-only") return PretrainMode::kDecoderOnly;
  throw ValidationError("unknown pretraining mode '" + std::string(text) +
                        "'");
}

namespace {

struct ModeLoss {
  Var objective;
  Var recon;   // invalid when not part of the mode
  Var typing;  // invalid when not part of the mode
};

ModeLoss mode_loss(Tape& tape, const ModelVars& vars,
                   const PretrainExample& ex, PretrainMode mode,
                   double lambda) {
  const Var h = represent(tape, vars, ex.input);
  switch (mode) {
    case PretrainMode::kIer: {
      const Var typing = bce_multi(tape, type_layer(tape, vars, h), ex.gold);
      return {typing, Var{}, typing};
    }
    case PretrainMode::kDecoderOnly: {
      const Var recon = mse(tape, decode(tape, vars, type_layer(tape, vars, h)), h);
      return {recon, recon, Var{}};
    }
    case PretrainMode::kEndToEnd: {
      const LossVars l = pretrain_loss(tape, vars, h, ex.gold, lambda);
      return {l.total, l.recon, l.typing};
    }
  }
  throw Error("unreachable");
}

std::set<ParamGroup> trainable_groups(PretrainMode mode,
                                      const ModelConfig& config) {
  std::set<ParamGroup> groups;
  switch (mode) {
    case PretrainMode::kIer:
      groups = {ParamGroup::kEncoder, ParamGroup::kTypeLayer};
      break;
    case PretrainMode::kDecoderOnly:
      groups = {ParamGroup::kProjection, ParamGroup::kDecoder};
      break;
    case PretrainMode::kEndToEnd:
      groups = {ParamGroup::kEncoder, ParamGroup::kTypeLayer,
                ParamGroup::kProjection, ParamGroup::kDecoder};
      break;
  }
  if (config.external_encoder) groups.erase(ParamGroup::kEncoder);
  return groups;
}

void validate_corpus(std::span<const PretrainExample> corpus,
                     const ItsIRLParams& params) {
  if (corpus.empty()) throw DataError("pre-training corpus is empty");
  for (const PretrainExample& ex : corpus) {
    for (int g : ex.gold) {
      if (g < 0 || static_cast<std::size_t>(g) >= params.config.num_types) {
        throw DataError("example '" + ex.id + "' has type index " +
                        std::to_string(g) + " outside [0, " +
                        std::to_string(params.config.num_types) + ")");
      }
    }
  }
}

PretrainResult run_pretraining(std::span<const PretrainExample> corpus,
                               ItsIRLParams params, PretrainMode mode,
                               const TrainConfig& config,
                               std::uint64_t seed) {
  params.config.validate();
  validate_corpus(corpus, params);
  PretrainResult result;
  result.trace.mode = mode;
  result.trace.initial = corpus_loss(corpus, params, mode);

  OptimizerState optimizer;
  optimizer.config = config.adam;
  const std::set<ParamGroup> groups = trainable_groups(mode, params.config);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  const double lambda = params.config.lambda;
  const double n = static_cast<double>(corpus.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double recon_sum = 0.0, typing_sum = 0.0;
    const double total = internal::train_epoch(
        params, nullptr, groups, order, config.batch_size,
        [&](Tape& tape, const internal::BoundModel& bound, std::size_t i) {
          const ModeLoss l = mode_loss(tape, bound.model, corpus[i], mode,
                                       lambda);
          if (l.recon.valid()) recon_sum += tape.value(l.recon)[0];
          if (l.typing.valid()) typing_sum += tape.value(l.typing)[0];
          return l.objective;
        },
        optimizer, epoch);
    EpochRecord record;
    record.epoch = epoch;
    record.mean.objective = total / n;
    if (mode != PretrainMode::kIer) record.mean.recon = recon_sum / n;
    if (mode != PretrainMode::kDecoderOnly) record.mean.typing = typing_sum / n;
    result.trace.epochs.push_back(record);
  }
  result.trace.final = corpus_loss(corpus, params, mode);
  result.params = std::move(params);
  return result;
}

}  // namespace

LossSummary corpus_loss(std::span<const PretrainExample> corpus,
                        const ItsIRLParams& params, PretrainMode mode) {
  double objective = 0.0, recon = 0.0, typing = 0.0;
  for (const PretrainExample& ex : corpus) {
    Tape tape;
    const ModelVars vars = bind_model(tape, params, {});
    const ModeLoss l = mode_loss(tape, vars, ex, mode, params.config.lambda);
    objective += tape.value(l.objective)[0];
    if (l.recon.valid()) recon += tape.value(l.recon)[0];
    if (l.typing.valid()) typing += tape.value(l.typing)[0];
  }
  const double n = static_cast<double>(std::max<std::size_t>(corpus.size(), 1));
  LossSummary s;
  s.objective = objective / n;
  if (mode != PretrainMode::kIer) s.recon = recon / n;
  if (mode != PretrainMode::kDecoderOnly) s.typing = typing / n;
  return s;
}

PretrainResult pretrain_ier(std::span<const PretrainExample> corpus,
                            ItsIRLParams params, const TrainConfig& config,
                            std::uint64_t seed) {
  return run_pretraining(corpus, std::move(params), PretrainMode::kIer, config,
                         seed);
}

PretrainResult pretrain_end_to_end(std::span<const PretrainExample> corpus,
                                   ItsIRLParams params,
                                   const TrainConfig& config,
                                   std::uint64_t seed) {
  return run_pretraining(corpus, std::move(params), PretrainMode::kEndToEnd,
                         config, seed);
}

PretrainResult pretrain_decoder_only(std::span<const PretrainExample> corpus,
                                     const ItsIRLParams& frozen_ier,
                                     const TrainConfig& config,
                                     std::uint64_t seed) {
  ItsIRLParams params = frozen_ier;
  reinitialize_decoder(params, seed);
  return run_pretraining(corpus, std::move(params), PretrainMode::kDecoderOnly,
                         config, seed);
}

}  // namespace itsirl

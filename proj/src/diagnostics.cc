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

#include "itsirl/diagnostics.h"

#include <cmath>
#include <random>
#include <sstream>

#include "itsirl/errors.h"
#include "itsirl/gradcheck.h"

namespace itsirl {

ModelVars vars_from_leaves(const ModelConfig& config,
                           std::span<const Var> leaves) {
  const std::size_t expected = (config.external_encoder ? 0 : 5) +
                               (config.type_bias ? 2 : 1) + 2 +
                               2 * static_cast<std::size_t>(config.decoder_depth);
  if (leaves.size() != expected) {
    throw DimensionError("expected " + std::to_string(expected) +
                         " parameter leaves, got " +
                         std::to_string(leaves.size()));
  }
  ModelVars vars;
  std::size_t k = 0;
  if (!config.external_encoder) {
    vars.encoder = {leaves[0], leaves[1], leaves[2], leaves[3], leaves[4]};
    k = 5;
  }
  vars.type_w = leaves[k++];
  if (config.type_bias) vars.type_b = leaves[k++];
  vars.proj_w = leaves[k++];
  vars.proj_b = leaves[k++];
  for (int i = 0; i < config.decoder_depth; ++i) {
    vars.decoder.emplace_back(leaves[k], leaves[k + 1]);
    k += 2;
  }
  return vars;
}

const char* to_string(CompositionLoss loss) {
  switch (loss) {
    case CompositionLoss::kRecon: return "recon";
    case CompositionLoss::kTyping: return "typing";
    case CompositionLoss::kTotal: return "total";
    case CompositionLoss::kClassify: return "classify";
    case CompositionLoss::kRegress: return "regress";
  }
  return "?";
}

std::vector<CompositionCheck> check_random_compositions(std::size_t count,
                                                        std::uint64_t seed) {
  constexpr CompositionLoss kLosses[] = {
      CompositionLoss::kRecon, CompositionLoss::kTyping, CompositionLoss::kTotal,
      CompositionLoss::kClassify, CompositionLoss::kRegress};
  constexpr int kDepths[] = {1, 3, 5};

  std::mt19937_64 rng(seed);
  auto draw = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::vector<CompositionCheck> out;
  for (std::size_t n = 0; n < count; ++n) {
    const CompositionLoss kind = kLosses[n % 5];
    ModelConfig config;
    config.num_types = draw(2, 32);
    config.dim = draw(2, 32);
    config.embed_dim = draw(2, 32);
    config.vocab_size = draw(6, 32);
    config.decoder_depth = kDepths[draw(0, 2)];
    config.type_bias = draw(0, 1) == 1;
    config.lambda = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const ItsIRLParams init = initialize_params(config, rng());

    std::vector<int> tokens{TokenVocab::kCls};
    for (std::size_t i = draw(1, 10); i > 0; --i) {
      tokens.push_back(static_cast<int>(draw(4, config.vocab_size - 1)));
    }
    tokens.push_back(TokenVocab::kSep);
    tokens.push_back(TokenVocab::kSep);
    std::vector<int> gold;
    for (std::size_t j = 0; j < config.num_types; ++j) {
      if (draw(0, 3) == 0) gold.push_back(static_cast<int>(j));
    }
    const std::size_t classes = draw(2, 6);
    const int label = static_cast<int>(draw(0, classes - 1));
    const double target = std::uniform_real_distribution<double>(0.0, 4.0)(rng);

    // Weights keep the training init scale. Biases are drawn away from zero:
    // a zero bias behind a dead relu layer puts the next pre-activation
    // exactly on the kink, where central differences are meaningless.
    std::uniform_real_distribution<double> bias(-0.1, 0.1);
    std::vector<Tensor> params;
    for (const auto& [name, t] : init.tensors()) {
      params.push_back(*t);
      if (name.ends_with(".bias")) {
        for (std::size_t i = 0; i < params.back().size(); ++i) {
          params.back()[i] = bias(rng);
        }
      }
    }
    const std::size_t model_leaves = params.size();
    const bool with_head =
        kind == CompositionLoss::kClassify || kind == CompositionLoss::kRegress;
    if (with_head) {
      AffineParams head;
      init_affine(head, kind == CompositionLoss::kClassify ? classes : 1,
                  config.dim, rng());
      for (std::size_t i = 0; i < head.bias.size(); ++i) {
        head.bias[i] = bias(rng);
      }
      params.push_back(std::move(head.weight));
      params.push_back(std::move(head.bias));
    }

    const LossBuilder loss = [&](Tape& tape, std::span<const Var> leaves) {
      const ModelVars vars =
          vars_from_leaves(config, leaves.first(model_leaves));
      ModelInput input;
      input.tokens = tokens;
      const Var h = represent(tape, vars, input);
      switch (kind) {
        case CompositionLoss::kRecon:
          return pretrain_loss(tape, vars, h, gold, config.lambda).recon;
        case CompositionLoss::kTyping:
          return pretrain_loss(tape, vars, h, gold, config.lambda).typing;
        case CompositionLoss::kTotal:
          return pretrain_loss(tape, vars, h, gold, config.lambda).total;
        case CompositionLoss::kClassify:
        case CompositionLoss::kRegress:
          break;
      }
      const Var r = decode(tape, vars, type_layer(tape, vars, h));
      const Var out = affine(tape, leaves[model_leaves],
                             leaves[model_leaves + 1], r);
      if (kind == CompositionLoss::kClassify) {
        return softmax_cross_entropy(tape, out, label);
      }
      return mse(tape, out, tape.constant(Tensor(1, 1, target)));
    };

    CompositionCheck check;
    std::ostringstream desc;
    desc << to_string(kind) << " |T|=" << config.num_types
         << " d=" << config.dim << " d_e=" << config.embed_dim
         << " V=" << config.vocab_size << " depth=" << config.decoder_depth
         << (config.type_bias ? "" : " no-type-bias");
    check.description = desc.str();
    for (const Tensor& p : params) check.parameters += p.size();
    constexpr double kEps = 1e-5;
    const GradCheckResult r = grad_check_detailed(loss, params, kEps);
    check.max_relative_error = r.max_relative_error;
    check.loss = r.loss;
    const double ulp =
        std::nextafter(std::abs(r.loss), INFINITY) - std::abs(r.loss);
    check.error_in_ulps =
        ulp > 0.0 ? std::abs(r.analytic - r.numeric) * 2.0 * kEps / ulp : 0.0;
    out.push_back(std::move(check));
  }
  return out;
}

}  // namespace itsirl

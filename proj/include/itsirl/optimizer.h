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

#ifndef ITSIRL_OPTIMIZER_H_
#define ITSIRL_OPTIMIZER_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "itsirl/tensor.h"

namespace itsirl {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  struct Moments {
    Tensor first;
    Tensor second;
  };

  AdamConfig config;
  std::int64_t step = 0;
  std::map<std::string, Moments> moments;
};

// A trainable tensor paired with its gradient for one update.
struct ParamUpdate {
  std::string name;
  Tensor* value = nullptr;
  const Tensor* grad = nullptr;
};

// One bias-corrected Adam step over all entries. Gradients are validated
// before anything is modified; a non-finite gradient throws TrainingError
// naming the parameter and leaves params and state untouched.
void adam_step(std::span<const ParamUpdate> updates, OptimizerState& state);

}  // namespace itsirl

#endif  // ITSIRL_OPTIMIZER_H_

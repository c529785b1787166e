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

#include "itsirl/optimizer.h"

#include <cmath>

#include "itsirl/errors.h"

namespace itsirl {

void adam_step(std::span<const ParamUpdate> updates, OptimizerState& state) {
  for (const ParamUpdate& u : updates) {
    require_same_shape(*u.value, *u.grad, u.name.c_str());
    if (!u.grad->all_finite()) {
      throw TrainingError("non-finite gradient for parameter '" + u.name +
                          "' at optimizer step " +
                          std::to_string(state.step + 1));
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (const ParamUpdate& u : updates) {
    auto [it, inserted] = state.moments.try_emplace(u.name);
    OptimizerState::Moments& m = it->second;
    if (inserted) {
      m.first = Tensor(u.value->rows(), u.value->cols());
      m.second = Tensor(u.value->rows(), u.value->cols());
    }
    Tensor& p = *u.value;
    const Tensor& g = *u.grad;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m.first[i] = c.beta1 * m.first[i] + (1.0 - c.beta1) * g[i];
      m.second[i] = c.beta2 * m.second[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m.first[i] / correction1;
      const double v_hat = m.second[i] / correction2;
      p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace itsirl

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

#ifndef ITSIRL_GRADCHECK_H_
#define ITSIRL_GRADCHECK_H_

#include <functional>
#include <span>
#include <vector>

#include "itsirl/autodiff.h"
#include "itsirl/tensor.h"

namespace itsirl {

// Builds a scalar loss on the tape from parameter leaves (one per tensor in
// the params list, same order).
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Entry that produced max_relative_error.
  std::size_t param = 0;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double loss = 0.0;  // unperturbed loss value
};

// Compares reverse-mode gradients against central differences
// (f(x+eps) - f(x-eps)) / 2eps for every element of every parameter.
// Returns max |a - n| / max(|a|, |n|, 1e-8). params are restored on return.
double grad_check(const LossBuilder& loss, std::vector<Tensor>& params,
                  double eps = 1e-5);
GradCheckResult grad_check_detailed(const LossBuilder& loss,
                                    std::vector<Tensor>& params,
                                    double eps = 1e-5);

}  // namespace itsirl

#endif  // ITSIRL_GRADCHECK_H_

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

#ifndef ITSIRL_DIAGNOSTICS_H_
#define ITSIRL_DIAGNOSTICS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itsirl/autodiff.h"
#include "itsirl/model.h"

namespace itsirl {

// ModelVars over leaves given in ItsIRLParams::tensors() order.
ModelVars vars_from_leaves(const ModelConfig& config,
                           std::span<const Var> leaves);

enum class CompositionLoss { kRecon, kTyping, kTotal, kClassify, kRegress };
const char* to_string(CompositionLoss loss);

struct CompositionCheck {
  std::string description;
  std::size_t parameters = 0;  // scalar parameter count
  double max_relative_error = 0.0;
  double loss = 0.0;
  // Worst entry's |analytic - numeric| in units of the central-difference
  // rounding scale ulp(loss) / (2 eps).
  double error_in_ulps = 0.0;
};

// Gradient checks of randomly drawn encoder -> type layer -> decoder ->
// loss pipelines (every dimension <= 32), cycling through the five loss
// kinds. Deterministic in seed.
std::vector<CompositionCheck> check_random_compositions(std::size_t count,
                                                        std::uint64_t seed);

}  // namespace itsirl

#endif  // ITSIRL_DIAGNOSTICS_H_

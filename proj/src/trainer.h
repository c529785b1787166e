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

#ifndef ITSIRL_SRC_TRAINER_H_
#define ITSIRL_SRC_TRAINER_H_

#include <cstddef>
#include <functional>
#include <set>
#include <span>

#include "itsirl/model.h"
#include "itsirl/optimizer.h"
#include "itsirl/tasks.h"

namespace itsirl::internal {

struct BoundModel {
  ModelVars model;
  HeadVars head;  // invalid Vars when no head is trained
};

// Per-example objective on the batch tape.
using ExampleLoss =
    std::function<Var(Tape&, const BoundModel&, std::size_t example)>;

// One pass over `order` in minibatches of batch_size. Each batch minimizes
// the mean example objective with one Adam step over the trainable groups.
// Returns the sum of example objectives seen during the epoch.
double train_epoch(ItsIRLParams& params, TaskHead* head,
                   const std::set<ParamGroup>& trainable,
                   std::span<const std::size_t> order, std::size_t batch_size,
                   const ExampleLoss& loss, OptimizerState& optimizer,
                   int epoch);

}  // namespace itsirl::internal

#endif  // ITSIRL_SRC_TRAINER_H_

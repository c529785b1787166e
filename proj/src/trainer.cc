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

#include "trainer.h"

#include <cmath>
#include <string>
#include <vector>

#include "itsirl/errors.h"

namespace itsirl::internal {

double train_epoch(ItsIRLParams& params, TaskHead* head,
                   const std::set<ParamGroup>& trainable,
                   std::span<const std::size_t> order, std::size_t batch_size,
                   const ExampleLoss& loss, OptimizerState& optimizer,
                   int epoch) {
  if (batch_size == 0) throw Error("batch size must be positive");
  std::vector<NamedTensor> targets = params.tensors();
  if (head != nullptr) {
    targets.push_back({"head.weight", ParamGroup::kHead, &head->linear.weight});
    targets.push_back({"head.bias", ParamGroup::kHead, &head->linear.bias});
  }

  double epoch_total = 0.0;
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < order.size();
       start += batch_size, ++batch_index) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Tape tape;
    std::vector<std::pair<std::string, Var>> leaves;
    BoundModel bound;
    bound.model = bind_model(tape, params, trainable, &leaves);
    if (head != nullptr) {
      bound.head =
          bind_head(tape, *head, trainable.count(ParamGroup::kHead) > 0,
                    &leaves);
    }
    std::vector<Var> terms;
    terms.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) {
      terms.push_back(loss(tape, bound, order[i]));
    }
    const Var batch_sum = sum_scalars(tape, terms);
    const double value = tape.value(batch_sum)[0];
    if (!std::isfinite(value)) {
      throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                          ", batch " + std::to_string(batch_index));
    }
    epoch_total += value;
    const Var objective =
        scale(tape, batch_sum, 1.0 / static_cast<double>(end - start));
    tape.backward(objective);

    std::vector<Tensor> grads;
    grads.reserve(leaves.size());
    for (const auto& [name, var] : leaves) grads.push_back(tape.grad(var));
    std::vector<ParamUpdate> updates;
    updates.reserve(leaves.size());
    std::size_t next = 0;
    for (const NamedTensor& target : targets) {
      if (next < leaves.size() && leaves[next].first == target.name) {
        updates.push_back({target.name, target.tensor, &grads[next]});
        ++next;
      }
    }
    if (next != leaves.size()) throw Error("parameter binding out of order");
    adam_step(updates, optimizer);
  }
  return epoch_total;
}

}  // namespace itsirl::internal

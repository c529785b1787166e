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

#ifndef ITSIRL_AUTODIFF_H_
#define ITSIRL_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "itsirl/tensor.h"

namespace itsirl {

// Handle to a node recorded on a Tape.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so reverse
// insertion order is a valid topological order for the backward sweep.
//
// Leaves created with parameter() reference caller-owned tensors; those must
// outlive the tape.
class Tape {
 public:
  // Receives the node's accumulated output gradient and pushes contributions
  // into parent gradients via accumulate().
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var constant(Tensor value);
  Var parameter(const Tensor& value, bool requires_grad = true);

  // Records an op result. The backward closure is kept only when some parent
  // requires a gradient.
  Var record(Tensor value, std::initializer_list<Var> parents,
             Backward backward);
  Var record(Tensor value, std::span<const Var> parents, Backward backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Gradient accumulated by backward(); an all-zero tensor of the value's
  // shape if nothing reached this node.
  Tensor grad(Var v) const;

  // Gradient accumulator for v, allocated on first use. No-op target if v
  // does not require a gradient (returns nullptr).
  Tensor* accumulator(Var v);

  // Seeds d(loss)/d(loss) = 1 and sweeps backwards. loss must be 1x1.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Backward backward;
  };

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable ops.

// y = W x + b
Var affine(Tape& tape, Var w, Var b, Var x);
// y = W x
Var matvec(Tape& tape, Var w, Var x);
Var sigmoid(Tape& tape, Var x);
Var relu(Tape& tape, Var x);
Var add(Tape& tape, Var a, Var b);
// a + scale * b
Var add_scaled(Tape& tape, Var a, Var b, double scale);
Var scale(Tape& tape, Var x, double factor);
// Sum of 1x1 nodes.
Var sum_scalars(Tape& tape, std::span<const Var> terms);

// Mean of the embedding-table rows selected by ids, as a column vector.
Var mean_embedding(Tape& tape, Var table, std::span<const int> ids);

inline constexpr double kBceClamp = 1e-7;

// -sum_j [y_j ln t_j + (1 - y_j) ln(1 - t_j)] with t clamped to
// [kBceClamp, 1 - kBceClamp]; y_j = 1 iff j is in gold.
Var bce_multi(Tape& tape, Var t, std::span<const int> gold);
// Mean over all elements of (a - b)^2.
Var mse(Tape& tape, Var a, Var b);
// -log softmax(logits)[label]
Var softmax_cross_entropy(Tape& tape, Var logits, int label);

// ---------------------------------------------------------------------------
// Plain value helpers.

double sigmoid(double x);
std::vector<double> softmax(std::span<const double> logits);
// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace itsirl

#endif  // ITSIRL_AUTODIFF_H_

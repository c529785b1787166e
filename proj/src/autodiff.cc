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

#include "itsirl/autodiff.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "itsirl/errors.h"
#include "itsirl/kernels.h"

namespace itsirl {

Var Tape::constant(Tensor value) {
  Node node;
  node.owned = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::parameter(const Tensor& value, bool requires_grad) {
  Node node;
  node.external = &value;
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents,
                 Backward backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(),
                                                       parents.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents,
                 Backward backward) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = std::any_of(parents.begin(), parents.end(),
                                   [&](Var p) { return requires_grad(p); });
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tensor& Tape::value(Var v) const {
  const Node& node = nodes_[v.id];
  return node.external != nullptr ? *node.external : node.owned;
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (!node.grad.empty()) return node.grad;
  const Tensor& val = value(v);
  return Tensor(val.rows(), val.cols());
}

Tensor* Tape::accumulator(Var v) {
  Node& node = nodes_[v.id];
  if (!node.requires_grad) return nullptr;
  if (node.grad.empty()) {
    const Tensor& val = value(v);
    node.grad = Tensor(val.rows(), val.cols());
  }
  return &node.grad;
}

void Tape::backward(Var loss) {
  const Tensor& out = value(loss);
  if (out.rows() != 1 || out.cols() != 1) {
    throw DimensionError("backward requires a 1x1 loss, got " +
                         out.shape_string());
  }
  Tensor* seed = accumulator(loss);
  if (seed == nullptr) return;
  (*seed)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad);
  }
}

// ---------------------------------------------------------------------------

Var affine(Tape& tape, Var w, Var b, Var x) {
  const Tensor& wv = tape.value(w);
  const Tensor& bv = tape.value(b);
  const Tensor& xv = tape.value(x);
  if (xv.cols() != 1 || wv.cols() != xv.rows() || bv.cols() != 1 ||
      bv.rows() != wv.rows()) {
    throw DimensionError("affine: W" + wv.shape_string() + " b" +
                         bv.shape_string() + " x" + xv.shape_string());
  }
  Tensor y(wv.rows(), 1);
  kernels::affine(wv, bv.values(), xv.values(), y.values());
  return tape.record(std::move(y), {w, b, x},
                     [w, b, x](Tape& t, const Tensor& g) {
                       if (Tensor* dw = t.accumulator(w)) {
                         kernels::accumulate_outer(g.values(),
                                                   t.value(x).values(), *dw);
                       }
                       if (Tensor* db = t.accumulator(b)) {
                         for (std::size_t i = 0; i < g.size(); ++i) {
                           (*db)[i] += g[i];
                         }
                       }
                       if (Tensor* dx = t.accumulator(x)) {
                         kernels::accumulate_transposed(t.value(w), g.values(),
                                                        dx->values());
                       }
                     });
}

Var matvec(Tape& tape, Var w, Var x) {
  const Tensor& wv = tape.value(w);
  const Tensor& xv = tape.value(x);
  if (xv.cols() != 1 || wv.cols() != xv.rows()) {
    throw DimensionError("matvec: W" + wv.shape_string() + " x" +
                         xv.shape_string());
  }
  Tensor y(wv.rows(), 1);
  kernels::affine(wv, {}, xv.values(), y.values());
  return tape.record(std::move(y), {w, x}, [w, x](Tape& t, const Tensor& g) {
    if (Tensor* dw = t.accumulator(w)) {
      kernels::accumulate_outer(g.values(), t.value(x).values(), *dw);
    }
    if (Tensor* dx = t.accumulator(x)) {
      kernels::accumulate_transposed(t.value(w), g.values(), dx->values());
    }
  });
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var sigmoid(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = sigmoid(xv[i]);
  // The backward pass reads the node's own output.
  const Var self{static_cast<std::uint32_t>(tape.size())};
  return tape.record(std::move(y), {x}, [x, self](Tape& t, const Tensor& g) {
    Tensor* dx = t.accumulator(x);
    const Tensor& s = t.value(self);
    for (std::size_t i = 0; i < g.size(); ++i) {
      (*dx)[i] += g[i] * s[i] * (1.0 - s[i]);
    }
  });
}

Var relu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  return tape.record(std::move(y), {x}, [x](Tape& t, const Tensor& g) {
    Tensor* dx = t.accumulator(x);
    const Tensor& xs = t.value(x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xs[i] > 0.0) (*dx)[i] += g[i];
    }
  });
}

Var add(Tape& tape, Var a, Var b) { return add_scaled(tape, a, b, 1.0); }

Var add_scaled(Tape& tape, Var a, Var b, double factor) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape(av, bv, "add");
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + factor * bv[i];
  return tape.record(std::move(y), {a, b},
                     [a, b, factor](Tape& t, const Tensor& g) {
                       if (Tensor* da = t.accumulator(a)) {
                         for (std::size_t i = 0; i < g.size(); ++i) {
                           (*da)[i] += g[i];
                         }
                       }
                       if (Tensor* db = t.accumulator(b)) {
                         for (std::size_t i = 0; i < g.size(); ++i) {
                           (*db)[i] += factor * g[i];
                         }
                       }
                     });
}

Var scale(Tape& tape, Var x, double factor) {
  const Tensor& xv = tape.value(x);
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = factor * xv[i];
  return tape.record(std::move(y), {x}, [x, factor](Tape& t, const Tensor& g) {
    Tensor* dx = t.accumulator(x);
    for (std::size_t i = 0; i < g.size(); ++i) (*dx)[i] += factor * g[i];
  });
}

Var sum_scalars(Tape& tape, std::span<const Var> terms) {
  double total = 0.0;
  for (Var v : terms) {
    const Tensor& tv = tape.value(v);
    if (tv.size() != 1) {
      throw DimensionError("sum_scalars: expected 1x1, got " +
                           tv.shape_string());
    }
    total += tv[0];
  }
  std::vector<Var> parents(terms.begin(), terms.end());
  return tape.record(Tensor(1, 1, total), terms,
                     [parents](Tape& t, const Tensor& g) {
                       for (Var p : parents) {
                         if (Tensor* dp = t.accumulator(p)) (*dp)[0] += g[0];
                       }
                     });
}

Var mean_embedding(Tape& tape, Var table, std::span<const int> ids) {
  const Tensor& tv = tape.value(table);
  if (ids.empty()) throw DimensionError("mean_embedding: empty id sequence");
  const std::size_t dim = tv.cols();
  Tensor y(dim, 1);
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= tv.rows()) {
      throw IndexError("token id " + std::to_string(id) +
                       " outside embedding table of " +
                       std::to_string(tv.rows()) + " rows");
    }
    for (std::size_t j = 0; j < dim; ++j) y[j] += tv(id, j);
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (std::size_t j = 0; j < dim; ++j) y[j] *= inv;
  std::vector<int> kept(ids.begin(), ids.end());
  return tape.record(std::move(y), {table},
                     [table, kept, inv](Tape& t, const Tensor& g) {
                       Tensor* dt = t.accumulator(table);
                       for (int id : kept) {
                         for (std::size_t j = 0; j < g.size(); ++j) {
                           (*dt)(id, j) += inv * g[j];
                         }
                       }
                     });
}

Var bce_multi(Tape& tape, Var t, std::span<const int> gold) {
  const Tensor& tv = tape.value(t);
  std::vector<char> positive(tv.size(), 0);
  for (int j : gold) {
    if (j < 0 || static_cast<std::size_t>(j) >= tv.size()) {
      throw IndexError("gold type index " + std::to_string(j) +
                       " outside type vector of size " +
                       std::to_string(tv.size()));
    }
    positive[j] = 1;
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < tv.size(); ++j) {
    const double p = std::clamp(tv[j], kBceClamp, 1.0 - kBceClamp);
    loss -= positive[j] ? std::log(p) : std::log(1.0 - p);
  }
  return tape.record(
      Tensor(1, 1, loss), {t},
      [t, positive = std::move(positive)](Tape& tp, const Tensor& g) {
        Tensor* dt = tp.accumulator(t);
        const Tensor& v = tp.value(t);
        for (std::size_t j = 0; j < v.size(); ++j) {
          if (v[j] < kBceClamp || v[j] > 1.0 - kBceClamp) continue;
          const double d = positive[j] ? -1.0 / v[j] : 1.0 / (1.0 - v[j]);
          (*dt)[j] += g[0] * d;
        }
      });
}

Var mse(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_same_shape(av, bv, "mse");
  if (av.empty()) throw DimensionError("mse: empty tensors");
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double diff = av[i] - bv[i];
    total += diff * diff;
  }
  const double n = static_cast<double>(av.size());
  return tape.record(Tensor(1, 1, total / n), {a, b},
                     [a, b, n](Tape& t, const Tensor& g) {
                       const Tensor& x = t.value(a);
                       const Tensor& y = t.value(b);
                       Tensor* da = t.accumulator(a);
                       Tensor* db = t.accumulator(b);
                       for (std::size_t i = 0; i < x.size(); ++i) {
                         const double d = 2.0 * (x[i] - y[i]) / n * g[0];
                         if (da) (*da)[i] += d;
                         if (db) (*db)[i] -= d;
                       }
                     });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Var softmax_cross_entropy(Tape& tape, Var logits, int label) {
  const Tensor& lv = tape.value(logits);
  if (label < 0 || static_cast<std::size_t>(label) >= lv.size()) {
    throw IndexError("class label " + std::to_string(label) +
                     " outside " + std::to_string(lv.size()) + " classes");
  }
  std::vector<double> probs = softmax(lv.values());
  const double loss = -std::log(std::max(probs[label], 1e-300));
  return tape.record(
      Tensor(1, 1, loss), {logits},
      [logits, label, probs = std::move(probs)](Tape& t, const Tensor& g) {
        Tensor* dl = t.accumulator(logits);
        for (std::size_t i = 0; i < probs.size(); ++i) {
          const double target = static_cast<int>(i) == label ? 1.0 : 0.0;
          (*dl)[i] += g[0] * (probs[i] - target);
        }
      });
}

}  // namespace itsirl

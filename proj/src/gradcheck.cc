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

#include "itsirl/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace itsirl {
namespace {

double evaluate(const LossBuilder& loss, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.parameter(p, false));
  return tape.value(loss(tape, leaves))[0];
}

}  // namespace

double grad_check(const LossBuilder& loss, std::vector<Tensor>& params,
                  double eps) {
  return grad_check_detailed(loss, params, eps).max_relative_error;
}

GradCheckResult grad_check_detailed(const LossBuilder& loss,
                                    std::vector<Tensor>& params,
                                    double eps) {
  GradCheckResult result;
  result.loss = evaluate(loss, params);
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& p : params) leaves.push_back(tape.parameter(p, true));
    tape.backward(loss(tape, leaves));
    for (Var v : leaves) analytic.push_back(tape.grad(v));
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double plus = evaluate(loss, params);
      p[i] = saved - eps;
      const double minus = evaluate(loss, params);
      p[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[k][i];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error) {
        result = {rel, k, i, a, numeric, result.loss};
      }
    }
  }
  return result;
}

}  // namespace itsirl

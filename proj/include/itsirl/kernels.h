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

#ifndef ITSIRL_KERNELS_H_
#define ITSIRL_KERNELS_H_

#include <cstddef>
#include <span>

#include "itsirl/tensor.h"

// Dense inner loops used by the autodiff ops. Each kernel has a serial
// reference and an OpenMP version; both compute every output element with
// the same sequence of floating-point operations, so results are bitwise
// identical regardless of thread count.
namespace itsirl::kernels {

namespace serial {
// y = W x + b (b may be empty).
void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y);
// out += W^T g
void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out);
// dw += g x^T
void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw);
}  // namespace serial

namespace parallel {
void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y);
void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out);
void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw);
}  // namespace parallel

// Dispatching entry points: parallel when enabled and the matrix has at
// least parallel_threshold() elements.
void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y);
void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out);
void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw);

void set_parallel_enabled(bool enabled);
bool parallel_enabled();
std::size_t parallel_threshold();
void set_parallel_threshold(std::size_t elements);

}  // namespace itsirl::kernels

#endif  // ITSIRL_KERNELS_H_

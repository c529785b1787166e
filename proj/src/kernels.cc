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

#include "itsirl/kernels.h"

#include <algorithm>
#include <atomic>
#include <cstdint>

namespace itsirl::kernels {

namespace {
std::atomic<bool> g_parallel{true};
std::atomic<std::size_t> g_threshold{4096};

bool use_parallel(std::size_t elements) {
  return g_parallel.load(std::memory_order_relaxed) &&
         elements >= g_threshold.load(std::memory_order_relaxed);
}
}  // namespace

namespace serial {

void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += w(i, j) * x[j];
    y[i] = b.empty() ? acc : acc + b[i];
  }
}

void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out) {
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) out[j] += w(i, j) * gi;
  }
}

void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw) {
  const std::size_t rows = dw.rows();
  const std::size_t cols = dw.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) dw(i, j) += gi * x[j];
  }
}

}  // namespace serial

namespace parallel {

void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<std::int64_t>(w.rows());
  const std::size_t cols = w.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += w(i, j) * x[j];
    y[i] = b.empty() ? acc : acc + b[i];
  }
}

// Column-parallel: each out[j] still accumulates rows in ascending order,
// matching the serial reference exactly.
void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out) {
  // Column blocks keep each out[j] summed in row order, as in the serial loop.
  constexpr std::int64_t kBlock = 64;
  const std::size_t rows = w.rows();
  const auto cols = static_cast<std::int64_t>(w.cols());
  const std::int64_t blocks = (cols + kBlock - 1) / kBlock;
#pragma omp parallel for schedule(static)
  for (std::int64_t blk = 0; blk < blocks; ++blk) {
    const std::int64_t lo = blk * kBlock;
    const std::int64_t hi = std::min(cols, lo + kBlock);
    for (std::size_t i = 0; i < rows; ++i) {
      const double gi = g[i];
      for (std::int64_t j = lo; j < hi; ++j) out[j] += w(i, j) * gi;
    }
  }
}

void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw) {
  const auto rows = static_cast<std::int64_t>(dw.rows());
  const std::size_t cols = dw.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    const double gi = g[i];
    for (std::size_t j = 0; j < cols; ++j) dw(i, j) += gi * x[j];
  }
}

}  // namespace parallel

void affine(const Tensor& w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  if (use_parallel(w.size())) {
    parallel::affine(w, b, x, y);
  } else {
    serial::affine(w, b, x, y);
  }
}

void accumulate_transposed(const Tensor& w, std::span<const double> g,
                           std::span<double> out) {
  if (use_parallel(w.size())) {
    parallel::accumulate_transposed(w, g, out);
  } else {
    serial::accumulate_transposed(w, g, out);
  }
}

void accumulate_outer(std::span<const double> g, std::span<const double> x,
                      Tensor& dw) {
  if (use_parallel(dw.size())) {
    parallel::accumulate_outer(g, x, dw);
  } else {
    serial::accumulate_outer(g, x, dw);
  }
}

void set_parallel_enabled(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }
std::size_t parallel_threshold() { return g_threshold.load(); }
void set_parallel_threshold(std::size_t elements) {
  g_threshold.store(elements);
}

}  // namespace itsirl::kernels

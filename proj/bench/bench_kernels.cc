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

// Serial reference kernels against their OpenMP versions.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>
#include <omp.h>

#include "itsirl/kernels.h"
#include "itsirl/tensor.h"

namespace {

using itsirl::Tensor;
namespace k = itsirl::kernels;

struct Operands {
  Tensor w;
  std::vector<double> b, x, y, g, out;

  explicit Operands(std::size_t n) : w(n, n), b(n), x(n), y(n), g(n), out(n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1, 1);
    for (double& v : w.values()) v = u(rng);
    for (auto* vec : {&b, &x, &g}) {
      for (double& v : *vec) v = u(rng);
    }
  }
};

template <auto Kernel>
void BM_Affine(benchmark::State& state) {
  Operands o(state.range(0));
  for (auto _ : state) {
    Kernel(o.w, o.b, o.x, o.y);
    benchmark::DoNotOptimize(o.y.data());
  }
  state.SetItemsProcessed(state.iterations() * o.w.size());
}

template <auto Kernel>
void BM_Transposed(benchmark::State& state) {
  Operands o(state.range(0));
  for (auto _ : state) {
    Kernel(o.w, o.g, o.out);
    benchmark::DoNotOptimize(o.out.data());
  }
  state.SetItemsProcessed(state.iterations() * o.w.size());
}

template <auto Kernel>
void BM_Outer(benchmark::State& state) {
  Operands o(state.range(0));
  for (auto _ : state) {
    Kernel(o.g, o.x, o.w);
    benchmark::DoNotOptimize(o.w.values().data());
  }
  state.SetItemsProcessed(state.iterations() * o.w.size());
}

#define ITSIRL_SIZES ->RangeMultiplier(4)->Range(16, 1024)

BENCHMARK(BM_Affine<k::serial::affine>) ITSIRL_SIZES;
BENCHMARK(BM_Affine<k::parallel::affine>) ITSIRL_SIZES;
BENCHMARK(BM_Transposed<k::serial::accumulate_transposed>) ITSIRL_SIZES;
BENCHMARK(BM_Transposed<k::parallel::accumulate_transposed>) ITSIRL_SIZES;
BENCHMARK(BM_Outer<k::serial::accumulate_outer>) ITSIRL_SIZES;
BENCHMARK(BM_Outer<k::parallel::accumulate_outer>) ITSIRL_SIZES;

}  // namespace

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  benchmark::AddCustomContext("omp_max_threads",
                              std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

// Copyright (c) the SFC Project Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Timed comparison of the OpenMP production kernels against the serial
// reference implementations. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <vector>

#include "sfc/kernels.h"
#include "sfc/rng.h"

namespace {

using sfc::Rng;
namespace kernels = sfc::kernels;

std::vector<float> RandomVec(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.NextUniform(-1.0, 1.0));
  return v;
}

void BM_GemmParallel(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int k = m, n = m;
  const auto a = RandomVec(static_cast<size_t>(m) * k, 1);
  const auto b = RandomVec(static_cast<size_t>(k) * n, 2);
  std::vector<float> c(static_cast<size_t>(m) * n);
  for (auto _ : state) {
    kernels::Gemm(a.data(), b.data(), c.data(), m, k, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2ll * m * k * n);
}

void BM_GemmSerial(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int k = m, n = m;
  const auto a = RandomVec(static_cast<size_t>(m) * k, 1);
  const auto b = RandomVec(static_cast<size_t>(k) * n, 2);
  std::vector<float> c(static_cast<size_t>(m) * n);
  for (auto _ : state) {
    kernels::serial::Gemm(a.data(), b.data(), c.data(), m, k, n);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2ll * m * k * n);
}

void BM_SatdParallel(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto a = RandomVec(static_cast<size_t>(s) * s, 3);
  const auto b = RandomVec(static_cast<size_t>(s) * s, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::SatdPlaneSum(a.data(), b.data(), s, s, s, 8));
  }
  state.SetItemsProcessed(state.iterations() * s * s);
}

void BM_SatdSerial(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto a = RandomVec(static_cast<size_t>(s) * s, 3);
  const auto b = RandomVec(static_cast<size_t>(s) * s, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::serial::SatdPlaneSum(a.data(), b.data(), s, s, s, 8));
  }
  state.SetItemsProcessed(state.iterations() * s * s);
}

void BM_UpsampleParallel(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto src = RandomVec(static_cast<size_t>(s) * s * 3, 5);
  std::vector<float> dst(static_cast<size_t>(2 * s) * 2 * s * 3);
  for (auto _ : state) {
    kernels::UpsampleX2(src.data(), dst.data(), 1, s, s, 3);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * s * s * 3);
}

void BM_UpsampleSerial(benchmark::State& state) {
  const int s = static_cast<int>(state.range(0));
  const auto src = RandomVec(static_cast<size_t>(s) * s * 3, 5);
  std::vector<float> dst(static_cast<size_t>(2 * s) * 2 * s * 3);
  for (auto _ : state) {
    kernels::serial::UpsampleX2(src.data(), dst.data(), 1, s, s, 3);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * s * s * 3);
}

void BM_Conv2dGemm(benchmark::State& state) {
  // im2col + GEMM route on a 64x64x16 map, 3x3x16x32.
  const int h = 64, w = 64, cin = 16, cout = 32, k = 3;
  const auto x = RandomVec(static_cast<size_t>(h) * w * cin, 6);
  const auto wts = RandomVec(static_cast<size_t>(k) * k * cin * cout, 7);
  std::vector<float> cols(static_cast<size_t>(h) * w * k * k * cin);
  std::vector<float> y(static_cast<size_t>(h) * w * cout);
  for (auto _ : state) {
    kernels::Im2Col(x.data(), h, w, cin, k, 1, 1, cols.data(), h, w);
    kernels::Gemm(cols.data(), wts.data(), y.data(), h * w, k * k * cin, cout);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2ll * h * w * k * k * cin * cout);
}

void BM_Conv2dSerial(benchmark::State& state) {
  const int h = 64, w = 64, cin = 16, cout = 32, k = 3;
  const auto x = RandomVec(static_cast<size_t>(h) * w * cin, 6);
  const auto wts = RandomVec(static_cast<size_t>(k) * k * cin * cout, 7);
  std::vector<float> y(static_cast<size_t>(h) * w * cout);
  for (auto _ : state) {
    kernels::serial::Conv2d(x.data(), h, w, cin, wts.data(), nullptr, k, 1, 1,
                            y.data(), h, w, cout);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * 2ll * h * w * k * k * cin * cout);
}

}  // namespace

BENCHMARK(BM_GemmParallel)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_GemmSerial)->Arg(128)->Arg(256)->Arg(512);
BENCHMARK(BM_SatdParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_SatdSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_UpsampleParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_UpsampleSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_Conv2dGemm);
BENCHMARK(BM_Conv2dSerial);

BENCHMARK_MAIN();

/*
 * Copyright 2026 The FlexLP Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS / FLEX_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "flex/graph.hpp"
#include "flex/kernels.hpp"

namespace {

using namespace flex;

std::vector<double> randvec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

template <auto Fn>
void BM_gemm(benchmark::State& state) {
  const std::size_t n = state.range(0);
  auto a = randvec(n * n, 1), b = randvec(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Fn(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

CsrMatrix random_csr(std::size_t n, std::size_t avg_degree) {
  std::mt19937_64 rng(3);
  std::set<std::pair<NodeId, NodeId>> edges;
  while (edges.size() < n * avg_degree / 2) {
    NodeId u = rng() % n, v = rng() % n;
    if (u != v) edges.insert(std::minmax(u, v));
  }
  std::vector<std::pair<NodeId, NodeId>> list(edges.begin(), edges.end());
  return Graph::from_edges(n, list).adjacency();
}

template <auto Fn>
void BM_spmm(benchmark::State& state) {
  const std::size_t n = state.range(0), d = 64;
  auto s = random_csr(n, 8);
  auto b = randvec(n * d, 4);
  std::vector<double> c(n * d);
  for (auto _ : state) {
    Fn(s, b, c, d);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * s.nnz() * d);
}

template <auto Fn>
void BM_block_gram(benchmark::State& state) {
  const std::size_t blocks = state.range(0), d = 16;
  std::vector<std::size_t> sizes(blocks);
  std::mt19937_64 rng(5);
  for (auto& s : sizes) s = 5 + rng() % 40;
  auto layout = BlockLayout::from_sizes(sizes);
  auto h = randvec(layout.total_nodes * d, 6);
  std::vector<double> out(layout.total_entries);
  for (auto _ : state) {
    Fn(layout, h, d, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * layout.total_entries * d);
}

BENCHMARK(BM_gemm<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm<kernels::omp::gemm_nn>)->Name("gemm_nn/omp")->Arg(64)->Arg(256);
BENCHMARK(BM_spmm<kernels::serial::spmm>)->Name("spmm/serial")->Arg(2000)->Arg(20000);
BENCHMARK(BM_spmm<kernels::omp::spmm>)->Name("spmm/omp")->Arg(2000)->Arg(20000);
BENCHMARK(BM_block_gram<kernels::serial::block_gram>)->Name("block_gram/serial")->Arg(32)->Arg(256);
BENCHMARK(BM_block_gram<kernels::omp::block_gram>)->Name("block_gram/omp")->Arg(32)->Arg(256);

}  // namespace

int main(int argc, char** argv) {
  flex::kernels::configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}

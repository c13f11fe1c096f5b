// Serial reference kernels vs. their OpenMP row-parallel counterparts.
// Thread count follows OMP_NUM_THREADS.

#include <map>

#include <benchmark/benchmark.h>

#include "gad/dataset.hpp"
#include "gad/kernels.hpp"
#include "gad/layers.hpp"
#include "gad/rng.hpp"

namespace {

gad::DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  gad::Rng rng(seed);
  gad::DenseMatrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

const gad::SparseGraph& bench_graph(std::size_t n) {
  static std::map<std::size_t, gad::SparseGraph> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gad::generate_synthetic(n, 16.0, 8, 7).graph).first;
  return it->second;
}

void BM_MatmulSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 64, 1), b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gad::serial::matmul(a, b));
}

void BM_MatmulParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, 64, 1), b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gad::matmul(a, b));
}

void BM_SpmmSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto adj = gad::symmetric_normalize(bench_graph(n), true);
  const auto h = random_matrix(n, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gad::serial::spmm(adj, h));
}

void BM_SpmmParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto adj = gad::symmetric_normalize(bench_graph(n), true);
  const auto h = random_matrix(n, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gad::spmm(adj, h));
}

void BM_SegmentSoftmaxSerial(benchmark::State& state) {
  const auto g = gad::with_self_loops(bench_graph(static_cast<std::size_t>(state.range(0))));
  const auto logits = random_matrix(1, g.nnz(), 4).data();
  for (auto _ : state) benchmark::DoNotOptimize(gad::serial::segment_softmax(logits, g.row_offsets()));
}

void BM_SegmentSoftmaxParallel(benchmark::State& state) {
  const auto g = gad::with_self_loops(bench_graph(static_cast<std::size_t>(state.range(0))));
  const auto logits = random_matrix(1, g.nnz(), 4).data();
  for (auto _ : state) benchmark::DoNotOptimize(gad::segment_softmax(logits, g.row_offsets()));
}

void BM_GatForwardBackward(benchmark::State& state) {
  const auto g = gad::with_self_loops(bench_graph(static_cast<std::size_t>(state.range(0))));
  const auto h = random_matrix(g.num_nodes(), 64, 5);
  gad::GATLayerParams p{random_matrix(64, 32, 6), random_matrix(1, 64, 7).data(), 0.2,
                        gad::Activation::relu()};
  const auto upstream = random_matrix(g.num_nodes(), 32, 8);
  for (auto _ : state) {
    gad::GATCache cache;
    benchmark::DoNotOptimize(gad::gat_forward(g, h, p, &cache));
    benchmark::DoNotOptimize(gad::gat_backward(cache, upstream));
  }
}

}  // namespace

BENCHMARK(BM_MatmulSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_MatmulParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SpmmSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SpmmParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SegmentSoftmaxSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_SegmentSoftmaxParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_GatForwardBackward)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();

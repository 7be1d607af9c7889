// Serial reference convolutions against the OpenMP kernels, on generator-sized
// layers. Thread count for the parallel side is the last range argument.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "cganseg/autodiff.hpp"
#include "cganseg/rng.hpp"
#include "reference/reference.hpp"

namespace {

using cganseg::Rng;
using cganseg::Shape;
using cganseg::Tensor;

Tensor filled(Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (double& v : t.data_mut()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// {batch, in channels, side, out channels}
Shape input_shape(const benchmark::State& state) {
  return {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)),
          static_cast<std::size_t>(state.range(2)), static_cast<std::size_t>(state.range(2))};
}

Shape kernel_shape(const benchmark::State& state) {
  return {static_cast<std::size_t>(state.range(3)), static_cast<std::size_t>(state.range(1)), 4, 4};
}

void BM_Conv2dReference(benchmark::State& state) {
  const Tensor x = filled(input_shape(state), 1);
  const Tensor k = filled(kernel_shape(state), 2);
  for (auto _ : state) benchmark::DoNotOptimize(cganseg::reference::conv2d(x, k, 2, 1));
}

void BM_Conv2dParallel(benchmark::State& state) {
  const Tensor x = filled(input_shape(state), 1);
  const Tensor k = filled(kernel_shape(state), 2);
  omp_set_num_threads(static_cast<int>(state.range(4)));
  cganseg::Tape tape(cganseg::Tape::Mode::Inference);
  for (auto _ : state) benchmark::DoNotOptimize(cganseg::conv2d(tape, x, k, 2, 1));
}

void BM_Conv2dTransposeReference(benchmark::State& state) {
  const Tensor x = filled(input_shape(state), 3);
  const Tensor k = filled({static_cast<std::size_t>(state.range(1)), static_cast<std::size_t>(state.range(3)), 4, 4}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(cganseg::reference::conv2d_transpose(x, k, 2, 1));
}

void BM_Conv2dTransposeParallel(benchmark::State& state) {
  const Tensor x = filled(input_shape(state), 3);
  const Tensor k = filled({static_cast<std::size_t>(state.range(1)), static_cast<std::size_t>(state.range(3)), 4, 4}, 4);
  omp_set_num_threads(static_cast<int>(state.range(4)));
  cganseg::Tape tape(cganseg::Tape::Mode::Inference);
  for (auto _ : state) benchmark::DoNotOptimize(cganseg::conv2d_transpose(tape, x, k, 2, 1));
}

void BM_KernelGradReference(benchmark::State& state) {
  const Tensor x = filled(input_shape(state), 5);
  const std::size_t side = static_cast<std::size_t>(state.range(2)) / 2;
  const Tensor gy = filled({static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(3)), side, side}, 6);
  const Shape ks = kernel_shape(state);
  for (auto _ : state) benchmark::DoNotOptimize(cganseg::reference::conv2d_kernel_grad(x, gy, ks, 2, 1));
}

void BM_KernelGradParallel(benchmark::State& state) {
  Tensor x = filled(input_shape(state), 5);
  Tensor k = filled(kernel_shape(state), 7);
  k.set_requires_grad(true);
  const std::size_t side = static_cast<std::size_t>(state.range(2)) / 2;
  const Tensor gy = filled({static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(3)), side, side}, 6);
  omp_set_num_threads(static_cast<int>(state.range(4)));
  for (auto _ : state) {
    k.zero_grad();
    cganseg::Tape tape;
    tape.backward(cganseg::sum(tape, cganseg::mul(tape, cganseg::conv2d(tape, x, k, 2, 1), gy)));
    benchmark::DoNotOptimize(k.grad().data());
  }
}

void layers(benchmark::internal::Benchmark* b, bool threads) {
  for (const auto& layer : std::vector<std::vector<std::int64_t>>{{4, 1, 64, 16}, {4, 16, 32, 32}, {4, 64, 8, 128}}) {
    if (!threads) {
      b->Args({layer[0], layer[1], layer[2], layer[3], 1});
      continue;
    }
    for (std::int64_t t : {1, 2, 4}) b->Args({layer[0], layer[1], layer[2], layer[3], t});
  }
  b->ArgNames({"batch", "cin", "side", "cout", "threads"});
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_Conv2dReference)->Apply([](auto* b) { layers(b, false); });
BENCHMARK(BM_Conv2dParallel)->Apply([](auto* b) { layers(b, true); })->UseRealTime();
BENCHMARK(BM_Conv2dTransposeReference)->Apply([](auto* b) { layers(b, false); });
BENCHMARK(BM_Conv2dTransposeParallel)->Apply([](auto* b) { layers(b, true); })->UseRealTime();
BENCHMARK(BM_KernelGradReference)->Apply([](auto* b) { layers(b, false); });
BENCHMARK(BM_KernelGradParallel)->Apply([](auto* b) { layers(b, true); })->UseRealTime();
BENCHMARK_MAIN();

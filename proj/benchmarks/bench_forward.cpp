#include <benchmark/benchmark.h>

#include <vector>

#include "asmr/model.hpp"
#include "asmr/tensor.hpp"
#include "asmr/train.hpp"

using namespace asmr;

namespace {

const std::vector<std::size_t> kWidths = {2, 128, 128, 128, 1};

AsmrModel image_model(std::int64_t size) {
  const std::string bases = size == 64 ? "2x2x4x4" : "4x4x4x8";
  return init_asmr(kWidths, 30.0, PartitionScheme::parse(bases).broadcast(2), 0);
}

std::vector<std::int64_t> all_indices(std::int64_t n) {
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::int64_t>(i);
  return idx;
}

void BM_ForwardShared(benchmark::State& state) {
  const auto m = image_model(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(forward_shared(m));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_ForwardNaive(benchmark::State& state) {
  const auto m = image_model(state.range(0));
  const auto idx = all_indices(state.range(0) * state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(forward_naive(m, idx));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_ForwardSiren(benchmark::State& state) {
  const auto m = init_siren(kWidths, 30.0, 0);
  const Tensor coords = siren_coordinates(std::vector<std::int64_t>{state.range(0), state.range(0)});
  for (auto _ : state) benchmark::DoNotOptimize(forward_siren(m, coords));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_TrainStepShared(benchmark::State& state) {
  auto m = image_model(64);
  const Tensor target = Tensor(Shape{4096, 1}, std::vector<double>(4096, 0.1));
  for (auto _ : state) {
    Tape t;
    Var out = forward_shared(t, m);
    t.backward(t.mse(out, t.constant(target.reshaped(out.value().shape()))));
    for (auto* p : m.parameters()) p->zero_grad();
  }
}

void BM_TrainStepSiren(benchmark::State& state) {
  auto m = init_siren(kWidths, 30.0, 0);
  const Tensor coords = siren_coordinates(std::vector<std::int64_t>{64, 64});
  const Tensor target = Tensor(Shape{4096, 1}, std::vector<double>(4096, 0.1));
  for (auto _ : state) {
    Tape t;
    Var out = forward_siren(t, m, coords);
    t.backward(t.mse(out, t.view(target)));
    for (auto* p : m.parameters()) p->zero_grad();
  }
}

void BM_Sine(benchmark::State& state) {
  const Tensor x(Shape{static_cast<std::size_t>(state.range(0)), 128}, std::vector<double>(state.range(0) * 128, 0.3));
  for (auto _ : state) benchmark::DoNotOptimize(ops::sine(x, 30.0));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 128);
}

void BM_Upsample(benchmark::State& state) {
  const Tensor x(Shape{16, 16, 128}, std::vector<double>(16 * 16 * 128, 0.3));
  const std::vector<std::size_t> factors = {4, 4};
  for (auto _ : state) benchmark::DoNotOptimize(ops::upsample_nearest(x, factors));
}

}  // namespace

BENCHMARK(BM_ForwardShared)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardNaive)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSiren)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStepShared)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainStepSiren)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sine)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Upsample)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();

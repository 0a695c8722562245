#include <benchmark/benchmark.h>

#include <cmath>

#include "stlgail/infer/network.hpp"
#include "stlgail/rng.hpp"
#include "stlgail/train/inference_trainer.hpp"

using namespace stlgail;

namespace {

stl::SignalSet dataset(int n, int last_time) {
  Rng rng(1);
  stl::SignalSet d;
  for (int i = 0; i < n; ++i) {
    std::vector<double> v;
    for (int t = 0; t <= last_time; ++t) {
      v.insert(v.end(), {rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 3)});
    }
    d.push_back({{{"dA", "dB", "dC", "dO"}, std::move(v)}, i % 2 == 0 ? 1 : -1});
  }
  return d;
}

infer::NetworkShape case_one_shape() {
  return infer::NetworkShape::axis_aligned(6, 2, 20, {"dA", "dB", "dC", "dO"}, 0.1);
}

std::vector<double> random_params(const infer::NetworkShape& shape) {
  auto p = infer::make_params(shape);
  Rng rng(2);
  for (auto& v : p.flat()) v = rng.uniform(-1, 1);
  const auto layout = infer::ParamLayout::of(shape);
  for (std::size_t i = layout.start; i < layout.gate_atom; ++i) p.flat()[i] = rng.uniform(0, 20);
  return {p.flat().begin(), p.flat().end()};
}

}  // namespace

static void BM_NetworkForward(benchmark::State& state) {
  const auto shape = case_one_shape();
  const auto data = dataset(1, 20);
  const auto nd = train::NormalizedData::make(data, infer::Normalizer::fit(data));
  const auto theta = random_params(shape);
  const infer::Evaluator<double> net(shape, theta, shape.tau);
  for (auto _ : state) benchmark::DoNotOptimize(net(std::span<const double>(nd.x[0])));
}
BENCHMARK(BM_NetworkForward);

static void BM_InferenceLossGradient(benchmark::State& state) {
  const auto shape = case_one_shape();
  const auto data = dataset(static_cast<int>(state.range(0)), 20);
  const auto nd = train::NormalizedData::make(data, infer::Normalizer::fit(data));
  const auto theta = random_params(shape);
  train::InferenceTrainConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train::inference_loss_gradient(nd, shape, theta, 0.1, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_InferenceLossGradient)->Arg(100)->Arg(600);

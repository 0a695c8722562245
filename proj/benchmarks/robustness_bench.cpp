#include <benchmark/benchmark.h>

#include <cmath>

#include "stlgail/stl/parser.hpp"
#include "stlgail/stl/robustness.hpp"

using namespace stlgail;

namespace {

stl::Signal driving_like(int last_time) {
  std::vector<double> v;
  for (int t = 0; t <= last_time; ++t) {
    v.insert(v.end(), {2.0 * t, 3.0 + std::sin(0.2 * t), 5.0 + 4.0 * t, 4.5 * std::cos(0.05 * t)});
  }
  return {{"peg", "veg", "pot", "vot"}, std::move(v)};
}

}  // namespace

static void BM_ExactRobustness(benchmark::State& state) {
  const auto s = driving_like(57);
  const auto f = stl::parse(
      "(G[45,47](vot > 2.35) & G[20,57](veg > 1.31) & G[24,46](veg < 5.55)) | "
      "(F[42,55](vot < 2.94) & F[20,57](veg < 0.01) & G[24,46](veg < 5.55))",
      s.names());
  for (auto _ : state) benchmark::DoNotOptimize(stl::robustness(s, f));
}
BENCHMARK(BM_ExactRobustness);

static void BM_NestedWindows(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const auto s = driving_like(2 * width);
  const auto f = stl::parse("G[0," + std::to_string(width) + "](F[0," + std::to_string(width) +
                                "](veg > 3))",
                            s.names());
  for (auto _ : state) benchmark::DoNotOptimize(stl::robustness(s, f));
  state.SetComplexityN(width);
}
BENCHMARK(BM_NestedWindows)->RangeMultiplier(2)->Range(8, 128)->Complexity();

static void BM_ParsePrint(benchmark::State& state) {
  const std::vector<std::string> names{"dA", "dB", "dC", "dO"};
  const std::string text = "(F[2,14](dA < 1.5) | F[4,12](dB < 0.86)) & F[12,20](dC < 0.69)";
  for (auto _ : state) benchmark::DoNotOptimize(stl::print(stl::parse(text, names), names));
}
BENCHMARK(BM_ParsePrint);

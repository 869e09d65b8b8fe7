#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mabvp/max_affine.hpp"
#include "mabvp/transport.hpp"

using namespace mabvp;

namespace {

MaxAffine random_quadratic_pieces(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> s(n);
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    s[i] = Vec2(u(rng), u(rng));
    w[i] = 0.5 * s[i].squaredNorm() + 0.01 * u(rng);
  }
  return MaxAffine(std::move(s), std::move(w));
}

void BM_Argmax(benchmark::State& state) {
  const MaxAffine f = random_quadratic_pieces(static_cast<int>(state.range(0)), 7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> queries(1024);
  for (auto& q : queries) q = Vec2(u(rng), u(rng));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.argmax(queries[k++ & 1023]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Argmax)->RangeMultiplier(4)->Range(256, 65536);

void BM_LaguerreDiagram(benchmark::State& state) {
  const MaxAffine f = random_quadratic_pieces(static_cast<int>(state.range(0)), 3);
  const ConvexPolygon box = ConvexPolygon::box(Vec2(-1, -1), Vec2(1, 1), kBoundaryTag);
  for (auto _ : state) {
    const LaguerreDiagram d = laguerre_diagram(f, box);
    benchmark::DoNotOptimize(d.cells.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LaguerreDiagram)->RangeMultiplier(4)->Range(256, 16384)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

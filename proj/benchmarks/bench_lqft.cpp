#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "lqft/field.hpp"
#include "lqft/geometry.hpp"
#include "lqft/liouville.hpp"
#include "lqft/puncture.hpp"

using namespace lqft;

namespace {

LiouvilleParams four_point() {
  const double s3 = std::sqrt(3.0);
  return derive_params(1.0, 1.0,
                       {{PlanePoint(0.0), 2.5}, {PlanePoint(2.0, 0.0), 1.0}, {PlanePoint(-1.0, s3), 1.0},
                        {PlanePoint(-1.0, -s3), 1.0}});
}

void BM_CovCircleAvg(benchmark::State& state) {
  const PlanePoint z(0.3, -0.2), w(1.1, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(cov_circle_avg(z, w, 1e-2));
}
BENCHMARK(BM_CovCircleAvg);

void BM_IntegrateRound(benchmark::State& state) {
  PolarGridSpec spec;
  spec.singular_points = {PlanePoint(0.3, -0.4)};
  const auto grid = make_polar_grid(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_round([&](PlanePoint z) { return green_round(z, spec.singular_points[0]); }, grid));
  }
}
BENCHMARK(BM_IntegrateRound)->Unit(benchmark::kMillisecond);

void BM_CircleAverageDraw(benchmark::State& state) {
  std::vector<PlanePoint> pts;
  for (int k = 0; k < state.range(0); ++k) pts.push_back(PlanePoint::polar(0.15 * std::pow(1.22, k % 20), 2.39996 * k));
  const CircleAverageSampler sampler(pts, std::vector<double>(pts.size(), 1e-2 / (1 + pts.size() / 20)));
  const SeedPlan plan{1};
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng rng = plan.stream(0, i++);
    benchmark::DoNotOptimize(sampler.draw(rng));
  }
}
BENCHMARK(BM_CircleAverageDraw)->Arg(20)->Arg(200);

void BM_RadialLateralDraw(benchmark::State& state) {
  const RadialLateralSampler sampler;
  const SeedPlan plan{2};
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng x = plan.stream(0, i), y = plan.stream(1, i);
    ++i;
    benchmark::DoNotOptimize(sampler.draw(static_cast<double>(state.range(0)), x, y));
  }
}
BENCHMARK(BM_RadialLateralDraw)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ThetaPath(benchmark::State& state) {
  const SeedPlan plan{3};
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng rng = plan.stream(0, i++);
    benchmark::DoNotOptimize(draw_theta_path(1, 64.0, 1.0 / 32.0, rng));
  }
}
BENCHMARK(BM_ThetaPath)->Unit(benchmark::kMicrosecond);

void BM_PunctureDraw(benchmark::State& state) {
  const PunctureModel model(four_point(), {4.0, 8.0, 16.0, 32.0, 64.0});
  const SeedPlan plan{4};
  std::uint64_t i = 0;
  for (auto _ : state) {
    CounterRng rng = plan.stream(0, i++);
    const auto d = model.draw(rng);
    benchmark::DoNotOptimize(model.mass(d, 4));
  }
}
BENCHMARK(BM_PunctureDraw)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "arstage/geo/geodesy.hpp"
#include "arstage/geo/pose.hpp"

namespace {

using namespace arstage::geo;

const GeoPosition kOrigin{41.8781, -87.6298, 180.0};

std::vector<Vec3> local_points(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10000.0, 10000.0), h(-50.0, 300.0);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = {u(rng), h(rng), u(rng)};
  return out;
}

void BM_MakeAnchor(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(make_anchor(kOrigin));
}
BENCHMARK(BM_MakeAnchor);

void BM_LocalToGeo(benchmark::State& state) {
  const auto anchor = make_anchor(kOrigin);
  const auto points = local_points(1024);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(local_to_geo(anchor, points[i++ & 1023]));
}
BENCHMARK(BM_LocalToGeo);

void BM_GeoToLocal(benchmark::State& state) {
  const auto anchor = make_anchor(kOrigin);
  std::vector<GeoPosition> geos;
  for (const auto& p : local_points(1024)) geos.push_back(local_to_geo(anchor, p));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(geo_to_local(anchor, geos[i++ & 1023]));
}
BENCHMARK(BM_GeoToLocal);

void BM_ComposePoses(benchmark::State& state) {
  const LocalPose a{{1, 2, 3}, heading_to_orientation(30, 5, 1)};
  LocalPose acc = LocalPose::identity();
  for (auto _ : state) {
    acc = compose(acc, a);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ComposePoses);

}  // namespace

#include <benchmark/benchmark.h>

#include "hda/scene.hpp"

namespace {

void BM_Render(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const hda::TerrainScene scene = hda::build_scene(hda::default_scene_spec());
  const hda::CameraModel cam = hda::CameraModel::from_hfov(size, size, 5.0);
  const hda::Pose pose = hda::Pose::look_at({400.0, 0.0, 400.0}, {0.0, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(hda::render(scene, cam, pose));
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Render)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ScatterRocks(benchmark::State& state) {
  hda::RockDistributionParams p;
  p.area_radius_m = 500.0;
  p.k = hda::k_from_density(5e-4, p.area_radius_m);
  for (auto _ : state) benchmark::DoNotOptimize(hda::scatter_rocks(p, 1));
}
BENCHMARK(BM_ScatterRocks)->Unit(benchmark::kMicrosecond);

}  // namespace

#include <benchmark/benchmark.h>

#include "hda/quadtree.hpp"
#include "hda/scene.hpp"

namespace {

hda::Image rendered(int size) {
  hda::SceneSpec spec = hda::default_scene_spec();
  const hda::TerrainScene scene = hda::build_scene(spec);
  const hda::CameraModel cam = hda::CameraModel::from_hfov(size, size, 5.0);
  return hda::render(scene, cam, hda::Pose::look_at({400.0, 0.0, 400.0}, {0.0, 0.0, 0.0})).image;
}

void BM_Decompose(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const hda::Image img = rendered(size);
  const hda::CameraModel cam = hda::CameraModel::from_hfov(size, size, 5.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hda::decompose(img, {}, 565.7, cam, 0.785398));
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_Decompose)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_IntegralStats(benchmark::State& state) {
  const hda::Image img = rendered(1024);
  for (auto _ : state) {
    hda::IntegralStats stats(img);
    benchmark::DoNotOptimize(stats.stats({128, 128, 256, 256}));
  }
}
BENCHMARK(BM_IntegralStats)->Unit(benchmark::kMillisecond);

}  // namespace

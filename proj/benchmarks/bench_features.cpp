#include <vector>

#include <benchmark/benchmark.h>

#include "hda/features.hpp"
#include "hda/random.hpp"
#include "hda/scene.hpp"

namespace {

struct Views {
  hda::Image image1;
  hda::Image image2;
};

const Views& views() {
  static const Views v = [] {
    const hda::TerrainScene scene = hda::build_scene(hda::default_scene_spec());
    const hda::CameraModel cam = hda::CameraModel::from_hfov(1024, 1024, 5.0);
    Views out;
    out.image1 = hda::render(scene, cam, hda::Pose::look_at({400.0, 0.0, 400.0}, {0.0, 0.0, 0.0})).image;
    out.image2 = hda::render(scene, cam, hda::Pose::look_at({368.8, 0.0, 400.0}, {0.0, 0.0, 0.0})).image;
    return out;
  }();
  return v;
}

void BM_DetectAndDescribe(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const hda::Rect roi{512 - side / 2, 512 - side / 2, side, side};
  const hda::Image& image = views().image1;
  std::size_t n = 0;
  for (auto _ : state) {
    const auto kps = hda::detect_and_describe(image, roi);
    n = kps.size();
    benchmark::DoNotOptimize(kps.data());
  }
  state.counters["keypoints"] = static_cast<double>(n);
}
BENCHMARK(BM_DetectAndDescribe)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MatchRatio(benchmark::State& state) {
  hda::Rng rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<hda::Descriptor> a(n);
  std::vector<hda::Descriptor> b(n);
  for (auto& d : a) d = {rng.next(), rng.next(), rng.next(), rng.next()};
  for (auto& d : b) d = {rng.next(), rng.next(), rng.next(), rng.next()};
  for (auto _ : state) benchmark::DoNotOptimize(hda::match(a, b, 0.75));
}
BENCHMARK(BM_MatchRatio)->Arg(100)->Arg(500)->Unit(benchmark::kMicrosecond);

void BM_RefineMatches(benchmark::State& state) {
  const hda::Rect roi{448, 448, 128, 128};
  const auto k1 = hda::detect_and_describe(views().image1, roi);
  const auto k2 = hda::detect_and_describe(views().image2, roi);
  const auto d1 = hda::descriptors_of(k1);
  const auto d2 = hda::descriptors_of(k2);
  const auto m = hda::match(d1, d2, 0.75);
  const hda::ImageF f1 = hda::to_float(views().image1);
  const hda::ImageF f2 = hda::to_float(views().image2);
  for (auto _ : state) benchmark::DoNotOptimize(hda::refine_matches(f1, f2, m, k1, k2));
  state.counters["matches"] = static_cast<double>(m.size());
}
BENCHMARK(BM_RefineMatches)->Unit(benchmark::kMillisecond);

}  // namespace

#include <vector>

#include <benchmark/benchmark.h>

#include "hda/random.hpp"
#include "hda/sfm.hpp"

namespace {

void BM_Triangulate(benchmark::State& state) {
  const hda::CameraModel cam = hda::CameraModel::from_hfov(1024, 1024, 5.0);
  hda::NavRecord n1;
  hda::NavRecord n2;
  n1.pose = hda::Pose::look_at({400.0, 0.0, 400.0}, {0.0, 0.0, 0.0});
  n2.pose = hda::Pose::look_at({368.8, 0.0, 400.0}, {0.0, 0.0, 0.0});
  const hda::RelativePose rel = hda::relative_motion(n1, n2);
  hda::Rng rng(3);
  std::vector<Eigen::Vector2d> px1;
  std::vector<Eigen::Vector2d> px2;
  for (int i = 0; i < state.range(0); ++i) {
    const Eigen::Vector3d p(rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-1, 1));
    px1.push_back(hda::project(cam, n1.pose, p));
    px2.push_back(hda::project(cam, n2.pose, p));
  }
  for (auto _ : state) benchmark::DoNotOptimize(hda::triangulate(px1, px2, n1.pose, rel, cam));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Triangulate)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_FitPlaneAndRoughness(benchmark::State& state) {
  hda::Rng rng(4);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), 0.05 * rng.normal()});
  for (auto _ : state) {
    const hda::Plane plane = hda::fit_plane(pts);
    benchmark::DoNotOptimize(hda::roughness_of(pts, plane));
  }
}
BENCHMARK(BM_FitPlaneAndRoughness)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

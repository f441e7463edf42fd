#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <gtest/gtest.h>

#include "hda/error.hpp"
#include "hda/random.hpp"
#include "hda/sfm.hpp"

namespace hda {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Flight {
  CameraModel cam = CameraModel::from_hfov(1024, 1024, 5.0);
  NavRecord nav1;
  NavRecord nav2;
  RelativePose rel;
};

Flight oblique_flight(double hfov_deg = 5.0) {
  Flight f;
  f.cam = CameraModel::from_hfov(1024, 1024, hfov_deg);
  f.nav1.pose = Pose::look_at({400.0, 0.0, 400.0}, {0.0, 0.0, 0.0});
  f.nav2.pose = Pose::look_at({368.8, 0.0, 400.0}, {0.0, 0.0, 0.0});
  f.rel = relative_motion(f.nav1, f.nav2);
  return f;
}

Eigen::Quaterniond random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized();
}

SiteAssessment site(int roi, double slope, double rough, double area, double dist) {
  SiteAssessment s;
  s.roi = roi;
  s.slope_deg = slope;
  s.roughness_m = rough;
  s.area_m2 = area;
  s.n_points = 50;
  s.distance_to_ils_m = dist;
  return s;
}

TEST(Triangulate, NoiselessOracle) {
  const Flight f = oblique_flight();
  Rng rng(4);
  std::vector<Eigen::Vector3d> truth;
  std::vector<Eigen::Vector2d> px1;
  std::vector<Eigen::Vector2d> px2;
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d p(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-3, 3));
    truth.push_back(p);
    px1.push_back(project(f.cam, f.nav1.pose, p));
    px2.push_back(project(f.cam, f.nav2.pose, p));
  }
  const PointCloud cloud = triangulate(px1, px2, f.nav1.pose, f.rel, f.cam, 0.0);
  ASSERT_EQ(cloud.points.size(), truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) EXPECT_LT((cloud.points[i] - truth[i]).norm(), 1e-6);
}

TEST(Triangulate, MatchOverload) {
  const Flight f = oblique_flight();
  std::vector<Keypoint> k1(3);
  std::vector<Keypoint> k2(3);
  const std::vector<Eigen::Vector3d> pts = {{1, 2, 0}, {-4, 3, 1}, {6, -5, -1}};
  for (int i = 0; i < 3; ++i) {
    k1[i].px = project(f.cam, f.nav1.pose, pts[i]);
    k2[2 - i].px = project(f.cam, f.nav2.pose, pts[i]);
  }
  const std::vector<Match> m = {{0, 2, 0, 0.0}, {2, 0, 0, 0.0}};
  const PointCloud cloud = triangulate(m, k1, k2, f.nav1.pose, f.rel, f.cam, 0.0);
  ASSERT_EQ(cloud.points.size(), 2U);
  EXPECT_LT((cloud.points[0] - pts[0]).norm(), 1e-6);
  EXPECT_LT((cloud.points[1] - pts[2]).norm(), 1e-6);
}

TEST(Triangulate, ZeroBaseline) {
  const Flight f = oblique_flight();
  const RelativePose still(Eigen::Quaterniond::Identity(), Eigen::Vector3d::Zero());
  const std::vector<Eigen::Vector2d> px = {{500, 500}};
  try {
    triangulate(px, px, f.nav1.pose, still, f.cam);
    FAIL() << "expected ZeroBaseline";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroBaseline);
  }
}

TEST(Triangulate, LowParallaxDiscarded) {
  const Flight f = oblique_flight();
  // Identical pixels under a pure translation: parallel rays.
  const std::vector<Eigen::Vector2d> px = {{512, 512}};
  const RelativePose shift(Eigen::Quaterniond::Identity(), Eigen::Vector3d(1.0, 0.0, 0.0));
  try {
    triangulate(px, px, f.nav1.pose, shift, f.cam);
    FAIL() << "expected AllPointsDegenerate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllPointsDegenerate);
  }
}

TEST(Triangulate, BehindCameraDiscardedAndCounted) {
  const Flight f = oblique_flight();
  const Eigen::Vector3d p(0.0, 0.0, 0.0);
  std::vector<Eigen::Vector2d> px1 = {project(f.cam, f.nav1.pose, p), project(f.cam, f.nav1.pose, p)};
  std::vector<Eigen::Vector2d> px2 = {project(f.cam, f.nav2.pose, p), project(f.cam, f.nav2.pose, p)};
  // Swapping image-2 motion the wrong way along the epipolar line puts the
  // intersection behind the cameras.
  px2[1] = px1[1] - (px2[1] - px1[1]) * 3.0;
  const PointCloud cloud = triangulate(px1, px2, f.nav1.pose, f.rel, f.cam, 0.0);
  EXPECT_EQ(cloud.points.size() + cloud.discarded_behind + cloud.discarded_parallax, 2U);
  EXPECT_GE(cloud.points.size(), 1U);
}

TEST(Triangulate, ObliqueFootprintIsTrapezoidal) {
  const Flight f = oblique_flight(20.0);
  std::vector<Eigen::Vector2d> px1;
  std::vector<Eigen::Vector2d> px2;
  for (const double v : {20.0, 1004.0}) {
    for (const double u : {20.0, 1004.0}) {
      const Ray ray = back_project(f.cam, f.nav1.pose, {u, v});
      const Eigen::Vector3d g = ray.at(-ray.origin.z() / ray.direction.z());
      px1.push_back({u, v});
      px2.push_back(project(f.cam, f.nav2.pose, g));
    }
  }
  const PointCloud cloud = triangulate(px1, px2, f.nav1.pose, f.rel, f.cam, 0.0);
  ASSERT_EQ(cloud.points.size(), 4U);
  // Top image row is far range, bottom row near range; widths are cross-track (y).
  const double far_width = std::abs(cloud.points[1].y() - cloud.points[0].y());
  const double near_width = std::abs(cloud.points[3].y() - cloud.points[2].y());
  EXPECT_GT(far_width, 1.2 * near_width);
  const double far_range = (cloud.points[0] - f.nav1.pose.position).norm();
  const double near_range = (cloud.points[2] - f.nav1.pose.position).norm();
  EXPECT_GT(far_range, near_range);
}

TEST(FitPlane, FourPointsOnGround) {
  const std::vector<Eigen::Vector3d> pts = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  const Plane p = fit_plane(pts);
  EXPECT_NEAR((p.normal - Eigen::Vector3d::UnitZ()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(p.rms_residual_m, 0.0, 1e-12);
  EXPECT_NEAR(p.offset, 0.0, 1e-12);
}

TEST(FitPlane, TenDegreeRamp) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) pts.push_back({i * 1.0, j * 1.0, i * std::tan(10.0 * kDeg)});
  const Plane p = fit_plane(pts);
  EXPECT_LT(p.rms_residual_m, 1e-9);
  EXPECT_NEAR(std::acos(p.normal.z()) / kDeg, 10.0, 1e-9);
  EXPECT_NEAR(slope_of(p.normal, {0, 0, -1}), 10.0, 1e-9);
}

TEST(FitPlane, Degenerate) {
  const std::vector<Eigen::Vector3d> line = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  const std::vector<Eigen::Vector3d> two = {{0, 0, 0}, {1, 0, 0}};
  const std::vector<Eigen::Vector3d> same = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
  for (const auto* pts : {&line, &two, &same}) {
    try {
      fit_plane(*pts);
      FAIL() << "expected DegenerateGeometry";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::DegenerateGeometry);
    }
  }
}

TEST(FitPlane, ResidualZeroOnlyWhenCoplanar) {
  Rng rng(5);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0});
  EXPECT_LT(fit_plane(pts).rms_residual_m, 1e-12);
  pts.back().z() = 1e-3;
  EXPECT_GT(fit_plane(pts).rms_residual_m, 1e-12);
}

TEST(FitPlane, NormalOpposesGravity) {
  const std::vector<Eigen::Vector3d> pts = {{0, 0, 5}, {3, 0, 5}, {0, 3, 5}, {2, 2, 5}};
  EXPECT_GT(fit_plane(pts, {0, 0, -1}).normal.z(), 0.0);
  EXPECT_LT(fit_plane(pts, {0, 0, 1}).normal.z(), 0.0);
}

TEST(SlopeOf, Examples) {
  const Eigen::Vector3d g(0, 0, -1);
  EXPECT_NEAR(slope_of({0, 0, 1}, g), 0.0, 1e-12);
  EXPECT_NEAR(slope_of(Eigen::Vector3d(1, 0, 1).normalized(), g), 45.0, 1e-12);
  EXPECT_NEAR(slope_of({0, 0, -1}, g), 0.0, 1e-12);  // folded
}

TEST(SlopeOf, RotationInvariant) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d n = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Eigen::Vector3d g = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Eigen::Quaterniond q = random_rotation(rng);
    EXPECT_NEAR(slope_of(n, g), slope_of(q * n, q * g), 1e-9);
  }
}

TEST(SlopeOf, RigidTransformOfSceneAndPoses) {
  const Flight f = oblique_flight();
  Rng rng(7);
  std::vector<Eigen::Vector3d> truth;
  std::vector<Eigen::Vector2d> px1;
  std::vector<Eigen::Vector2d> px2;
  for (int i = 0; i < 60; ++i) {
    const double x = rng.uniform(-6, 6);
    const double y = rng.uniform(-6, 6);
    const Eigen::Vector3d p(x, y, 0.12 * x - 0.05 * y + rng.uniform(-0.1, 0.1));
    px1.push_back(project(f.cam, f.nav1.pose, p));
    px2.push_back(project(f.cam, f.nav2.pose, p));
  }
  const Eigen::Vector3d g(0, 0, -1);
  const PointCloud a = triangulate(px1, px2, f.nav1.pose, f.rel, f.cam);
  const double slope_a = slope_of(fit_plane(a.points, g).normal, g);

  const Eigen::Quaterniond q = random_rotation(rng);
  const Eigen::Vector3d t(100.0, -40.0, 7.0);
  const Pose moved(q * f.nav1.pose.position + t, f.nav1.pose.attitude * q.conjugate());
  const PointCloud b = triangulate(px1, px2, moved, f.rel, f.cam);
  const double slope_b = slope_of(fit_plane(b.points, q * g).normal, q * g);
  EXPECT_NEAR(slope_a, slope_b, 1e-6);
}

TEST(Roughness, PerfectPlaneIsZero) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) pts.push_back({i * 1.0, j * 1.0, 0.5 * i});
  EXPECT_NEAR(roughness_of(pts, fit_plane(pts)), 0.0, 1e-9);
}

TEST(Roughness, OneProudPointAmongNineteen) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 19; ++i) pts.push_back({i % 5 * 1.0, i / 5 * 1.0, 0.0});
  pts.push_back({2.0, 2.0, 0.4});
  Plane ground;
  EXPECT_NEAR(roughness_of(pts, ground), 0.4, 1e-12);
}

TEST(Roughness, GaussianResiduals) {
  Rng rng(8);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10), 0.05 * rng.normal()});
  const double r = roughness_of(pts, fit_plane(pts));
  EXPECT_NEAR(r, 1.96 * 0.05, 0.2 * 1.96 * 0.05);
}

TEST(Assess, SafetyThresholds) {
  const SiteLimits limits;
  EXPECT_TRUE(is_safe(site(0, 9.9, 0.1, 150, 0), limits));
  EXPECT_FALSE(is_safe(site(0, 10.1, 0.0, 1e4, 0), limits));
  EXPECT_FALSE(is_safe(site(0, 10.0, 0.0, 1e4, 0), limits));
  EXPECT_FALSE(is_safe(site(0, 1.0, 0.30, 1e4, 0), limits));
  EXPECT_FALSE(is_safe(site(0, 1.0, 0.1, 99.0, 0), limits));
  SiteAssessment few = site(0, 1.0, 0.1, 150, 0);
  few.n_points = 14;
  EXPECT_FALSE(is_safe(few, limits));
}

TEST(Assess, SiteFromCloud) {
  PointCloud cloud;
  cloud.source_roi = 3;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) cloud.points.push_back({i * 2.0, j * 2.0, 0.0});
  const SiteAssessment s = assess_site(cloud, 144.0, {0, 0, -1}, {5.0, 5.0, 0.0}, SiteLimits{});
  EXPECT_EQ(s.roi, 3);
  EXPECT_EQ(s.n_points, 36);
  EXPECT_NEAR(s.slope_deg, 0.0, 1e-9);
  EXPECT_NEAR(s.distance_to_ils_m, 0.0, 1e-9);
  EXPECT_TRUE(s.safe);

  PointCloud tiny;
  tiny.points = {{0, 0, 0}, {1, 0, 0}};
  const SiteAssessment bad = assess_site(tiny, 144.0, {0, 0, -1}, {0, 0, 0}, SiteLimits{});
  EXPECT_FALSE(bad.safe);
  EXPECT_TRUE(std::isnan(bad.slope_deg));
}

TEST(Rank, SingleSafeSite) {
  const auto ranked = assess_and_rank({site(0, 2.0, 0.1, 150, 10)}, SiteLimits{}, RankWeights{});
  ASSERT_EQ(ranked.size(), 1U);
  EXPECT_TRUE(ranked[0].safe);
  EXPECT_EQ(ranked[0].rank, 1);
}

TEST(Rank, NearerIlsWinsTie) {
  const auto ranked =
      assess_and_rank({site(0, 2.0, 0.1, 150, 30), site(1, 2.0, 0.1, 150, 10)}, SiteLimits{}, RankWeights{});
  EXPECT_EQ(ranked[0].roi, 1);
  EXPECT_EQ(ranked[0].rank, 1);
  EXPECT_EQ(ranked[1].roi, 0);
  EXPECT_EQ(ranked[1].rank, 2);
}

TEST(Rank, RoiIndexBreaksFullTie) {
  const auto ranked =
      assess_and_rank({site(4, 2.0, 0.1, 150, 10), site(2, 2.0, 0.1, 150, 10)}, SiteLimits{}, RankWeights{});
  EXPECT_EQ(ranked[0].roi, 2);
}

TEST(Rank, UnsafeKeptAfterSafe) {
  const auto ranked = assess_and_rank(
      {site(0, 10.1, 0.0, 1e4, 0), site(1, 5.0, 0.2, 120, 50), site(2, 1.0, 0.05, 400, 80), site(3, 3.0, 0.5, 200, 0)},
      SiteLimits{}, RankWeights{});
  ASSERT_EQ(ranked.size(), 4U);
  EXPECT_EQ(ranked[0].roi, 2);
  EXPECT_EQ(ranked[1].roi, 1);
  EXPECT_EQ(ranked[2].roi, 0);
  EXPECT_EQ(ranked[3].roi, 3);
  EXPECT_EQ(ranked[2].rank, 0);
  EXPECT_FALSE(ranked[2].safe);
  EXPECT_FALSE(ranked[3].safe);
}

TEST(Rank, ScoreOrdersByWeightedMetrics) {
  const SiteLimits limits;
  const RankWeights w;
  const double flat = composite_score(site(0, 1.0, 0.05, 200, 0), limits, w);
  const double steep = composite_score(site(0, 8.0, 0.05, 200, 0), limits, w);
  const double small = composite_score(site(0, 1.0, 0.05, 100, 0), limits, w);
  EXPECT_LT(flat, steep);
  EXPECT_LT(flat, small);
}

}  // namespace
}  // namespace hda

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hda/camera.hpp"
#include "hda/features.hpp"

namespace hda {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;  // world frame, meters
  int source_roi = -1;
  int discarded_behind = 0;    // negative depth in either camera
  int discarded_parallax = 0;  // ray angle below min_parallax
};

// Midpoint two-ray triangulation. Rays are built in the camera-1 frame and
// the result is mapped to the world through pose1. Throws ZeroBaseline for a
// zero baseline and AllPointsDegenerate when every pair is discarded.
PointCloud triangulate(std::span<const Match> matches, std::span<const Keypoint> kps1,
                       std::span<const Keypoint> kps2, const Pose& pose1, const RelativePose& rel,
                       const CameraModel& cam, double min_parallax_deg = 0.2);
PointCloud triangulate(std::span<const Eigen::Vector2d> px1, std::span<const Eigen::Vector2d> px2,
                       const Pose& pose1, const RelativePose& rel, const CameraModel& cam,
                       double min_parallax_deg = 0.2);

// n . x = offset, with n pointing against gravity.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  double rms_residual_m = 0.0;

  double distance(const Eigen::Vector3d& p) const { return normal.dot(p) - offset; }
};

// Total least squares through the centroid. Throws DegenerateGeometry for
// fewer than 3 points or collinear/coincident points.
Plane fit_plane(std::span<const Eigen::Vector3d> points,
                const Eigen::Vector3d& gravity_dir = Eigen::Vector3d(0.0, 0.0, -1.0));

// Angle between the normal and -gravity_dir, folded into [0, 90] degrees.
double slope_of(const Eigen::Vector3d& normal, const Eigen::Vector3d& gravity_dir);

// 95th percentile of |orthogonal residual|, taking the sample at rank
// ceil(0.95 * (n - 1)) of the sorted residuals.
double roughness_of(std::span<const Eigen::Vector3d> points, const Plane& plane);

struct SiteLimits {
  double slope_deg = 10.0;
  double roughness_m = 0.30;
  double area_m2 = 100.0;
  int min_points = 15;
};

struct RankWeights {
  double slope = 0.5;
  double roughness = 0.3;
  double inverse_area = 0.2;
};

struct SiteAssessment {
  int roi = -1;
  double slope_deg = 0.0;
  double roughness_m = 0.0;
  double area_m2 = 0.0;
  int n_points = 0;
  double distance_to_ils_m = 0.0;
  bool safe = false;
  int rank = 0;  // 1-based among safe sites, 0 when unsafe
  Eigen::Vector3d center = Eigen::Vector3d::Zero();  // world-frame cloud centroid
};

bool is_safe(const SiteAssessment& site, const SiteLimits& limits);
double composite_score(const SiteAssessment& site, const SiteLimits& limits, const RankWeights& weights);

// Builds the assessment of one ROI cloud. Clouds that cannot support a plane
// come back unsafe with NaN slope and roughness.
SiteAssessment assess_site(const PointCloud& cloud, double area_m2, const Eigen::Vector3d& gravity_dir,
                           const Eigen::Vector3d& ils_position, const SiteLimits& limits);

// Safe sites first, by ascending composite score, then distance to the ILS,
// then ROI index; ranks 1..n. Unsafe sites follow in ROI order with rank 0.
std::vector<SiteAssessment> assess_and_rank(std::vector<SiteAssessment> sites, const SiteLimits& limits,
                                            const RankWeights& weights);

// rank,roi,slope_deg,roughness_m,area_m2,n_points,dist_ils_m,safe
void write_assessment_csv(const std::filesystem::path& path, std::span<const SiteAssessment> sites);

}  // namespace hda

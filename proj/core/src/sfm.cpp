#include "hda/sfm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "hda/error.hpp"
#include "hda/io.hpp"

namespace hda {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

PointCloud triangulate_pairs(std::size_t n, const auto& pixel1, const auto& pixel2, const Pose& pose1,
                             const RelativePose& rel, const CameraModel& cam, double min_parallax_deg) {
  if (!(rel.baseline_m > 0.0)) throw Error(ErrorCode::ZeroBaseline, "cannot triangulate without baseline");
  const Eigen::Quaterniond r_inv = rel.rotation.conjugate();
  const Eigen::Vector3d c2 = rel.translation;
  const double cos_min = std::cos(min_parallax_deg * kDeg);

  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d d1 = pixel_to_camera(cam, pixel1(i)).normalized();
    const Eigen::Vector3d d2 = (r_inv * pixel_to_camera(cam, pixel2(i))).normalized();
    const Eigen::Vector3d cross = d1.cross(d2);
    const double denom = cross.squaredNorm();
    if (min_parallax_deg > 0.0 ? d1.dot(d2) > cos_min : denom <= 0.0) {
      ++cloud.discarded_parallax;
      continue;
    }
    // Closest points s*d1 and c2 + u*d2, in the cross-product form that stays
    // well conditioned for nearly parallel rays.
    const double s = c2.cross(d2).dot(cross) / denom;
    const double u = c2.cross(d1).dot(cross) / denom;
    if (!(s > 0.0) || !(u > 0.0)) {
      ++cloud.discarded_behind;
      continue;
    }
    const Eigen::Vector3d mid = 0.5 * (s * d1 + c2 + u * d2);
    cloud.points.push_back(pose1.to_world(mid));
  }
  if (cloud.points.empty()) throw Error(ErrorCode::AllPointsDegenerate, "every correspondence was discarded");
  return cloud;
}

}  // namespace

PointCloud triangulate(std::span<const Match> matches, std::span<const Keypoint> kps1,
                       std::span<const Keypoint> kps2, const Pose& pose1, const RelativePose& rel,
                       const CameraModel& cam, double min_parallax_deg) {
  if (matches.empty()) throw Error(ErrorCode::InvalidArgument, "no matches to triangulate");
  return triangulate_pairs(
      matches.size(), [&](std::size_t i) { return kps1[static_cast<std::size_t>(matches[i].idx1)].px; },
      [&](std::size_t i) { return kps2[static_cast<std::size_t>(matches[i].idx2)].px; }, pose1, rel, cam,
      min_parallax_deg);
}

PointCloud triangulate(std::span<const Eigen::Vector2d> px1, std::span<const Eigen::Vector2d> px2,
                       const Pose& pose1, const RelativePose& rel, const CameraModel& cam,
                       double min_parallax_deg) {
  if (px1.size() != px2.size()) throw Error(ErrorCode::InvalidArgument, "pixel lists differ in length");
  if (px1.empty()) throw Error(ErrorCode::InvalidArgument, "no correspondences to triangulate");
  return triangulate_pairs(
      px1.size(), [&](std::size_t i) { return px1[i]; }, [&](std::size_t i) { return px2[i]; }, pose1, rel, cam,
      min_parallax_deg);
}

Plane fit_plane(std::span<const Eigen::Vector3d> points, const Eigen::Vector3d& gravity_dir) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "plane fit needs >= 3 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - centroid;
    scatter += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d ev = eig.eigenvalues();  // ascending
  if (!(ev(2) > 0.0) || ev(1) <= 1e-12 * ev(2)) {
    throw Error(ErrorCode::DegenerateGeometry, "points are collinear or coincident");
  }
  Plane plane;
  plane.normal = eig.eigenvectors().col(0).normalized();
  if (plane.normal.dot(-gravity_dir) < 0.0) plane.normal = -plane.normal;
  plane.offset = plane.normal.dot(centroid);
  double ss = 0.0;
  for (const auto& p : points) ss += plane.distance(p) * plane.distance(p);
  plane.rms_residual_m = std::sqrt(ss / static_cast<double>(points.size()));
  return plane;
}

double slope_of(const Eigen::Vector3d& normal, const Eigen::Vector3d& gravity_dir) {
  const double c = std::abs(normal.normalized().dot(-gravity_dir.normalized()));
  // atan2 form keeps precision near 0 degrees.
  const double s = normal.normalized().cross(gravity_dir.normalized()).norm();
  return std::atan2(s, c) / kDeg;
}

double roughness_of(std::span<const Eigen::Vector3d> points, const Plane& plane) {
  if (points.empty()) return 0.0;
  std::vector<double> r;
  r.reserve(points.size());
  for (const auto& p : points) r.push_back(std::abs(plane.distance(p)));
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(r.size() - 1)));
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(rank), r.end());
  return r[rank];
}

bool is_safe(const SiteAssessment& s, const SiteLimits& limits) {
  return s.slope_deg < limits.slope_deg && s.roughness_m < limits.roughness_m && s.area_m2 >= limits.area_m2 &&
         s.n_points >= limits.min_points;
}

double composite_score(const SiteAssessment& s, const SiteLimits& limits, const RankWeights& w) {
  return w.slope * s.slope_deg / limits.slope_deg + w.roughness * s.roughness_m / limits.roughness_m +
         w.inverse_area * limits.area_m2 / s.area_m2;
}

SiteAssessment assess_site(const PointCloud& cloud, double area_m2, const Eigen::Vector3d& gravity_dir,
                           const Eigen::Vector3d& ils_position, const SiteLimits& limits) {
  SiteAssessment site;
  site.roi = cloud.source_roi;
  site.area_m2 = area_m2;
  site.n_points = static_cast<int>(cloud.points.size());
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  site.slope_deg = nan;
  site.roughness_m = nan;
  if (!cloud.points.empty()) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (const auto& p : cloud.points) c += p;
    site.center = c / static_cast<double>(cloud.points.size());
    site.distance_to_ils_m = (site.center - ils_position).norm();
  }
  try {
    const Plane plane = fit_plane(cloud.points, gravity_dir);
    site.slope_deg = slope_of(plane.normal, gravity_dir);
    site.roughness_m = roughness_of(cloud.points, plane);
  } catch (const Error&) {
    // Degenerate cloud: leave NaN metrics, which fail every limit.
  }
  site.safe = is_safe(site, limits);
  return site;
}

std::vector<SiteAssessment> assess_and_rank(std::vector<SiteAssessment> sites, const SiteLimits& limits,
                                            const RankWeights& weights) {
  std::vector<SiteAssessment> safe, unsafe;
  for (auto& s : sites) {
    s.safe = is_safe(s, limits);
    s.rank = 0;
    (s.safe ? safe : unsafe).push_back(s);
  }
  std::vector<double> score(safe.size());
  std::vector<std::size_t> order(safe.size());
  for (std::size_t i = 0; i < safe.size(); ++i) {
    score[i] = composite_score(safe[i], limits, weights);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] < score[b];
    if (safe[a].distance_to_ils_m != safe[b].distance_to_ils_m)
      return safe[a].distance_to_ils_m < safe[b].distance_to_ils_m;
    return safe[a].roi < safe[b].roi;
  });
  std::sort(unsafe.begin(), unsafe.end(),
            [](const SiteAssessment& a, const SiteAssessment& b) { return a.roi < b.roi; });

  std::vector<SiteAssessment> out;
  out.reserve(sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.push_back(safe[order[i]]);
    out.back().rank = static_cast<int>(i) + 1;
  }
  out.insert(out.end(), unsafe.begin(), unsafe.end());
  return out;
}

void write_assessment_csv(const std::filesystem::path& path, std::span<const SiteAssessment> sites) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "rank,roi,slope_deg,roughness_m,area_m2,n_points,dist_ils_m,safe\n";
  for (const auto& s : sites) {
    out << s.rank << ',' << s.roi << ',' << fmt_double(s.slope_deg) << ',' << fmt_double(s.roughness_m) << ','
        << fmt_double(s.area_m2) << ',' << s.n_points << ',' << fmt_double(s.distance_to_ils_m) << ','
        << (s.safe ? 1 : 0) << '\n';
  }
}

}  // namespace hda

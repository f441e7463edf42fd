#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "hda/roi.hpp"

namespace hda {

// Pinhole intrinsics. Camera frame: +x right, +y down, +z along the boresight.
// Continuous pixel coordinates put the center of pixel (i, j) at (i+0.5, j+0.5).
struct CameraModel {
  double focal_length_px = 1000.0;
  Eigen::Vector2d principal_point{512.0, 512.0};
  int width_px = 1024;
  int height_px = 1024;

  static CameraModel from_hfov(int width_px, int height_px, double hfov_deg);

  double hfov_deg() const;
  bool in_bounds(const Eigen::Vector2d& px) const;
  // Throws InvalidArgument when the invariants do not hold.
  void validate() const;
};

// Narrow-field terrain camera used by the generator and the pipeline defaults.
inline constexpr double kDefaultHfovDeg = 5.0;
CameraModel default_camera(int width_px = 1024, int height_px = 1024);

// Rigid pose; attitude rotates world vectors into the camera frame, so
// x_cam = R * (x_world - position).
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond attitude = Eigen::Quaterniond::Identity();

  Pose() = default;
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) : position(p), attitude(q.normalized()) {}

  Eigen::Matrix3d rotation() const { return attitude.toRotationMatrix(); }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const { return attitude * (world - position); }
  Eigen::Vector3d to_world(const Eigen::Vector3d& cam) const { return attitude.conjugate() * cam + position; }
  Eigen::Vector3d boresight_world() const { return attitude.conjugate() * Eigen::Vector3d::UnitZ(); }

  Pose inverse() const;

  // Camera at `position` looking at `target`; image rows run toward `up`'s
  // opposite. Falls back to +x as the image-up hint for nadir views.
  static Pose look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                      const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());
};

// Transform composition: compose(a, b) applies b first, then a.
Pose compose(const Pose& a, const Pose& b);

struct NavRecord {
  double time = 0.0;
  Pose pose;
  double range_m = 0.0;
  Eigen::Vector3d gravity_dir{0.0, 0.0, -1.0};

  bool valid() const;
};

// Motion of camera 2 relative to camera 1: rotation maps cam1 vectors into
// cam2, translation is camera 2's position expressed in the cam1 frame.
struct RelativePose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double baseline_m = 0.0;

  RelativePose() = default;
  RelativePose(const Eigen::Quaterniond& r, const Eigen::Vector3d& t)
      : rotation(r.normalized()), translation(t), baseline_m(t.norm()) {}

  // x_cam2 = R * x_cam1 + t21
  Eigen::Vector3d t21() const { return -(rotation * translation); }
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d direction;  // unit

  Eigen::Vector3d at(double t) const { return origin + t * direction; }
};

// Throws BehindCamera when the camera-frame depth is not positive.
Eigen::Vector2d project(const CameraModel& cam, const Pose& pose, const Eigen::Vector3d& world_pt);
std::optional<Eigen::Vector2d> try_project(const CameraModel& cam, const Pose& pose,
                                           const Eigen::Vector3d& world_pt);

// Unnormalized camera-frame direction (x, y, 1) through a pixel.
Eigen::Vector3d pixel_to_camera(const CameraModel& cam, const Eigen::Vector2d& px);

// World ray through an in-bounds pixel; throws OutOfBounds otherwise.
Ray back_project(const CameraModel& cam, const Pose& pose, const Eigen::Vector2d& px);
// Same ray without the bounds check, for rays through image edges or
// keypoints predicted slightly outside.
Ray pixel_ray(const CameraModel& cam, const Pose& pose, const Eigen::Vector2d& px);

RelativePose relative_motion(const NavRecord& nav1, const NavRecord& nav2);
Pose apply_relative(const Pose& pose1, const RelativePose& rel);

// Predicts where an image-1 ROI lands in image 2. Corners are intersected
// with a terrain plane that passes through the boresight point at range_m;
// the plane normal (cam1 frame) defaults to the boresight, i.e. a
// fronto-parallel plane. The box is inflated by margin_frac per side and
// clamped to the image. Throws OffImage when nothing remains.
Roi predict_roi(const Roi& roi, const RelativePose& rel, const CameraModel& cam, double range_m,
                double margin_frac,
                const Eigen::Vector3d& plane_normal_cam1 = Eigen::Vector3d::UnitZ());

// Ground point seen through `px` on the plane through the boresight point
// at range_m with the given cam1-frame normal. Returned in the cam1 frame.
std::optional<Eigen::Vector3d> intersect_range_plane(const CameraModel& cam, const Eigen::Vector2d& px,
                                                     double range_m,
                                                     const Eigen::Vector3d& plane_normal_cam1);

// Angle between the boresight and the gravity direction, radians.
double look_angle(const NavRecord& nav);

// Navigation flat file: header time,px,py,pz,qw,qx,qy,qz,range,gx,gy,gz.
std::vector<NavRecord> read_nav_csv(const std::filesystem::path& path);
void write_nav_csv(const std::filesystem::path& path, std::span<const NavRecord> records);

}  // namespace hda

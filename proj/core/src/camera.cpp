#include "hda/camera.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "hda/error.hpp"
#include "hda/io.hpp"

namespace hda {

CameraModel CameraModel::from_hfov(int width_px, int height_px, double hfov_deg) {
  CameraModel cam;
  cam.width_px = width_px;
  cam.height_px = height_px;
  cam.principal_point = {width_px / 2.0, height_px / 2.0};
  cam.focal_length_px = (width_px / 2.0) / std::tan(hfov_deg * std::numbers::pi / 360.0);
  return cam;
}

CameraModel default_camera(int width_px, int height_px) {
  return CameraModel::from_hfov(width_px, height_px, kDefaultHfovDeg);
}

double CameraModel::hfov_deg() const {
  return 2.0 * std::atan((width_px / 2.0) / focal_length_px) * 180.0 / std::numbers::pi;
}

bool CameraModel::in_bounds(const Eigen::Vector2d& px) const {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= width_px && px.y() <= height_px;
}

void CameraModel::validate() const {
  if (!(focal_length_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal length must be positive");
  if (width_px <= 0 || height_px <= 0) throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  if (!(principal_point.x() >= 0.0 && principal_point.x() < width_px && principal_point.y() >= 0.0 &&
        principal_point.y() < height_px)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside image");
  }
}

Pose Pose::inverse() const {
  const Eigen::Quaterniond inv = attitude.conjugate();
  return Pose(-(attitude * position), inv);
}

Pose Pose::look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target, const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Eigen::Vector3d::UnitX());
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);

  Eigen::Matrix3d world_to_cam;
  world_to_cam.row(0) = right;
  world_to_cam.row(1) = down;
  world_to_cam.row(2) = forward;
  return Pose(position, Eigen::Quaterniond(world_to_cam));
}

Pose compose(const Pose& a, const Pose& b) {
  // a(b(x)) = Ra (Rb (x - pb) - pa) = Ra Rb (x - (pb + Rb^T pa))
  return Pose(b.position + b.attitude.conjugate() * a.position, a.attitude * b.attitude);
}

bool NavRecord::valid() const {
  return std::isfinite(time) && range_m > 0.0 && std::abs(gravity_dir.norm() - 1.0) < 1e-9 &&
         pose.position.allFinite() && std::abs(pose.attitude.norm() - 1.0) < 1e-9;
}

std::optional<Eigen::Vector2d> try_project(const CameraModel& cam, const Pose& pose,
                                           const Eigen::Vector3d& world_pt) {
  const Eigen::Vector3d c = pose.to_camera(world_pt);
  if (!(c.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(cam.principal_point.x() + cam.focal_length_px * c.x() / c.z(),
                         cam.principal_point.y() + cam.focal_length_px * c.y() / c.z());
}

Eigen::Vector2d project(const CameraModel& cam, const Pose& pose, const Eigen::Vector3d& world_pt) {
  if (!world_pt.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite world point");
  auto px = try_project(cam, pose, world_pt);
  if (!px) throw Error(ErrorCode::BehindCamera, "point has non-positive camera depth");
  return *px;
}

Eigen::Vector3d pixel_to_camera(const CameraModel& cam, const Eigen::Vector2d& px) {
  return {(px.x() - cam.principal_point.x()) / cam.focal_length_px,
          (px.y() - cam.principal_point.y()) / cam.focal_length_px, 1.0};
}

Ray pixel_ray(const CameraModel& cam, const Pose& pose, const Eigen::Vector2d& px) {
  return {pose.position, (pose.attitude.conjugate() * pixel_to_camera(cam, px)).normalized()};
}

Ray back_project(const CameraModel& cam, const Pose& pose, const Eigen::Vector2d& px) {
  if (!cam.in_bounds(px)) throw Error(ErrorCode::OutOfBounds, "pixel outside image bounds");
  return pixel_ray(cam, pose, px);
}

RelativePose relative_motion(const NavRecord& nav1, const NavRecord& nav2) {
  const Eigen::Quaterniond& q1 = nav1.pose.attitude;
  const Eigen::Quaterniond& q2 = nav2.pose.attitude;
  return RelativePose((q2 * q1.conjugate()).normalized(), q1 * (nav2.pose.position - nav1.pose.position));
}

Pose apply_relative(const Pose& pose1, const RelativePose& rel) {
  return Pose(pose1.position + pose1.attitude.conjugate() * rel.translation, rel.rotation * pose1.attitude);
}

std::optional<Eigen::Vector3d> intersect_range_plane(const CameraModel& cam, const Eigen::Vector2d& px,
                                                     double range_m,
                                                     const Eigen::Vector3d& plane_normal_cam1) {
  const Eigen::Vector3d n = plane_normal_cam1.normalized();
  const Eigen::Vector3d dir = pixel_to_camera(cam, px);
  const double denom = n.dot(dir);
  const double num = n.z() * range_m;  // n . (0, 0, range)
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = num / denom;
  if (!(t > 0.0)) return std::nullopt;
  return Eigen::Vector3d(t * dir);
}

Roi predict_roi(const Roi& roi, const RelativePose& rel, const CameraModel& cam, double range_m,
                double margin_frac, const Eigen::Vector3d& plane_normal_cam1) {
  if (!(range_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "range must be positive");
  if (!(margin_frac >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be non-negative");

  const Rect& r = roi.rect;
  const std::array<Eigen::Vector2d, 4> corners = {
      Eigen::Vector2d(r.x0, r.y0), Eigen::Vector2d(r.x1(), r.y0), Eigen::Vector2d(r.x0, r.y1()),
      Eigen::Vector2d(r.x1(), r.y1())};

  const Eigen::Matrix3d rot = rel.rotation.toRotationMatrix();
  const Eigen::Vector3d t21 = rel.t21();

  double lo_u = std::numeric_limits<double>::infinity();
  double lo_v = lo_u;
  double hi_u = -lo_u;
  double hi_v = -lo_u;
  for (const auto& corner : corners) {
    auto ground = intersect_range_plane(cam, corner, range_m, plane_normal_cam1);
    if (!ground) throw Error(ErrorCode::OffImage, "ROI corner does not reach the terrain plane");
    const Eigen::Vector3d c2 = rot * *ground + t21;
    if (!(c2.z() > 0.0)) throw Error(ErrorCode::OffImage, "ROI corner behind the second camera");
    const double u = cam.principal_point.x() + cam.focal_length_px * c2.x() / c2.z();
    const double v = cam.principal_point.y() + cam.focal_length_px * c2.y() / c2.z();
    lo_u = std::min(lo_u, u);
    hi_u = std::max(hi_u, u);
    lo_v = std::min(lo_v, v);
    hi_v = std::max(hi_v, v);
  }

  const double grow_u = margin_frac * (hi_u - lo_u);
  const double grow_v = margin_frac * (hi_v - lo_v);
  lo_u -= grow_u;
  hi_u += grow_u;
  lo_v -= grow_v;
  hi_v += grow_v;

  // Snap outward to whole pixels, ignoring floating-point dust.
  constexpr double kSnap = 1e-6;
  const double x0 = std::floor(lo_u + kSnap);
  const double y0 = std::floor(lo_v + kSnap);
  const double x1 = std::ceil(hi_u - kSnap);
  const double y1 = std::ceil(hi_v - kSnap);

  const double cx0 = std::clamp(x0, 0.0, static_cast<double>(cam.width_px));
  const double cy0 = std::clamp(y0, 0.0, static_cast<double>(cam.height_px));
  const double cx1 = std::clamp(x1, 0.0, static_cast<double>(cam.width_px));
  const double cy1 = std::clamp(y1, 0.0, static_cast<double>(cam.height_px));
  if (cx1 <= cx0 || cy1 <= cy0) throw Error(ErrorCode::OffImage, "predicted ROI lies outside image 2");

  Roi out = roi;
  out.rect = {static_cast<int>(cx0), static_cast<int>(cy0), static_cast<int>(cx1 - cx0),
              static_cast<int>(cy1 - cy0)};
  return out;
}

double look_angle(const NavRecord& nav) {
  const double c = std::clamp(nav.pose.boresight_world().dot(nav.gravity_dir.normalized()), -1.0, 1.0);
  return std::acos(c);
}

std::vector<NavRecord> read_nav_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  static constexpr std::string_view kHeader = "time,px,py,pz,qw,qx,qy,qz,range,gx,gy,gz";
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path.string() + ": empty nav file");
  if (trim(line) != kHeader) throw Error(ErrorCode::Parse, path.string() + ": unexpected nav header");

  std::vector<NavRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 12) {
      throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(line_no) + ": expected 12 fields");
    }
    std::array<double, 12> v{};
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = parse_double(fields[i], path.string() + ":" + std::to_string(line_no));
    }
    NavRecord rec;
    rec.time = v[0];
    rec.pose = Pose({v[1], v[2], v[3]}, Eigen::Quaterniond(v[4], v[5], v[6], v[7]));
    rec.range_m = v[8];
    rec.gravity_dir = Eigen::Vector3d(v[9], v[10], v[11]).normalized();
    records.push_back(rec);
  }
  return records;
}

void write_nav_csv(const std::filesystem::path& path, std::span<const NavRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "time,px,py,pz,qw,qx,qy,qz,range,gx,gy,gz\n";
  for (const auto& r : records) {
    const auto& p = r.pose.position;
    const auto& q = r.pose.attitude;
    out << fmt_double(r.time) << ',' << fmt_double(p.x()) << ',' << fmt_double(p.y()) << ','
        << fmt_double(p.z()) << ',' << fmt_double(q.w()) << ',' << fmt_double(q.x()) << ','
        << fmt_double(q.y()) << ',' << fmt_double(q.z()) << ',' << fmt_double(r.range_m) << ','
        << fmt_double(r.gravity_dir.x()) << ',' << fmt_double(r.gravity_dir.y()) << ','
        << fmt_double(r.gravity_dir.z()) << '\n';
  }
}

}  // namespace hda

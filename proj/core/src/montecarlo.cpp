#include "hda/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "hda/error.hpp"
#include "hda/io.hpp"
#include "hda/random.hpp"
#include "hda/sfm.hpp"

namespace hda {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::string_view to_string(Motion motion) { return motion == Motion::Lateral ? "Lateral" : "Boresight"; }

void McConfig::validate() const {
  if (motions.empty()) throw Error(ErrorCode::InvalidArgument, "mc: motions must not be empty");
  if (baselines_m.empty() || pixel_noise_px.empty()) throw Error(ErrorCode::InvalidArgument, "mc: empty grid");
  for (double b : baselines_m)
    if (!(b >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mc: baselines must be >= 0");
  for (double s : pixel_noise_px)
    if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "mc: pixel noise must be >= 0");
  if (n_trials < 1) throw Error(ErrorCode::InvalidArgument, "mc: n_trials must be >= 1");
  if (n_features < 3) throw Error(ErrorCode::InvalidArgument, "mc: n_features must be >= 3");
  if (!(altitude_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "mc: altitude must be > 0");
  if (!(look_angle_deg >= 0.0 && look_angle_deg < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "mc: look angle must be in [0, 90)");
  }
  if (!(truth_slope_deg >= 0.0 && truth_slope_deg < 90.0)) {
    throw Error(ErrorCode::InvalidArgument, "mc: truth slope must be in [0, 90)");
  }
  if (!(patch_size_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "mc: patch size must be > 0");
  camera.validate();
}

double run_trial(const McConfig& config, const McCell& cell, std::uint64_t seed) {
  if (!(cell.baseline_m > 0.0)) return kInf;
  Rng rng(seed);

  // Camera 1 sits at the given altitude, down-range along +x, looking at the
  // patch center at the origin.
  const double look = config.look_angle_deg * kDeg;
  const Eigen::Vector3d target = Eigen::Vector3d::Zero();
  const Eigen::Vector3d p1(config.altitude_m * std::tan(look), 0.0, config.altitude_m);
  const Pose pose1 = Pose::look_at(p1, target);
  Pose pose2;
  if (cell.motion == Motion::Lateral) {
    const Eigen::Vector3d p2 = p1 + Eigen::Vector3d(-cell.baseline_m, 0.0, 0.0);
    pose2 = Pose::look_at(p2, target);
  } else {
    pose2 = Pose(p1 + cell.baseline_m * pose1.boresight_world(), pose1.attitude);
  }

  // Plane through the origin rising along a random azimuth.
  const double azimuth = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double g = std::tan(config.truth_slope_deg * kDeg);
  const Eigen::Vector2d dir(std::cos(azimuth), std::sin(azimuth));

  std::vector<Eigen::Vector2d> px1, px2;
  px1.reserve(static_cast<std::size_t>(config.n_features));
  px2.reserve(px1.capacity());
  const double half = 0.5 * config.patch_size_m;
  for (int i = 0; i < config.n_features; ++i) {
    const double x = rng.uniform(-half, half);
    const double y = rng.uniform(-half, half);
    const Eigen::Vector3d pt(x, y, g * dir.dot(Eigen::Vector2d(x, y)));
    const double n1u = rng.normal(), n1v = rng.normal(), n2u = rng.normal(), n2v = rng.normal();
    const auto a = try_project(config.camera, pose1, pt);
    const auto b = try_project(config.camera, pose2, pt);
    if (!a || !b) continue;
    px1.push_back(*a + cell.noise_px * Eigen::Vector2d(n1u, n1v));
    px2.push_back(*b + cell.noise_px * Eigen::Vector2d(n2u, n2v));
  }
  if (px1.size() < 3) return kInf;

  const Eigen::Vector3d gravity(0.0, 0.0, -1.0);
  NavRecord nav1, nav2;
  nav1.pose = pose1;
  nav2.pose = pose2;
  const RelativePose rel = relative_motion(nav1, nav2);
  try {
    const PointCloud cloud = triangulate(px1, px2, pose1, rel, config.camera, 0.0);
    const Plane plane = fit_plane(cloud.points, gravity);
    return std::abs(slope_of(plane.normal, gravity) - config.truth_slope_deg);
  } catch (const Error&) {
    return kInf;
  }
}

void summarize(McCellResult& cell) {
  std::vector<double> s = cell.errors_deg;
  cell.n_degenerate = static_cast<int>(std::count_if(s.begin(), s.end(), [](double v) { return !std::isfinite(v); }));
  if (s.empty()) {
    cell.median_err_deg = cell.p95_err_deg = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  cell.median_err_deg = n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  cell.p95_err_deg = s[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n - 1)))];
}

McResult sweep(const McConfig& config, const ParallelOptions& parallel) {
  config.validate();
  McResult result;
  for (Motion m : config.motions)
    for (double b : config.baselines_m)
      for (double s : config.pixel_noise_px) {
        McCellResult c;
        c.cell = {m, b, s};
        c.errors_deg.assign(static_cast<std::size_t>(config.n_trials), 0.0);
        result.cells.push_back(std::move(c));
      }
  const std::size_t trials = static_cast<std::size_t>(config.n_trials);
  parallel_for(
      result.cells.size() * trials,
      [&](std::size_t job) {
        const std::size_t c = job / trials;
        const std::size_t t = job % trials;
        result.cells[c].errors_deg[t] = run_trial(config, result.cells[c].cell, derive_seed(config.seed, c, t));
      },
      parallel);
  for (auto& c : result.cells) summarize(c);
  return result;
}

void write_mc_csv(const std::filesystem::path& path, const McResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "motion,baseline_m,noise_px,median_err_deg,p95_err_deg,n_degenerate\n";
  for (const auto& c : result.cells) {
    out << to_string(c.cell.motion) << ',' << fmt_double(c.cell.baseline_m) << ',' << fmt_double(c.cell.noise_px)
        << ',' << fmt_double(c.median_err_deg) << ',' << fmt_double(c.p95_err_deg) << ',' << c.n_degenerate
        << '\n';
  }
}

}  // namespace hda

#include "hda/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "hda/error.hpp"
#include "hda/io.hpp"
#include "hda/random.hpp"

namespace hda {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

// ---------------------------------------------------------------------------
// Heightmap

Heightmap::Heightmap(int nx, int ny, double resolution_mpp, Eigen::Vector2d origin, std::vector<double> z)
    : nx_(nx), ny_(ny), resolution_(resolution_mpp), origin_(std::move(origin)), z_(std::move(z)) {
  if (nx_ < 2 || ny_ < 2) throw Error(ErrorCode::InvalidArgument, "heightmap needs at least 2x2 nodes");
  if (!(resolution_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "heightmap resolution must be positive");
  if (z_.size() != static_cast<std::size_t>(nx_) * ny_) {
    throw Error(ErrorCode::InvalidArgument, "heightmap node count mismatch");
  }
  for (double v : z_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite elevation");
  }
}

bool Heightmap::contains(double x, double y) const {
  const Eigen::Vector2d hi = extent_max();
  return x >= origin_.x() && y >= origin_.y() && x <= hi.x() && y <= hi.y();
}

double Heightmap::elevation(double x, double y) const {
  const double fx = std::clamp((x - origin_.x()) / resolution_, 0.0, static_cast<double>(nx_ - 1));
  const double fy = std::clamp((y - origin_.y()) / resolution_, 0.0, static_cast<double>(ny_ - 1));
  const int i = std::min(static_cast<int>(fx), nx_ - 2);
  const int j = std::min(static_cast<int>(fy), ny_ - 2);
  const double tx = fx - i;
  const double ty = fy - j;
  const double* r0 = z_.data() + static_cast<std::size_t>(j) * nx_ + i;
  const double* r1 = r0 + nx_;
  const double top = r0[0] + (r0[1] - r0[0]) * tx;
  const double bottom = r1[0] + (r1[1] - r1[0]) * tx;
  return top + (bottom - top) * ty;
}

Eigen::Vector2d Heightmap::gradient(double x, double y) const {
  const double fx = std::clamp((x - origin_.x()) / resolution_, 0.0, static_cast<double>(nx_ - 1));
  const double fy = std::clamp((y - origin_.y()) / resolution_, 0.0, static_cast<double>(ny_ - 1));
  const int i = std::min(static_cast<int>(fx), nx_ - 2);
  const int j = std::min(static_cast<int>(fy), ny_ - 2);
  const double tx = fx - i;
  const double ty = fy - j;
  const double z00 = node(i, j), z10 = node(i + 1, j), z01 = node(i, j + 1), z11 = node(i + 1, j + 1);
  const double gx = ((z10 - z00) * (1.0 - ty) + (z11 - z01) * ty) / resolution_;
  const double gy = ((z01 - z00) * (1.0 - tx) + (z11 - z10) * tx) / resolution_;
  return {gx, gy};
}

double Heightmap::min_elevation() const { return *std::min_element(z_.begin(), z_.end()); }
double Heightmap::max_elevation() const { return *std::max_element(z_.begin(), z_.end()); }

Heightmap generate_heightmap(std::uint64_t seed, int size_px, double resolution_mpp,
                             std::span<const Octave> octaves) {
  if (size_px < 2) throw Error(ErrorCode::InvalidArgument, "size_px must be >= 2");
  const double half = 0.5 * (size_px - 1) * resolution_mpp;
  const Eigen::Vector2d origin(-half, -half);
  std::vector<double> z(static_cast<std::size_t>(size_px) * size_px, 0.0);

  constexpr int kWavesPerOctave = 3;
  std::vector<double> sx(size_px), cx(size_px), sy(size_px), cy(size_px);
  for (std::size_t o = 0; o < octaves.size(); ++o) {
    const Octave& oct = octaves[o];
    if (!(oct.wavelength_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "octave wavelength must be positive");
    Rng rng(derive_seed(seed, o));
    const double k = 2.0 * std::numbers::pi / oct.wavelength_m;
    const double a = oct.amplitude_m / kWavesPerOctave;
    for (int w = 0; w < kWavesPerOctave; ++w) {
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double kx = k * std::cos(theta);
      const double ky = k * std::sin(theta);
      // sin(kx x + ky y + phase) = sin(kx x) cos(ky y + phase) + cos(kx x) sin(ky y + phase)
      for (int i = 0; i < size_px; ++i) {
        const double x = origin.x() + i * resolution_mpp;
        sx[i] = std::sin(kx * x);
        cx[i] = std::cos(kx * x);
      }
      for (int j = 0; j < size_px; ++j) {
        const double y = origin.y() + j * resolution_mpp;
        sy[j] = std::sin(ky * y + phase);
        cy[j] = std::cos(ky * y + phase);
      }
      for (int j = 0; j < size_px; ++j) {
        double* row = z.data() + static_cast<std::size_t>(j) * size_px;
        const double ay = a * cy[j];
        const double by = a * sy[j];
        for (int i = 0; i < size_px; ++i) row[i] += sx[i] * ay + cx[i] * by;
      }
    }
  }
  return Heightmap(size_px, size_px, resolution_mpp, origin, std::move(z));
}

// ---------------------------------------------------------------------------
// Rocks

void RockDistributionParams::validate() const {
  if (!(k > 0.0)) throw Error(ErrorCode::InvalidArgument, "rock k must be positive");
  if (!(d_min_m > 0.0 && d_min_m < d_max_m)) {
    throw Error(ErrorCode::InvalidArgument, "rock diameters need 0 < d_min < d_max");
  }
  if (!(area_radius_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "rock area radius must be positive");
  if (!(height_ratio > 0.0)) throw Error(ErrorCode::InvalidArgument, "rock height ratio must be positive");
}

double rock_count(const RockDistributionParams& params, double diameter_m) {
  if (!(diameter_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "rock diameter must be positive");
  return params.k * std::pow(diameter_m, params.r);
}

double k_from_density(double density_per_m2, double area_radius_m) {
  return density_per_m2 * std::numbers::pi * area_radius_m * area_radius_m;
}

RockField scatter_rocks(const RockDistributionParams& params, std::uint64_t seed) {
  params.validate();
  const double n_min = rock_count(params, params.d_min_m);  // rocks >= d_min
  const double n_max = rock_count(params, params.d_max_m);  // rocks >= d_max
  const long long count = std::llround(n_min - n_max);

  RockField field;
  if (count <= 0) return field;
  field.rocks.reserve(static_cast<std::size_t>(count));

  Rng rng(derive_seed(seed, 0x726f636b));
  for (long long n = 0; n < count; ++n) {
    // Inverse of the truncated cumulative law: N(D) = n_max + u (n_min - n_max).
    const double u = rng.uniform();
    const double cumulative = n_max + u * (n_min - n_max);
    double d = std::pow(cumulative / params.k, 1.0 / params.r);
    d = std::clamp(d, params.d_min_m, params.d_max_m);

    const double radius = params.area_radius_m * std::sqrt(rng.uniform());
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Rock rock;
    rock.center = params.center + radius * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    rock.diameter_m = d;
    rock.height_m = params.height_ratio * d;
    rock.yaw_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
    field.rocks.push_back(rock);
  }
  return field;
}

// ---------------------------------------------------------------------------
// Texture

namespace {

double lattice_value(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(ix) * 0x9E3779B97F4A7C15ULL ^
                                                   static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double value_noise(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx);
  const auto iy = static_cast<std::int64_t>(fy);
  const double tx = fade(x - fx);
  const double ty = fade(y - fy);
  const double a = lattice_value(ix, iy, seed);
  const double b = lattice_value(ix + 1, iy, seed);
  const double c = lattice_value(ix, iy + 1, seed);
  const double d = lattice_value(ix + 1, iy + 1, seed);
  return (a + (b - a) * tx) * (1.0 - ty) + (c + (d - c) * tx) * ty;
}

}  // namespace

double SurfaceTexture::factor(double x, double y) const {
  if (amplitude == 0.0 || wavelengths_m.empty()) return 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < wavelengths_m.size(); ++i) {
    sum += value_noise(x / wavelengths_m[i], y / wavelengths_m[i], derive_seed(seed, i));
  }
  return 1.0 + amplitude * sum / static_cast<double>(wavelengths_m.size());
}

// ---------------------------------------------------------------------------
// TerrainScene

TerrainScene::TerrainScene(Heightmap heightmap, RockField rocks, Eigen::Vector3d sun_dir, double albedo,
                           SurfaceTexture texture)
    : heightmap_(std::move(heightmap)),
      rocks_(std::move(rocks)),
      sun_dir_(std::move(sun_dir)),
      albedo_(albedo),
      texture_(std::move(texture)) {
  if (!(albedo_ > 0.0 && albedo_ <= 1.0)) throw Error(ErrorCode::InvalidArgument, "albedo must be in (0, 1]");
  if (!(sun_dir_.norm() > 0.0)) throw Error(ErrorCode::InvalidArgument, "sun direction must be non-zero");
  sun_dir_.normalize();

  z_bottom_ = heightmap_.min_elevation();
  z_top_ = heightmap_.max_elevation();

  double max_diameter = 0.0;
  rock_base_.reserve(rocks_.rocks.size());
  for (const Rock& r : rocks_.rocks) {
    const double base = heightmap_.elevation(r.center.x(), r.center.y());
    rock_base_.push_back(base);
    z_top_ = std::max(z_top_, base + r.height_m);
    max_diameter = std::max(max_diameter, r.diameter_m);
  }

  // Uniform grid over the heightmap; each rock is listed in every cell its
  // disc's bounding box touches, so a point query inspects one cell.
  const Eigen::Vector2d lo = heightmap_.origin();
  const Eigen::Vector2d hi = heightmap_.extent_max();
  cell_size_ = std::max(2.0, max_diameter);
  cells_x_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / cell_size_)));
  cells_y_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / cell_size_)));
  const std::size_t n_cells = static_cast<std::size_t>(cells_x_) * cells_y_;

  auto cell_range = [&](const Rock& r, int& cx0, int& cy0, int& cx1, int& cy1) {
    const double a = 0.5 * r.diameter_m;
    cx0 = std::clamp(static_cast<int>(std::floor((r.center.x() - a - lo.x()) / cell_size_)), 0, cells_x_ - 1);
    cx1 = std::clamp(static_cast<int>(std::floor((r.center.x() + a - lo.x()) / cell_size_)), 0, cells_x_ - 1);
    cy0 = std::clamp(static_cast<int>(std::floor((r.center.y() - a - lo.y()) / cell_size_)), 0, cells_y_ - 1);
    cy1 = std::clamp(static_cast<int>(std::floor((r.center.y() + a - lo.y()) / cell_size_)), 0, cells_y_ - 1);
  };

  std::vector<std::uint32_t> counts(n_cells + 1, 0);
  for (const Rock& r : rocks_.rocks) {
    int cx0, cy0, cx1, cy1;
    cell_range(r, cx0, cy0, cx1, cy1);
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx) ++counts[static_cast<std::size_t>(cy) * cells_x_ + cx + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;
  cell_rocks_.assign(counts.back(), 0);
  std::vector<std::uint32_t> fill(counts.begin(), counts.end() - 1);
  for (std::size_t k = 0; k < rocks_.rocks.size(); ++k) {
    int cx0, cy0, cx1, cy1;
    cell_range(rocks_.rocks[k], cx0, cy0, cx1, cy1);
    for (int cy = cy0; cy <= cy1; ++cy)
      for (int cx = cx0; cx <= cx1; ++cx)
        cell_rocks_[fill[static_cast<std::size_t>(cy) * cells_x_ + cx]++] = static_cast<std::uint32_t>(k);
  }
}

double TerrainScene::albedo_at(double x, double y) const {
  return std::clamp(albedo_ * texture_.factor(x, y), 0.0, 1.0);
}

double TerrainScene::height(double x, double y, int* rock_id) const {
  double z = heightmap_.elevation(x, y);
  int top = -1;
  if (!rocks_.rocks.empty()) {
    const Eigen::Vector2d& lo = heightmap_.origin();
    const int cx = static_cast<int>(std::floor((x - lo.x()) / cell_size_));
    const int cy = static_cast<int>(std::floor((y - lo.y()) / cell_size_));
    if (cx >= 0 && cy >= 0 && cx < cells_x_ && cy < cells_y_) {
      const std::size_t cell = static_cast<std::size_t>(cy) * cells_x_ + cx;
      for (std::uint32_t n = cell_start_[cell]; n < cell_start_[cell + 1]; ++n) {
        const std::uint32_t k = cell_rocks_[n];
        const Rock& r = rocks_.rocks[k];
        const double dx = x - r.center.x();
        const double dy = y - r.center.y();
        const double a = 0.5 * r.diameter_m;
        const double q = 1.0 - (dx * dx + dy * dy) / (a * a);
        if (q <= 0.0) continue;
        const double rz = rock_base_[k] + r.height_m * std::sqrt(q);
        if (rz > z) {
          z = rz;
          top = static_cast<int>(k);
        }
      }
    }
  }
  if (rock_id) *rock_id = top;
  return z;
}

Eigen::Vector3d TerrainScene::normal(double x, double y, int rock_id) const {
  if (rock_id >= 0) {
    const Rock& r = rocks_.rocks[static_cast<std::size_t>(rock_id)];
    const double a = 0.5 * r.diameter_m;
    const double dx = x - r.center.x();
    const double dy = y - r.center.y();
    const double s = std::sqrt(std::max(1.0 - (dx * dx + dy * dy) / (a * a), 1e-12));
    const double k = r.height_m / (a * a * s);
    return Eigen::Vector3d(k * dx, k * dy, 1.0).normalized();
  }
  const Eigen::Vector2d g = heightmap_.gradient(x, y);
  return Eigen::Vector3d(-g.x(), -g.y(), 1.0).normalized();
}

bool TerrainScene::slab_interval(const Ray& ray, double& t0, double& t1) const {
  const Eigen::Vector2d lo2 = heightmap_.origin();
  const Eigen::Vector2d hi2 = heightmap_.extent_max();
  const Eigen::Vector3d lo(lo2.x(), lo2.y(), z_bottom_ - 1e-6);
  const Eigen::Vector3d hi(hi2.x(), hi2.y(), z_top_ + 1e-6);
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (std::abs(d) < 1e-15) {
      if (o < lo[a] || o > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o) / d;
    double tb = (hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

std::optional<SurfaceHit> TerrainScene::intersect(const Ray& ray) const {
  double t0 = 0.0, t1 = 0.0;
  if (!slab_interval(ray, t0, t1)) return std::nullopt;

  auto clearance = [&](double t) {
    const Eigen::Vector3d p = ray.at(t);
    return p.z() - height(p.x(), p.y());
  };

  const double step = 0.5 * heightmap_.resolution_mpp();
  double ta = t0;
  if (clearance(ta) <= 0.0) return std::nullopt;  // entered through a side wall below the surface
  while (ta < t1) {
    const double tb = std::min(ta + step, t1);
    if (clearance(tb) <= 0.0) {
      double lo = ta, hi = tb;
      for (int it = 0; it < 64 && hi - lo > 1e-11; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (clearance(mid) > 0.0) lo = mid;
        else hi = mid;
      }
      SurfaceHit hit;
      hit.t = 0.5 * (lo + hi);
      hit.point = ray.at(hit.t);
      height(hit.point.x(), hit.point.y(), &hit.rock_id);
      hit.normal = normal(hit.point.x(), hit.point.y(), hit.rock_id);
      return hit;
    }
    ta = tb;
  }
  return std::nullopt;
}

bool TerrainScene::sun_occluded(const Eigen::Vector3d& point, const Eigen::Vector3d& normal) const {
  if (sun_dir_.z() <= 0.0) return true;
  const Eigen::Vector3d start = point + 1e-4 * normal;
  const double step = 0.5 * heightmap_.resolution_mpp();
  for (double t = step;; t += step) {
    const Eigen::Vector3d p = start + t * sun_dir_;
    if (p.z() > z_top_) return false;
    if (!heightmap_.contains(p.x(), p.y())) return false;
    if (p.z() < height(p.x(), p.y())) return true;
  }
}

// ---------------------------------------------------------------------------
// Rendering and ground truth

RenderResult render(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                    const ParallelOptions& parallel) {
  cam.validate();
  const int w = cam.width_px;
  const int h = cam.height_px;
  RenderResult out{Image(w, h), Raster<std::uint8_t>(w, h), Raster<std::uint8_t>(w, h),
                   Raster<std::uint8_t>(w, h), Raster<std::int32_t>(w, h, -1)};
  const Eigen::Vector3d& sun = scene.sun_dir();

  parallel_for(
      static_cast<std::size_t>(h),
      [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
          const Ray ray = pixel_ray(cam, pose, {x + 0.5, y + 0.5});
          const auto hit = scene.intersect(ray);
          if (!hit) {
            out.no_hit(x, y) = 1;
            out.unlit(x, y) = 1;
            continue;
          }
          out.rock_id(x, y) = hit->rock_id;
          const double n_dot_s = hit->normal.dot(sun);
          bool dark = n_dot_s <= 0.0;
          if (!dark && scene.sun_occluded(hit->point, hit->normal)) {
            out.occluded(x, y) = 1;
            dark = true;
          }
          out.unlit(x, y) = dark ? 1 : 0;
          const double value = dark ? 0.0 : scene.albedo_at(hit->point.x(), hit->point.y()) * n_dot_s * 255.0;
          out.image(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
        }
      },
      parallel);
  return out;
}

std::vector<TruthSample> ground_truth_cloud(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                                            const Rect& rect, int rows, int cols,
                                            const ParallelOptions& parallel) {
  if (rows < 2 || cols < 2) throw Error(ErrorCode::InvalidArgument, "truth cloud needs rows, cols >= 2");
  std::vector<std::optional<Eigen::Vector3d>> grid(static_cast<std::size_t>(rows) * cols);
  parallel_for(
      static_cast<std::size_t>(rows),
      [&](std::size_t r) {
        const double v = rect.y0 + static_cast<double>(r) * rect.height / (rows - 1);
        for (int c = 0; c < cols; ++c) {
          const double u = rect.x0 + static_cast<double>(c) * rect.width / (cols - 1);
          const auto hit = scene.intersect(pixel_ray(cam, pose, {u, v}));
          if (hit) grid[r * cols + c] = hit->point;
        }
      },
      parallel);

  std::vector<TruthSample> samples;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (const auto& p = grid[static_cast<std::size_t>(r) * cols + c]) samples.push_back({r, c, *p});
  return samples;
}

std::vector<TruthSample> ground_truth_cloud(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                                            int rows, int cols, const ParallelOptions& parallel) {
  return ground_truth_cloud(scene, cam, pose, Rect{0, 0, cam.width_px, cam.height_px}, rows, cols, parallel);
}

TruthMaps truth_maps(const TerrainScene& scene, const CameraModel& cam, const Pose& pose, int stride,
                     const ParallelOptions& parallel) {
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "truth map stride must be >= 1");
  const int w = (cam.width_px + stride - 1) / stride;
  const int h = (cam.height_px + stride - 1) / stride;
  TruthMaps maps{Raster<double>(w, h), Raster<double>(w, h), Raster<std::uint8_t>(w, h)};
  parallel_for(
      static_cast<std::size_t>(h),
      [&](std::size_t row) {
        const int y = static_cast<int>(row);
        for (int x = 0; x < w; ++x) {
          const auto hit = scene.intersect(pixel_ray(cam, pose, {x * stride + 0.5, y * stride + 0.5}));
          if (!hit) continue;
          maps.valid(x, y) = 1;
          maps.elevation(x, y) = hit->point.z();
          maps.slope_deg(x, y) = std::acos(std::clamp(hit->normal.z(), -1.0, 1.0)) / kDeg;
        }
      },
      parallel);
  return maps;
}

// ---------------------------------------------------------------------------
// Scene specs

Eigen::Vector3d sun_from_angles(double elevation_deg, double azimuth_deg) {
  const double el = elevation_deg * kDeg;
  const double az = azimuth_deg * kDeg;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  spec.seed = 1;
  spec.size_m = 1024.0;
  spec.resolution_mpp = 0.5;
  spec.octaves = {{400.0, 3.0}, {120.0, 0.8}, {40.0, 0.15}};
  RockDistributionParams rocks;
  rocks.r = -2.5;
  rocks.d_min_m = 0.5;
  rocks.d_max_m = 4.0;
  rocks.area_radius_m = 500.0;
  rocks.k = k_from_density(5e-4, rocks.area_radius_m);
  spec.rocks = rocks;
  spec.sun_dir = sun_from_angles(30.0, 135.0);
  spec.albedo = 0.6;
  spec.texture.amplitude = 0.3;
  spec.texture.wavelengths_m = {0.2, 0.5, 1.2};
  return spec;
}

TerrainScene build_scene(const SceneSpec& spec) {
  if (!(spec.size_m > 0.0 && spec.resolution_mpp > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "scene size and resolution must be positive");
  }
  const int size_px = static_cast<int>(std::llround(spec.size_m / spec.resolution_mpp)) + 1;
  Heightmap hm = generate_heightmap(derive_seed(spec.seed, 1), size_px, spec.resolution_mpp, spec.octaves);

  const double tilt = std::tan(spec.tilt.slope_deg * kDeg);
  const double caz = std::cos(spec.tilt.azimuth_deg * kDeg);
  const double saz = std::sin(spec.tilt.azimuth_deg * kDeg);
  for (int j = 0; j < hm.ny(); ++j) {
    const double y = hm.origin().y() + j * hm.resolution_mpp();
    for (int i = 0; i < hm.nx(); ++i) {
      const double x = hm.origin().x() + i * hm.resolution_mpp();
      double z = hm.node(i, j) + tilt * (x * caz + y * saz);
      for (const SlopedPatch& p : spec.patches) {
        const double half = 0.5 * p.size_m;
        const double d = std::max(std::abs(x - p.center.x()), std::abs(y - p.center.y()));
        if (d < half) z += std::tan(p.slope_deg * kDeg) * (half - d);
      }
      hm.node(i, j) = z;
    }
  }

  RockField rocks;
  if (spec.rocks) rocks = scatter_rocks(*spec.rocks, derive_seed(spec.seed, 2));
  rocks.rocks.insert(rocks.rocks.end(), spec.extra_rocks.begin(), spec.extra_rocks.end());

  SurfaceTexture texture = spec.texture;
  texture.seed = derive_seed(spec.seed, 3, spec.texture.seed);
  return TerrainScene(std::move(hm), std::move(rocks), spec.sun_dir, spec.albedo, std::move(texture));
}

// ---------------------------------------------------------------------------
// CSV

void TrajectorySpec::validate() const {
  if (!(altitude_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory altitude must be > 0");
  if (!(downrange_m >= 0.0)) throw Error(ErrorCode::InvalidArgument, "trajectory downrange must be >= 0");
  if (!(ground_speed_mps >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ground speed must be >= 0");
  if (!(capture_interval_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "capture interval must be > 0");
}

std::array<NavRecord, 2> make_trajectory(const TrajectorySpec& spec, const TerrainScene& scene) {
  spec.validate();
  std::array<NavRecord, 2> out;
  const Eigen::Vector3d p1 = spec.target + Eigen::Vector3d(spec.downrange_m, 0.0, spec.altitude_m);
  const Eigen::Vector3d step(-spec.ground_speed_mps * spec.capture_interval_s, 0.0, 0.0);
  for (int i = 0; i < 2; ++i) {
    NavRecord& nav = out[static_cast<std::size_t>(i)];
    nav.time = spec.start_time_s + i * spec.capture_interval_s;
    nav.pose = Pose::look_at(p1 + i * step, spec.target);
    nav.gravity_dir = Eigen::Vector3d(0.0, 0.0, -1.0);
    const Ray boresight{nav.pose.position, nav.pose.boresight_world()};
    const auto hit = scene.intersect(boresight);
    if (!hit) throw Error(ErrorCode::InvalidArgument, "boresight misses the terrain");
    nav.range_m = hit->t;
  }
  return out;
}

void write_truth_cloud_csv(const std::filesystem::path& path, std::span<const TruthSample> samples) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "row,col,x,y,z\n";
  for (const auto& s : samples) {
    out << s.row << ',' << s.col << ',' << fmt_double(s.point.x()) << ',' << fmt_double(s.point.y()) << ','
        << fmt_double(s.point.z()) << '\n';
  }
}

std::vector<TruthSample> read_truth_cloud_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "row,col,x,y,z") {
    throw Error(ErrorCode::Parse, path.string() + ": unexpected truth cloud header");
  }
  std::vector<TruthSample> samples;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw Error(ErrorCode::Parse, path.string() + ": expected 5 fields");
    TruthSample s;
    s.row = static_cast<int>(parse_double(f[0], path.string()));
    s.col = static_cast<int>(parse_double(f[1], path.string()));
    s.point = {parse_double(f[2], path.string()), parse_double(f[3], path.string()),
               parse_double(f[4], path.string())};
    samples.push_back(s);
  }
  return samples;
}

void write_map_csv(const std::filesystem::path& path, const Raster<double>& values,
                   const Raster<std::uint8_t>& valid, int stride) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "row,col,value\n";
  for (int y = 0; y < values.height(); ++y)
    for (int x = 0; x < values.width(); ++x)
      if (valid(x, y)) out << y * stride << ',' << x * stride << ',' << fmt_double(values(x, y)) << '\n';
}

}  // namespace hda

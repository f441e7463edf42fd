#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hda/camera.hpp"
#include "hda/image.hpp"
#include "hda/parallel.hpp"

namespace hda {

struct Octave {
  double wavelength_m = 100.0;
  double amplitude_m = 1.0;
};

// Regular elevation grid. Node (i, j) sits at origin + (i, j) * resolution;
// elevation between nodes is bilinear.
class Heightmap {
 public:
  Heightmap(int nx, int ny, double resolution_mpp, Eigen::Vector2d origin, std::vector<double> z);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double resolution_mpp() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  Eigen::Vector2d extent_max() const { return origin_ + resolution_ * Eigen::Vector2d(nx_ - 1, ny_ - 1); }

  double node(int i, int j) const { return z_[static_cast<std::size_t>(j) * nx_ + i]; }
  double& node(int i, int j) { return z_[static_cast<std::size_t>(j) * nx_ + i]; }
  const std::vector<double>& nodes() const { return z_; }

  bool contains(double x, double y) const;
  // Bilinear elevation; positions outside the grid are clamped to the edge.
  double elevation(double x, double y) const;
  // Gradient of the bilinear interpolant (dz/dx, dz/dy).
  Eigen::Vector2d gradient(double x, double y) const;

  double min_elevation() const;
  double max_elevation() const;

 private:
  int nx_;
  int ny_;
  double resolution_;
  Eigen::Vector2d origin_;
  std::vector<double> z_;
};

// size_px x size_px nodes centered on the world origin. Each octave is the
// sum of three plane waves of the given wavelength whose amplitudes total
// amplitude_m, so |gradient| <= 2*pi*amplitude/wavelength per octave.
Heightmap generate_heightmap(std::uint64_t seed, int size_px, double resolution_mpp,
                             std::span<const Octave> octaves);

// Cumulative rock count N(D) = k * D^r inside the scatter disc.
struct RockDistributionParams {
  double k = 1.0;
  double r = -2.5;
  double d_min_m = 0.5;
  double d_max_m = 4.0;
  double area_radius_m = 100.0;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double height_ratio = 0.5;  // rock height / diameter

  void validate() const;
};

double rock_count(const RockDistributionParams& params, double diameter_m);

// Converts an areal density coefficient (rocks per m^2 at D = 1 m) into the
// disc-integrated k used by RockDistributionParams.
double k_from_density(double density_per_m2, double area_radius_m);

struct Rock {
  Eigen::Vector2d center;
  double diameter_m = 0.0;
  double height_m = 0.0;
  double yaw_rad = 0.0;
};

struct RockField {
  std::vector<Rock> rocks;
};

RockField scatter_rocks(const RockDistributionParams& params, std::uint64_t seed);

// Multiplicative albedo variation from summed value-noise layers.
struct SurfaceTexture {
  double amplitude = 0.0;  // relative, e.g. 0.15 -> +/-15 %
  std::vector<double> wavelengths_m;
  std::uint64_t seed = 0;

  double factor(double x, double y) const;
};

struct SurfaceHit {
  Eigen::Vector3d point;
  Eigen::Vector3d normal;
  double t = 0.0;
  int rock_id = -1;
};

// Heightmap plus hemispheroid rocks lit by a directional sun.
class TerrainScene {
 public:
  TerrainScene(Heightmap heightmap, RockField rocks, Eigen::Vector3d sun_dir, double albedo,
               SurfaceTexture texture = {});

  const Heightmap& heightmap() const { return heightmap_; }
  const RockField& rock_field() const { return rocks_; }
  const Eigen::Vector3d& sun_dir() const { return sun_dir_; }
  double albedo() const { return albedo_; }
  double albedo_at(double x, double y) const;
  double rock_base(int rock_id) const { return rock_base_[static_cast<std::size_t>(rock_id)]; }

  // Surface elevation including rocks; reports which rock (or -1) is on top.
  double height(double x, double y, int* rock_id = nullptr) const;
  Eigen::Vector3d normal(double x, double y, int rock_id) const;

  // Fixed-step march (half the grid resolution) with bisection refinement.
  std::optional<SurfaceHit> intersect(const Ray& ray) const;
  bool sun_occluded(const Eigen::Vector3d& point, const Eigen::Vector3d& normal) const;

  double top_elevation() const { return z_top_; }
  double bottom_elevation() const { return z_bottom_; }

 private:
  bool slab_interval(const Ray& ray, double& t0, double& t1) const;

  Heightmap heightmap_;
  RockField rocks_;
  Eigen::Vector3d sun_dir_;
  double albedo_;
  SurfaceTexture texture_;

  std::vector<double> rock_base_;
  double cell_size_ = 1.0;
  int cells_x_ = 1;
  int cells_y_ = 1;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_rocks_;
  double z_top_ = 0.0;
  double z_bottom_ = 0.0;
};

struct RenderResult {
  Image image;
  Raster<std::uint8_t> no_hit;    // 1 where the ray missed the terrain
  Raster<std::uint8_t> occluded;  // 1 where the sun ray is blocked
  Raster<std::uint8_t> unlit;     // 1 where occluded or facing away from the sun
  Raster<std::int32_t> rock_id;   // rock hit by the pixel ray, -1 for terrain
};

// intensity = albedo * max(0, n.s) * 255, zero where the sun is occluded.
RenderResult render(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                    const ParallelOptions& parallel = {});

struct TruthSample {
  int row = 0;
  int col = 0;
  Eigen::Vector3d point;
};

// rows x cols rays spanning the image edge to edge; misses are omitted.
std::vector<TruthSample> ground_truth_cloud(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                                            int rows, int cols, const ParallelOptions& parallel = {});
// Same sampling restricted to a pixel rectangle (edges inclusive).
std::vector<TruthSample> ground_truth_cloud(const TerrainScene& scene, const CameraModel& cam, const Pose& pose,
                                            const Rect& rect, int rows, int cols,
                                            const ParallelOptions& parallel = {});

struct TruthMaps {
  Raster<double> elevation;
  Raster<double> slope_deg;
  Raster<std::uint8_t> valid;
};

// Per-pixel truth under the camera. With stride > 1, map cell (i, j) holds
// the value at the center of image pixel (i * stride, j * stride).
TruthMaps truth_maps(const TerrainScene& scene, const CameraModel& cam, const Pose& pose, int stride = 1,
                     const ParallelOptions& parallel = {});

// Square pyramid whose four faces all have the given slope.
struct SlopedPatch {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double size_m = 50.0;
  double slope_deg = 10.0;
};

struct PlaneTilt {
  double slope_deg = 0.0;
  double azimuth_deg = 0.0;  // downhill-to-uphill direction, from +x toward +y
};

// Everything needed to synthesize a scene deterministically.
struct SceneSpec {
  std::uint64_t seed = 1;
  double size_m = 1024.0;
  double resolution_mpp = 0.5;
  std::vector<Octave> octaves;
  PlaneTilt tilt;
  std::vector<SlopedPatch> patches;
  std::optional<RockDistributionParams> rocks;
  std::vector<Rock> extra_rocks;  // placed after the random field
  Eigen::Vector3d sun_dir = Eigen::Vector3d::UnitZ();
  double albedo = 0.6;
  SurfaceTexture texture;
};

Eigen::Vector3d sun_from_angles(double elevation_deg, double azimuth_deg);

// Desk-scale lunar default: 1024 m at 0.5 mpp, gentle octaves, sparse rocks,
// 30 degree sun, regolith-like albedo texture.
SceneSpec default_scene_spec();

TerrainScene build_scene(const SceneSpec& spec);

// Constant-altitude approach toward `target` along -x: capture 1 at
// (target.x + downrange, target.y, target.z + altitude), capture 2 after
// ground_speed * interval of travel. Both cameras stay pointed at the
// target; range is the truth laser range along each boresight.
struct TrajectorySpec {
  double altitude_m = 400.0;
  double downrange_m = 400.0;
  double ground_speed_mps = 13.0;
  double capture_interval_s = 2.4;
  double start_time_s = 0.0;
  Eigen::Vector3d target = Eigen::Vector3d::Zero();

  void validate() const;
};

// Throws InvalidArgument when a boresight misses the terrain.
std::array<NavRecord, 2> make_trajectory(const TrajectorySpec& spec, const TerrainScene& scene);

void write_truth_cloud_csv(const std::filesystem::path& path, std::span<const TruthSample> samples);
std::vector<TruthSample> read_truth_cloud_csv(const std::filesystem::path& path);
// row,col,value for valid cells; row/col are image pixel indices.
void write_map_csv(const std::filesystem::path& path, const Raster<double>& values,
                   const Raster<std::uint8_t>& valid, int stride = 1);

}  // namespace hda

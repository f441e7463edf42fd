#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hda/camera.hpp"
#include "hda/parallel.hpp"

namespace hda {

// Boresight: translation along the camera-1 optical axis, attitude held.
// Lateral: horizontal translation toward the target at constant altitude,
// camera re-pointed at the target.
enum class Motion { Boresight, Lateral };
std::string_view to_string(Motion motion);

struct McConfig {
  std::vector<Motion> motions{Motion::Lateral, Motion::Boresight};
  std::vector<double> baselines_m{0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  std::vector<double> pixel_noise_px{0.0, 0.25, 0.5, 1.0, 1.5, 2.0};
  int n_trials = 500;
  int n_features = 200;
  double altitude_m = 400.0;
  double look_angle_deg = 45.0;
  double truth_slope_deg = 5.0;
  double patch_size_m = 10.0;
  CameraModel camera = default_camera();
  std::uint64_t seed = 1;

  void validate() const;
};

struct McCell {
  Motion motion = Motion::Lateral;
  double baseline_m = 0.0;
  double noise_px = 0.0;
};

// Slope error of one trial in degrees; +infinity when the geometry is
// degenerate (zero baseline, too few points, collinear cloud).
double run_trial(const McConfig& config, const McCell& cell, std::uint64_t seed);

struct McCellResult {
  McCell cell;
  std::vector<double> errors_deg;  // n_trials samples, trial order
  double median_err_deg = 0.0;
  double p95_err_deg = 0.0;
  int n_degenerate = 0;
};

struct McResult {
  std::vector<McCellResult> cells;  // motion-major, then baseline, then noise
};

McResult sweep(const McConfig& config, const ParallelOptions& parallel = {});

// Median and 95th percentile (rank ceil(0.95 * (n - 1))) of the samples;
// infinite samples count toward the order statistics.
void summarize(McCellResult& cell);

// motion,baseline_m,noise_px,median_err_deg,p95_err_deg,n_degenerate
void write_mc_csv(const std::filesystem::path& path, const McResult& result);

}  // namespace hda

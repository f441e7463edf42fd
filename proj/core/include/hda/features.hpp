#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hda/camera.hpp"
#include "hda/image.hpp"

namespace hda {

using Descriptor = std::array<std::uint64_t, 4>;  // 256 bits

int hamming(const Descriptor& a, const Descriptor& b);

struct Keypoint {
  Eigen::Vector2d px = Eigen::Vector2d::Zero();  // full-image continuous coordinates
  float response = 0.0F;                         // Harris score
  float orientation = 0.0F;                      // radians
  int octave = 0;
  Descriptor descriptor{};
};

struct OrbParams {
  int max_keypoints = 500;
  int levels = 4;
  double scale_factor = 1.25;
  float fast_threshold = 6.0F;
  double harris_k = 0.04;
};

// Oriented FAST corners scored by Harris, intensity-centroid orientation and
// steered binary descriptors over a 31 px patch, on a scale pyramid built
// around `roi`. Only corners inside `roi` are returned, strongest first.
std::vector<Keypoint> detect_and_describe(const Image& image, const Rect& roi, const OrbParams& params = {});

struct Match {
  int idx1 = 0;
  int idx2 = 0;
  int hamming = 0;
  double epipolar_residual_px = 0.0;
};

// Nearest/second-nearest ratio test (best < ratio * second) with optional
// mutual-best cross-check. Output is ordered by idx1.
std::vector<Match> match(std::span<const Descriptor> desc1, std::span<const Descriptor> desc2, double ratio,
                         bool cross_check = true);
std::vector<Descriptor> descriptors_of(std::span<const Keypoint> keypoints);

// RMS of the two point-to-epipolar-line distances, pixels.
double symmetric_epipolar_distance(const Eigen::Matrix3d& fundamental, const Eigen::Vector2d& x1,
                                   const Eigen::Vector2d& x2);

// Normalized eight-point estimate (rank 2 enforced). Needs >= 8 pairs.
Eigen::Matrix3d fundamental_eight_point(std::span<const Eigen::Vector2d> x1, std::span<const Eigen::Vector2d> x2);

// F = K^-T [t21]x R K^-1 from a known relative pose.
Eigen::Matrix3d fundamental_from_motion(const RelativePose& rel, const CameraModel& cam);

struct RansacParams {
  double threshold_px = 1.5;
  int max_iters = 500;
  std::uint64_t seed = 7;
};

struct RansacOutcome {
  std::vector<Match> inliers;
  Eigen::Matrix3d fundamental = Eigen::Matrix3d::Zero();
  int iterations = 0;
};

// Consensus on a fundamental matrix. Throws TooFewMatches below 8 matches.
// Survivors keep their input order.
RansacOutcome ransac_reject(std::span<const Match> matches, std::span<const Keypoint> kps1,
                            std::span<const Keypoint> kps2, const RansacParams& params = {});

// Removes matches whose symmetric epipolar distance under the navigation
// geometry is >= threshold_px. Throws ZeroBaseline for a zero baseline.
std::vector<Match> nav_epipolar_reject(std::span<const Match> matches, std::span<const Keypoint> kps1,
                                       std::span<const Keypoint> kps2, const RelativePose& rel,
                                       const CameraModel& cam, double threshold_px);

struct RefineParams {
  int half_window = 7;
  int max_iterations = 30;
  double max_shift_px = 2.0;
  double min_eigenvalue = 2.0;     // mean squared gradient, smallest axis
  double max_warp_change = 0.2;    // allowed drift of the affine part from its prediction
  double max_residual = 0.25;      // final RMS residual over template stddev
};

struct RefinedMatches {
  std::vector<Match> matches;
  std::vector<Keypoint> kps2;  // copy of kps2 with refined positions
};

// Image-1 to image-2 Jacobian (2x2) of the mapping induced by a terrain
// plane through the boresight point at range_m, at image-1 pixel px1.
Eigen::Matrix2d plane_induced_jacobian(const Eigen::Vector2d& px1, const RelativePose& rel, const CameraModel& cam,
                                       double range_m, const Eigen::Vector3d& plane_normal_cam1);

using WarpPredictor = std::function<Eigen::Matrix2d(const Eigen::Vector2d& px1)>;

// Affine Lucas-Kanade alignment of each image-2 keypoint onto the image-1
// patch around its match, starting from the predicted local warp (identity
// when none is given). Matches that do not converge are dropped; survivors
// keep their order.
RefinedMatches refine_matches(const ImageF& image1, const ImageF& image2, std::span<const Match> matches,
                              std::span<const Keypoint> kps1, std::span<const Keypoint> kps2,
                              const RefineParams& params = {}, const WarpPredictor& warp = {});

// Debug dumps for overlay plotting.
void write_keypoints_csv(const std::filesystem::path& path, std::span<const Keypoint> keypoints);
void write_matches_csv(const std::filesystem::path& path, std::span<const Match> matches,
                       std::span<const Keypoint> kps1, std::span<const Keypoint> kps2);

}  // namespace hda

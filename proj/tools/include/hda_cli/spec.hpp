#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hda/camera.hpp"
#include "hda/montecarlo.hpp"
#include "hda/pipeline.hpp"
#include "hda/scene.hpp"

namespace hda::cli {

// Schema violation; the message starts with the JSON path of the field.
class SpecError : public std::runtime_error {
 public:
  SpecError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct GenerateOptions {
  int truth_cloud_rows = 64;
  int truth_cloud_cols = 64;
  int truth_map_stride = 4;
};

struct ProfileSpec {
  std::vector<int> sizes_px{1024, 2048};
  int reps = 3;
};

// Everything one experiment needs. Paths are resolved against the directory
// of the spec file.
struct ExperimentSpec {
  std::uint64_t seed = 1;
  SceneSpec scene = default_scene_spec();
  CameraModel camera = default_camera();
  TrajectorySpec trajectory;
  std::optional<std::filesystem::path> trajectory_nav;  // explicit nav records instead of the generator
  std::optional<std::filesystem::path> image1;
  std::optional<std::filesystem::path> image2;
  std::optional<std::filesystem::path> nav;
  HdaConfig hda;
  McConfig mc;
  ProfileSpec profile;
  GenerateOptions generate;
  unsigned threads = 0;
  std::filesystem::path output_dir = "out";

  // Propagates the master seed to every consumer of randomness.
  void set_seed(std::uint64_t value);
  // Copies the camera model into the pipeline and Monte Carlo configs.
  void set_camera(const CameraModel& cam);
};

ExperimentSpec parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentSpec load_experiment(const std::filesystem::path& file);

}  // namespace hda::cli

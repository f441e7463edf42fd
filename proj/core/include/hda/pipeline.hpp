#pragma once

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hda/camera.hpp"
#include "hda/features.hpp"
#include "hda/image.hpp"
#include "hda/quadtree.hpp"
#include "hda/sfm.hpp"

namespace hda {

struct HdaConfig {
  CameraModel camera = default_camera();
  QuadtreeCriteria quadtree;
  OrbParams orb;
  double match_ratio = 0.75;
  bool cross_check = true;
  RansacParams ransac;
  double nav_threshold_px = 2.0;
  bool refine = true;
  RefineParams refine_params;
  double roi_margin = 0.25;
  double min_parallax_deg = 0.2;
  SiteLimits limits;
  RankWeights weights;
  double budget_total_s = 15.0;
  double budget_quadtree_s = 4.0;
  double budget_sfm_s = 10.0;
  // Measured durations are multiplied by this before budget checks, to
  // emulate slower flight hardware on a desk machine.
  double budget_time_scale = 1.0;
  Eigen::Vector3d ils_position = Eigen::Vector3d::Zero();
  bool keep_debug = false;  // retain keypoints and matches per ROI

  void validate() const;
  // Sets the total budget and scales the stage budgets by the same factor.
  void set_total_budget(double seconds);
  void set_unlimited_budget();
};

enum class HdaStatus { Complete, PartialBudget, NoSafeSite, Failed };
std::string_view to_string(HdaStatus status);

struct StageTiming {
  double quadtree_s = 0.0;
  double prediction_s = 0.0;
  double features_s = 0.0;  // detection, matching, rejection, refinement
  double triangulation_s = 0.0;
  double ranking_s = 0.0;
  double sfm_s = 0.0;  // all per-ROI work
  double total_s = 0.0;
};

struct RoiTrace {
  Roi roi;
  Rect predicted;
  double predicted_distance_m = 0.0;
  int keypoints1 = 0;
  int keypoints2 = 0;
  int matches = 0;
  int after_ransac = 0;
  bool ransac_skipped = false;
  int after_nav = 0;
  int after_refine = 0;
  int points = 0;
  std::string note;
  double duration_s = 0.0;
  // Populated only with keep_debug.
  std::vector<Keypoint> kps1;
  std::vector<Keypoint> kps2;
  std::vector<Match> final_matches;
  std::vector<Eigen::Vector3d> cloud;
};

struct HdaResult {
  HdaStatus status = HdaStatus::Failed;
  std::string failure_reason;
  std::vector<SiteAssessment> assessments;  // ranked safe sites, then unsafe
  StageTiming timing;
  bool kicked_out = false;
  int rois_processed = 0;
  int rois_skipped = 0;
  Decomposition decomposition;
  std::vector<int> processing_order;  // ROI indices, nearest to the ILS first
  std::vector<RoiTrace> traces;       // processed ROIs in processing order

  int safe_count() const;
};

// Full two-image hazard assessment. Never throws for bad content; input
// problems come back as status Failed with a reason.
HdaResult run_hda(const Image& image1, const NavRecord& nav1, const Image& image2, const NavRecord& nav2,
                  const HdaConfig& config);

// stage,seconds rows for one run.
void write_timing_csv(const std::filesystem::path& path, const HdaResult& result);

struct ImagePair {
  std::string label;
  Image image1;
  NavRecord nav1;
  Image image2;
  NavRecord nav2;
};

struct StageStats {
  double min_s = 0.0;
  double median_s = 0.0;
  double max_s = 0.0;
};

struct ProfileRow {
  std::string label;
  int width = 0;
  int height = 0;
  std::vector<double> quadtree_samples;
  std::vector<double> sfm_samples;
  std::vector<double> total_samples;

  StageStats quadtree() const;
  StageStats sfm() const;
  StageStats total() const;
};

// Runs every pair `repetitions` times with an unlimited budget.
std::vector<ProfileRow> profile_run(std::span<const ImagePair> pairs, const HdaConfig& config, int repetitions);

StageStats stage_stats(std::vector<double> samples);

// pair,width,height,reps,quadtree_{min,median,max}_s,sfm_{...}_s,total_{...}_s
void write_profile_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows);
// pair,rep,quadtree_s,sfm_s,total_s
void write_profile_samples_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows);

}  // namespace hda

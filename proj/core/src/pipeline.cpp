#include "hda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hda/error.hpp"
#include "hda/io.hpp"

namespace hda {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void HdaConfig::validate() const {
  camera.validate();
  quadtree.validate();
  if (!(match_ratio > 0.0 && match_ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "match_ratio must be in (0, 1)");
  if (!(nav_threshold_px > 0.0)) throw Error(ErrorCode::InvalidArgument, "nav_threshold_px must be > 0");
  if (!(ransac.threshold_px > 0.0) || ransac.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "ransac threshold and iterations must be positive");
  }
  if (orb.max_keypoints < 0 || orb.levels < 1 || !(orb.scale_factor > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid ORB parameters");
  }
  if (!(roi_margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "roi_margin must be >= 0");
  if (!(min_parallax_deg >= 0.0)) throw Error(ErrorCode::InvalidArgument, "min_parallax_deg must be >= 0");
  if (!(budget_total_s > 0.0 && budget_quadtree_s > 0.0 && budget_sfm_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "budgets must be > 0");
  }
  if (budget_quadtree_s + budget_sfm_s > budget_total_s * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "budget_quadtree_s + budget_sfm_s exceeds budget_total_s");
  }
  if (!(budget_time_scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "budget_time_scale must be > 0");
  if (!(limits.slope_deg > 0.0 && limits.roughness_m > 0.0 && limits.area_m2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "site limits must be > 0");
  }
}

void HdaConfig::set_total_budget(double seconds) {
  const double factor = seconds / budget_total_s;
  budget_total_s = seconds;
  budget_quadtree_s *= factor;
  budget_sfm_s *= factor;
}

void HdaConfig::set_unlimited_budget() {
  budget_total_s = std::numeric_limits<double>::max();
  budget_quadtree_s = budget_total_s / 4;
  budget_sfm_s = budget_total_s / 4;
}

std::string_view to_string(HdaStatus status) {
  switch (status) {
    case HdaStatus::Complete: return "Complete";
    case HdaStatus::PartialBudget: return "PartialBudget";
    case HdaStatus::NoSafeSite: return "NoSafeSite";
    case HdaStatus::Failed: return "Failed";
  }
  return "Unknown";
}

int HdaResult::safe_count() const {
  return static_cast<int>(std::count_if(assessments.begin(), assessments.end(),
                                        [](const SiteAssessment& s) { return s.safe; }));
}

namespace {

struct Inputs {
  RelativePose rel;
  Eigen::Vector3d up_cam1;
  double look = 0.0;
};

Inputs check_inputs(const Image& image1, const NavRecord& nav1, const Image& image2, const NavRecord& nav2,
                    const HdaConfig& config) {
  config.validate();
  if (image1.empty() || image2.empty()) throw Error(ErrorCode::InvalidArgument, "empty image");
  if (image1.width() != image2.width() || image1.height() != image2.height()) {
    throw Error(ErrorCode::InvalidArgument, "images differ in size");
  }
  if (image1.width() != config.camera.width_px || image1.height() != config.camera.height_px) {
    throw Error(ErrorCode::InvalidArgument, "image size does not match the camera model");
  }
  if (!nav1.valid() || !nav2.valid()) throw Error(ErrorCode::InvalidArgument, "invalid navigation record");
  if (!(nav2.time > nav1.time)) throw Error(ErrorCode::InvalidArgument, "nav2.time must exceed nav1.time");
  Inputs in;
  in.rel = relative_motion(nav1, nav2);
  if (!(in.rel.baseline_m > 0.0)) throw Error(ErrorCode::ZeroBaseline, "no motion between captures");
  in.up_cam1 = nav1.pose.attitude * (-nav1.gravity_dir.normalized());
  in.look = look_angle(nav1);
  return in;
}

}  // namespace

HdaResult run_hda(const Image& image1, const NavRecord& nav1, const Image& image2, const NavRecord& nav2,
                  const HdaConfig& config) {
  const auto start = Clock::now();
  HdaResult result;
  Inputs in;
  try {
    in = check_inputs(image1, nav1, image2, nav2, config);
  } catch (const Error& e) {
    result.status = HdaStatus::Failed;
    result.failure_reason = e.what();
    result.timing.total_s = seconds_since(start);
    return result;
  }
  const CameraModel& cam = config.camera;
  const double scale = config.budget_time_scale;

  const auto qt_start = Clock::now();
  result.decomposition = decompose(image1, config.quadtree, nav1.range_m, cam, in.look);
  result.timing.quadtree_s = seconds_since(qt_start);

  // Sites nearest the ILS are processed first.
  const auto& rois = result.decomposition.rois;
  std::vector<double> predicted_distance(rois.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const Rect& r = rois[i].rect;
    const Eigen::Vector2d center(r.x0 + 0.5 * r.width, r.y0 + 0.5 * r.height);
    if (auto ground = intersect_range_plane(cam, center, nav1.range_m, in.up_cam1)) {
      predicted_distance[i] = (nav1.pose.to_world(*ground) - config.ils_position).norm();
    }
  }
  std::vector<std::size_t> order(rois.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return predicted_distance[a] < predicted_distance[b]; });
  for (std::size_t i : order) result.processing_order.push_back(rois[i].index);

  ImageF f1, f2;
  if (config.refine) {
    f1 = to_float(image1);
    f2 = to_float(image2);
  }

  std::vector<SiteAssessment> sites;
  const bool quadtree_over = result.timing.quadtree_s * scale > config.budget_quadtree_s;
  double sfm_elapsed = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (quadtree_over || seconds_since(start) * scale > config.budget_total_s ||
        sfm_elapsed * scale > config.budget_sfm_s) {
      result.kicked_out = true;
      result.rois_skipped = static_cast<int>(order.size() - k);
      break;
    }
    const auto roi_start = Clock::now();
    const Roi& roi = rois[order[k]];
    RoiTrace trace;
    trace.roi = roi;
    trace.predicted_distance_m = predicted_distance[order[k]];
    const Footprint fp = footprint_of(roi.rect, nav1.range_m, cam, in.look);
    PointCloud cloud;
    cloud.source_roi = roi.index;

    try {
      auto t = Clock::now();
      const Roi predicted = predict_roi(roi, in.rel, cam, nav1.range_m, config.roi_margin, in.up_cam1);
      trace.predicted = predicted.rect;
      result.timing.prediction_s += seconds_since(t);

      t = Clock::now();
      const std::vector<Keypoint> kps1 = detect_and_describe(image1, roi.rect, config.orb);
      std::vector<Keypoint> kps2 = detect_and_describe(image2, predicted.rect, config.orb);
      trace.keypoints1 = static_cast<int>(kps1.size());
      trace.keypoints2 = static_cast<int>(kps2.size());
      std::vector<Match> matches =
          match(descriptors_of(kps1), descriptors_of(kps2), config.match_ratio, config.cross_check);
      trace.matches = static_cast<int>(matches.size());
      try {
        matches = ransac_reject(matches, kps1, kps2, config.ransac).inliers;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooFewMatches) throw;
        trace.ransac_skipped = true;
      }
      trace.after_ransac = static_cast<int>(matches.size());
      matches = nav_epipolar_reject(matches, kps1, kps2, in.rel, cam, config.nav_threshold_px);
      trace.after_nav = static_cast<int>(matches.size());
      if (config.refine) {
        const WarpPredictor warp = [&](const Eigen::Vector2d& px) {
          return plane_induced_jacobian(px, in.rel, cam, nav1.range_m, in.up_cam1);
        };
        RefinedMatches refined = refine_matches(f1, f2, matches, kps1, kps2, config.refine_params, warp);
        matches = std::move(refined.matches);
        kps2 = std::move(refined.kps2);
      }
      trace.after_refine = static_cast<int>(matches.size());
      result.timing.features_s += seconds_since(t);

      t = Clock::now();
      if (!matches.empty()) {
        cloud = triangulate(matches, kps1, kps2, nav1.pose, in.rel, cam, config.min_parallax_deg);
        cloud.source_roi = roi.index;
      } else {
        trace.note = "no surviving matches";
      }
      if (config.keep_debug) {
        trace.kps1 = kps1;
        trace.kps2 = kps2;
        trace.final_matches = matches;
      }
      result.timing.triangulation_s += seconds_since(t);
    } catch (const Error& e) {
      trace.note = e.what();
    }

    SiteAssessment site =
        assess_site(cloud, fp.cross_range_m * fp.down_range_m, nav1.gravity_dir, config.ils_position, config.limits);
    if (cloud.points.empty()) site.distance_to_ils_m = trace.predicted_distance_m;
    sites.push_back(site);
    trace.points = static_cast<int>(cloud.points.size());
    if (config.keep_debug) trace.cloud = cloud.points;
    trace.duration_s = seconds_since(roi_start);
    sfm_elapsed += trace.duration_s;
    result.traces.push_back(std::move(trace));
    ++result.rois_processed;
  }
  result.timing.sfm_s = sfm_elapsed;

  const auto rank_start = Clock::now();
  result.assessments = assess_and_rank(std::move(sites), config.limits, config.weights);
  result.timing.ranking_s = seconds_since(rank_start);

  if (result.kicked_out) {
    result.status = HdaStatus::PartialBudget;
  } else if (result.safe_count() == 0) {
    result.status = HdaStatus::NoSafeSite;
  } else {
    result.status = HdaStatus::Complete;
  }
  result.timing.total_s = seconds_since(start);
  return result;
}

void write_timing_csv(const std::filesystem::path& path, const HdaResult& r) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "stage,seconds\n";
  const StageTiming& t = r.timing;
  const std::pair<const char*, double> rows[] = {
      {"quadtree", t.quadtree_s},         {"prediction", t.prediction_s}, {"features", t.features_s},
      {"triangulation", t.triangulation_s}, {"ranking", t.ranking_s},     {"sfm", t.sfm_s},
      {"total", t.total_s}};
  for (const auto& [name, s] : rows) out << name << ',' << fmt_double(s) << '\n';
}

StageStats stage_stats(std::vector<double> samples) {
  if (samples.empty()) return {};
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  return {samples.front(), median, samples.back()};
}

StageStats ProfileRow::quadtree() const { return stage_stats(quadtree_samples); }
StageStats ProfileRow::sfm() const { return stage_stats(sfm_samples); }
StageStats ProfileRow::total() const { return stage_stats(total_samples); }

std::vector<ProfileRow> profile_run(std::span<const ImagePair> pairs, const HdaConfig& config, int repetitions) {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "profiling needs at least one image pair");
  if (repetitions < 1) throw Error(ErrorCode::InvalidArgument, "repetitions must be >= 1");
  HdaConfig cfg = config;
  cfg.set_unlimited_budget();
  cfg.keep_debug = false;
  std::vector<ProfileRow> rows;
  for (const ImagePair& pair : pairs) {
    ProfileRow row;
    row.label = pair.label;
    row.width = pair.image1.width();
    row.height = pair.image1.height();
    cfg.camera = config.camera;
    if (cfg.camera.width_px != row.width || cfg.camera.height_px != row.height) {
      // Same optics, different sensor: keep the field of view.
      cfg.camera = CameraModel::from_hfov(row.width, row.height, config.camera.hfov_deg());
    }
    for (int rep = 0; rep < repetitions; ++rep) {
      const HdaResult r = run_hda(pair.image1, pair.nav1, pair.image2, pair.nav2, cfg);
      if (r.status == HdaStatus::Failed) throw Error(ErrorCode::InvalidArgument, pair.label + ": " + r.failure_reason);
      row.quadtree_samples.push_back(r.timing.quadtree_s);
      row.sfm_samples.push_back(r.timing.sfm_s);
      row.total_samples.push_back(r.timing.total_s);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_profile_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "pair,width,height,reps,quadtree_min_s,quadtree_median_s,quadtree_max_s,sfm_min_s,sfm_median_s,"
         "sfm_max_s,total_min_s,total_median_s,total_max_s\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.width << ',' << r.height << ',' << r.quadtree_samples.size();
    for (const StageStats& s : {r.quadtree(), r.sfm(), r.total()}) {
      out << ',' << fmt_fixed(s.min_s, 4) << ',' << fmt_fixed(s.median_s, 4) << ',' << fmt_fixed(s.max_s, 4);
    }
    out << '\n';
  }
}

void write_profile_samples_csv(const std::filesystem::path& path, std::span<const ProfileRow> rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "pair,rep,quadtree_s,sfm_s,total_s\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.quadtree_samples.size(); ++i) {
      out << r.label << ',' << i << ',' << fmt_fixed(r.quadtree_samples[i], 4) << ','
          << fmt_fixed(r.sfm_samples[i], 4) << ',' << fmt_fixed(r.total_samples[i], 4) << '\n';
    }
}

}  // namespace hda

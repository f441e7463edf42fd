#include "hda_cli/commands.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "hda/error.hpp"
#include "hda/io.hpp"

namespace hda::cli {

namespace fs = std::filesystem;

namespace {

std::array<NavRecord, 2> trajectory_for(const ExperimentSpec& spec, const TerrainScene& scene) {
  if (!spec.trajectory_nav) return make_trajectory(spec.trajectory, scene);
  const auto records = read_nav_csv(*spec.trajectory_nav);
  if (records.size() < 2) {
    throw Error(ErrorCode::Parse, spec.trajectory_nav->string() + ": need two nav records");
  }
  return {records[0], records[1]};
}

Image mask_image(const Raster<std::uint8_t>& mask) {
  Image out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(x, y) = mask(x, y) ? 255 : 0;
  return out;
}

Image rock_mask_image(const Raster<std::int32_t>& ids) {
  Image out(ids.width(), ids.height());
  for (int y = 0; y < ids.height(); ++y)
    for (int x = 0; x < ids.width(); ++x) out(x, y) = ids(x, y) >= 0 ? 255 : 0;
  return out;
}

std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  return text;
}

void write_traces_csv(const fs::path& path, const HdaResult& result) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "order,roi,x0,y0,size_px,pred_x0,pred_y0,pred_width,pred_height,pred_dist_m,keypoints1,keypoints2,"
         "matches,after_ransac,ransac_skipped,after_nav,after_refine,points,note\n";
  int order = 0;
  for (const RoiTrace& t : result.traces) {
    const Rect& r = t.roi.rect;
    const Rect& p = t.predicted;
    out << order++ << ',' << t.roi.index << ',' << r.x0 << ',' << r.y0 << ',' << r.width << ',' << p.x0 << ','
        << p.y0 << ',' << p.width << ',' << p.height << ',' << fmt_double(t.predicted_distance_m) << ','
        << t.keypoints1 << ',' << t.keypoints2 << ',' << t.matches << ',' << t.after_ransac << ','
        << (t.ransac_skipped ? 1 : 0) << ',' << t.after_nav << ',' << t.after_refine << ',' << t.points << ','
        << csv_safe(t.note) << '\n';
  }
}

void write_debug_dumps(const fs::path& dir, const HdaResult& result) {
  fs::create_directories(dir);
  for (const RoiTrace& t : result.traces) {
    const std::string stem = "roi_" + std::to_string(t.roi.index);
    write_keypoints_csv(dir / (stem + "_keypoints1.csv"), t.kps1);
    write_keypoints_csv(dir / (stem + "_keypoints2.csv"), t.kps2);
    write_matches_csv(dir / (stem + "_matches.csv"), t.final_matches, t.kps1, t.kps2);
    std::vector<TruthSample> cloud;
    cloud.reserve(t.cloud.size());
    for (std::size_t i = 0; i < t.cloud.size(); ++i) cloud.push_back({static_cast<int>(i), t.roi.index, t.cloud[i]});
    write_truth_cloud_csv(dir / (stem + "_cloud.csv"), cloud);
  }
}

fs::path input_or_default(const std::optional<fs::path>& given, const fs::path& out_dir, const char* name) {
  return given ? *given : out_dir / name;
}

}  // namespace

void apply_overrides(ExperimentSpec& spec, const Overrides& overrides) {
  if (overrides.out) spec.output_dir = *overrides.out;
  if (overrides.seed) spec.set_seed(*overrides.seed);
  if (overrides.threads) spec.threads = *overrides.threads;
  if (overrides.reps) spec.profile.reps = *overrides.reps;
}

int exit_code_for(const HdaResult& result) {
  switch (result.status) {
    case HdaStatus::Failed:
      return kExitFailure;
    case HdaStatus::NoSafeSite:
      return kExitNoSafeSite;
    case HdaStatus::Complete:
    case HdaStatus::PartialBudget:
      return result.safe_count() > 0 ? kExitOk : kExitNoSafeSite;
  }
  return kExitFailure;
}

int cmd_generate(const ExperimentSpec& spec, std::ostream& log, std::ostream& err) {
  try {
    const ParallelOptions parallel{spec.threads};
    fs::create_directories(spec.output_dir);
    const TerrainScene scene = build_scene(spec.scene);
    const auto navs = trajectory_for(spec, scene);
    const CameraModel& cam = spec.camera;

    const RenderResult r1 = render(scene, cam, navs[0].pose, parallel);
    const RenderResult r2 = render(scene, cam, navs[1].pose, parallel);
    write_pgm(spec.output_dir / "image1.pgm", r1.image);
    write_pgm(spec.output_dir / "image2.pgm", r2.image);
    write_nav_csv(spec.output_dir / "nav.csv", navs);

    const auto cloud = ground_truth_cloud(scene, cam, navs[0].pose, spec.generate.truth_cloud_rows,
                                          spec.generate.truth_cloud_cols, parallel);
    write_truth_cloud_csv(spec.output_dir / "truth_cloud.csv", cloud);

    const int stride = spec.generate.truth_map_stride;
    const TruthMaps maps = truth_maps(scene, cam, navs[0].pose, stride, parallel);
    write_map_csv(spec.output_dir / "truth_elevation.csv", maps.elevation, maps.valid, stride);
    write_map_csv(spec.output_dir / "truth_slope.csv", maps.slope_deg, maps.valid, stride);
    write_pgm(spec.output_dir / "shadow_mask.pgm", mask_image(r1.unlit));
    write_pgm(spec.output_dir / "rock_mask.pgm", rock_mask_image(r1.rock_id));

    log << "generated " << cam.width_px << "x" << cam.height_px << " pair, baseline "
        << fmt_fixed((navs[1].pose.position - navs[0].pose.position).norm(), 2) << " m, range "
        << fmt_fixed(navs[0].range_m, 1) << " m, " << scene.rock_field().rocks.size() << " rocks -> "
        << spec.output_dir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_run(const ExperimentSpec& spec, bool debug_dumps, std::ostream& log, std::ostream& err) {
  HdaResult result;
  try {
    const fs::path image1_path = input_or_default(spec.image1, spec.output_dir, "image1.pgm");
    const fs::path image2_path = input_or_default(spec.image2, spec.output_dir, "image2.pgm");
    const fs::path nav_path = input_or_default(spec.nav, spec.output_dir, "nav.csv");
    for (const fs::path& p : {image1_path, image2_path, nav_path}) {
      if (!fs::exists(p)) {
        err << "error: missing input " << p.string() << '\n';
        return kExitFailure;
      }
    }
    const Image image1 = read_pgm(image1_path);
    const Image image2 = read_pgm(image2_path);
    const auto navs = read_nav_csv(nav_path);
    if (navs.size() < 2) {
      err << "error: " << nav_path.string() << ": need two nav records\n";
      return kExitFailure;
    }

    HdaConfig config = spec.hda;
    config.keep_debug = debug_dumps;
    result = run_hda(image1, navs[0], image2, navs[1], config);

    fs::create_directories(spec.output_dir);
    write_assessment_csv(spec.output_dir / "result.csv", result.assessments);
    write_timing_csv(spec.output_dir / "timing.csv", result);
    write_roi_csv(spec.output_dir / "rois.csv", result.decomposition);
    write_traces_csv(spec.output_dir / "traces.csv", result);
    if (debug_dumps) write_debug_dumps(spec.output_dir / "debug", result);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  log << "status: " << to_string(result.status) << '\n';
  if (result.status == HdaStatus::Failed) {
    err << "error: " << result.failure_reason << '\n';
    return kExitFailure;
  }
  log << "rois: " << result.decomposition.rois.size() << " accepted, " << result.rois_processed << " processed, "
      << result.rois_skipped << " skipped" << (result.kicked_out ? ", kicked out" : "") << '\n';
  log << "safe sites: " << result.safe_count() << '\n';
  if (!result.assessments.empty() && result.assessments.front().safe) {
    const SiteAssessment& best = result.assessments.front();
    log << "rank 1: roi " << best.roi << ", slope " << fmt_fixed(best.slope_deg, 2) << " deg, roughness "
        << fmt_fixed(best.roughness_m, 3) << " m, " << best.n_points << " points, "
        << fmt_fixed(best.distance_to_ils_m, 1) << " m from ILS\n";
  }
  log << "total " << fmt_fixed(result.timing.total_s, 3) << " s\n";
  const int code = exit_code_for(result);
  if (code == kExitNoSafeSite) err << "no safe landing site found\n";
  return code;
}

int cmd_mc(const ExperimentSpec& spec, std::ostream& log, std::ostream& err) {
  try {
    fs::create_directories(spec.output_dir);
    const McResult result = sweep(spec.mc, ParallelOptions{spec.threads});
    write_mc_csv(spec.output_dir / "mc.csv", result);
    log << "motion      baseline_m  noise_px  median_deg  p95_deg\n";
    for (const McCellResult& c : result.cells) {
      std::string motion(to_string(c.cell.motion));
      motion.resize(12, ' ');
      log << motion << fmt_fixed(c.cell.baseline_m, 1) << "\t" << fmt_fixed(c.cell.noise_px, 2) << "\t"
          << fmt_fixed(c.median_err_deg, 3) << "\t" << fmt_fixed(c.p95_err_deg, 3) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_profile(const ExperimentSpec& spec, std::ostream& log, std::ostream& err) {
  try {
    const ParallelOptions parallel{spec.threads};
    fs::create_directories(spec.output_dir);
    const TerrainScene scene = build_scene(spec.scene);
    const auto navs = trajectory_for(spec, scene);

    std::vector<ImagePair> pairs;
    for (int size : spec.profile.sizes_px) {
      const CameraModel cam = CameraModel::from_hfov(size, size, spec.camera.hfov_deg());
      ImagePair pair;
      pair.label = std::to_string(size) + "x" + std::to_string(size);
      pair.nav1 = navs[0];
      pair.nav2 = navs[1];
      pair.image1 = render(scene, cam, navs[0].pose, parallel).image;
      pair.image2 = render(scene, cam, navs[1].pose, parallel).image;
      pairs.push_back(std::move(pair));
    }

    const auto rows = profile_run(pairs, spec.hda, spec.profile.reps);
    write_profile_csv(spec.output_dir / "profile.csv", rows);
    write_profile_samples_csv(spec.output_dir / "profile_samples.csv", rows);
    log << "pair         quadtree_median_s  sfm_median_s  total_median_s\n";
    for (const ProfileRow& row : rows) {
      std::string label = row.label;
      label.resize(13, ' ');
      log << label << fmt_fixed(row.quadtree().median_s, 4) << "\t\t" << fmt_fixed(row.sfm().median_s, 4) << "\t\t"
          << fmt_fixed(row.total().median_s, 4) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace hda::cli

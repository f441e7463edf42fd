// Acceptance checks. Prints one PASS/FAIL line per criterion; with numeric
// arguments only those criteria run. Exit status is non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hda/camera.hpp"
#include "hda/error.hpp"
#include "hda/io.hpp"
#include "hda/montecarlo.hpp"
#include "hda/pipeline.hpp"
#include "hda/quadtree.hpp"
#include "hda/random.hpp"
#include "hda/scene.hpp"
#include "hda/sfm.hpp"
#include "hda_cli/commands.hpp"
#include "scenes.hpp"

namespace fs = std::filesystem;
using namespace hda;
using hda::testing::render_pair;
using hda::testing::truth_site;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int digits = 3) { return fmt_fixed(v, digits); }

Eigen::Vector3d random_unit(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(1.0 - z * z);
  return {s * std::cos(a), s * std::sin(a), z};
}

NavRecord nav_at(const Pose& pose, double time) {
  NavRecord nav;
  nav.time = time;
  nav.pose = pose;
  nav.range_m = 1.0;
  nav.gravity_dir = Eigen::Vector3d(0.0, 0.0, -1.0);
  return nav;
}

// 1. Noiseless two-view triangulation recovers the true points.
Outcome criterion1() {
  Stopwatch clock;
  Rng rng(derive_seed(2024, 1));
  const CameraModel cam = default_camera();
  constexpr int kConfigs = 1000;
  constexpr int kPointsPerConfig = 20;
  double worst = 0.0;
  long long checked = 0;
  for (int c = 0; c < kConfigs; ++c) {
    const Eigen::Vector3d c1(rng.uniform(-500, 500), rng.uniform(-500, 500), rng.uniform(50, 600));
    const Eigen::Vector3d aim1(rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-20, 20));
    const Pose pose1 = Pose::look_at(c1, aim1);
    const double baseline = rng.uniform(5.0, 60.0);
    const Eigen::Vector3d c2 = c1 + baseline * random_unit(rng);

    std::vector<Eigen::Vector3d> truth;
    std::vector<Eigen::Vector2d> px1;
    for (int i = 0; i < kPointsPerConfig; ++i) {
      const Eigen::Vector2d px(rng.uniform(0.0, cam.width_px), rng.uniform(0.0, cam.height_px));
      const Ray ray = pixel_ray(cam, pose1, px);
      truth.push_back(ray.at(rng.uniform(100.0, 600.0)));
      px1.push_back(px);
    }
    // Second camera aims near the cloud so every point stays in front of it.
    const Pose pose2 = Pose::look_at(c2, truth[rng.below(truth.size())]);
    std::vector<Eigen::Vector2d> px2;
    std::vector<Eigen::Vector2d> kept1;
    std::vector<Eigen::Vector3d> kept_truth;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto p = try_project(cam, pose2, truth[i]);
      if (!p) continue;
      px2.push_back(*p);
      kept1.push_back(px1[i]);
      kept_truth.push_back(truth[i]);
    }
    const RelativePose rel = relative_motion(nav_at(pose1, 0.0), nav_at(pose2, 1.0));
    const PointCloud cloud = triangulate(kept1, px2, pose1, rel, cam, 0.0);
    if (cloud.points.size() != kept_truth.size()) {
      return {false, "config " + std::to_string(c) + " dropped points"};
    }
    for (std::size_t i = 0; i < kept_truth.size(); ++i) {
      worst = std::max(worst, (cloud.points[i] - kept_truth[i]).norm());
      ++checked;
    }
  }
  const double secs = clock.seconds();
  const bool pass = worst <= 1e-6 && secs < 10.0 && checked >= kConfigs;
  std::ostringstream os;
  os << kConfigs << " configs, " << checked << " points, max error " << std::scientific << worst
     << " m (limit 1e-6), " << std::fixed << num(secs, 2) << " s (limit 10)";
  return {pass, os.str()};
}

// 2. Slope accuracy with pixel noise on rendered-scale geometry.
Outcome criterion2() {
  Stopwatch clock;
  const CameraModel cam = default_camera();
  const Eigen::Vector3d gravity(0.0, 0.0, -1.0);
  constexpr int kScenes = 20;
  constexpr double kNoisePx = 0.5;
  std::vector<double> err_dense;
  std::vector<double> err_sparse;
  for (int s = 0; s < kScenes; ++s) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(s)));
    SceneSpec spec = default_scene_spec();
    spec.seed = static_cast<std::uint64_t>(s) + 1;
    spec.size_m = 300.0;
    spec.octaves.clear();
    spec.rocks.reset();
    spec.tilt.slope_deg = 1.0 + 6.0 * s / (kScenes - 1);
    spec.tilt.azimuth_deg = rng.uniform(0.0, 360.0);
    const double truth = spec.tilt.slope_deg;
    const TerrainScene scene = build_scene(spec);
    const auto nav = make_trajectory(TrajectorySpec{}, scene);
    const RelativePose rel = relative_motion(nav[0], nav[1]);

    // The 4 x 4 grid of quadtree leaves at this resolution.
    const Decomposition grid = decompose(Image(cam.width_px, cam.height_px, 128), QuadtreeCriteria{}, nav[0].range_m,
                                         cam, look_angle(nav[0]));
    for (const Roi& roi : grid.rois) {
      for (int sparse = 0; sparse < 2; ++sparse) {
        const int n = sparse ? 15 : 40 + static_cast<int>(rng.below(111));
        std::vector<Eigen::Vector2d> px1;
        std::vector<Eigen::Vector2d> px2;
        while (static_cast<int>(px1.size()) < n) {
          const Eigen::Vector2d p(rng.uniform(roi.rect.x0, roi.rect.x1()), rng.uniform(roi.rect.y0, roi.rect.y1()));
          const auto hit = scene.intersect(pixel_ray(cam, nav[0].pose, p));
          if (!hit) continue;
          const auto q = try_project(cam, nav[1].pose, hit->point);
          if (!q) continue;
          px1.push_back(p + kNoisePx * Eigen::Vector2d(rng.normal(), rng.normal()));
          px2.push_back(*q + kNoisePx * Eigen::Vector2d(rng.normal(), rng.normal()));
        }
        double err = std::numeric_limits<double>::infinity();
        try {
          const PointCloud cloud = triangulate(px1, px2, nav[0].pose, rel, cam);
          if (cloud.points.size() >= 3) err = std::abs(slope_of(fit_plane(cloud.points, gravity).normal, gravity) - truth);
        } catch (const Error&) {
        }
        (sparse ? err_sparse : err_dense).push_back(err);
      }
    }
  }
  auto fraction_within = [](const std::vector<double>& e, double limit) {
    return static_cast<double>(std::count_if(e.begin(), e.end(), [&](double v) { return v <= limit; })) /
           static_cast<double>(e.size());
  };
  auto median = [](std::vector<double> e) {
    std::sort(e.begin(), e.end());
    return e[e.size() / 2];
  };
  const double dense_ok = fraction_within(err_dense, 0.5);
  const double sparse_ok = fraction_within(err_sparse, 5.0);
  const double secs = clock.seconds();
  const bool pass = dense_ok >= 0.8 && sparse_ok >= 0.8 && secs < 120.0;
  std::ostringstream os;
  os << err_dense.size() << " ROIs with 40-150 points: " << num(100.0 * dense_ok, 1)
     << "% within 0.5 deg (need 80), median error " << num(median(err_dense)) << " deg; " << err_sparse.size()
     << " ROIs with 15 points: " << num(100.0 * sparse_ok, 1) << "% within 5 deg, median "
     << num(median(err_sparse)) << " deg; " << num(secs, 1) << " s";
  return {pass, os.str()};
}

// 3. Lateral motion observes slope far better than boresight motion.
Outcome criterion3() {
  Stopwatch clock;
  McConfig cfg;
  cfg.motions = {Motion::Lateral, Motion::Boresight};
  cfg.baselines_m = {30.0};
  cfg.pixel_noise_px = {0.5};
  cfg.n_trials = 500;
  cfg.altitude_m = 400.0;
  const McResult result = sweep(cfg);
  const double lateral = result.cells.at(0).median_err_deg;
  const double boresight = result.cells.at(1).median_err_deg;
  const double secs = clock.seconds();
  const bool pass = lateral <= 0.5 * boresight && lateral <= 2.0 && secs < 60.0;
  return {pass, "median lateral " + num(lateral) + " deg, boresight " + num(boresight) + " deg (ratio " +
                    num(lateral / boresight) + ", need <= 0.5; lateral need <= 2), " + num(secs, 1) + " s"};
}

// 4. Quadtree rejects shadows and tall rocks.
Outcome criterion4() {
  const SceneSpec spec = hda::testing::boulder_field_spec();
  const TerrainScene scene = build_scene(spec);
  const CameraModel cam = default_camera();
  const auto nav = make_trajectory(TrajectorySpec{}, scene);
  const RenderResult r = render(scene, cam, nav[0].pose);
  const Decomposition d = decompose(r.image, QuadtreeCriteria{}, nav[0].range_m, cam, look_angle(nav[0]));

  Raster<std::uint8_t> rejected(cam.width_px, cam.height_px, 0);
  for (const Roi& roi : d.rejected)
    for (int y = roi.rect.y0; y < roi.rect.y1(); ++y)
      for (int x = roi.rect.x0; x < roi.rect.x1(); ++x) rejected(x, y) = 1;
  // Pixels outside the decomposed crop are never candidates.
  for (int y = 0; y < cam.height_px; ++y)
    for (int x = 0; x < cam.width_px; ++x)
      if (!d.crop.contains(x, y)) rejected(x, y) = 1;

  long long shadow = 0;
  long long covered = 0;
  std::map<int, long long> rock_pixels;
  for (int y = 0; y < cam.height_px; ++y) {
    for (int x = 0; x < cam.width_px; ++x) {
      if (r.unlit(x, y)) {
        ++shadow;
        covered += rejected(x, y);
      }
      const int id = r.rock_id(x, y);
      if (id >= 0 && scene.rock_field().rocks[static_cast<std::size_t>(id)].height_m > 0.3) ++rock_pixels[id];
    }
  }
  const double coverage = shadow > 0 ? static_cast<double>(covered) / static_cast<double>(shadow) : 1.0;

  // Largest share of any tall rock's visible area inside one accepted ROI.
  double worst_share = 0.0;
  for (const Roi& roi : d.rois) {
    std::map<int, long long> inside;
    for (int y = roi.rect.y0; y < roi.rect.y1(); ++y)
      for (int x = roi.rect.x0; x < roi.rect.x1(); ++x) {
        const int id = r.rock_id(x, y);
        if (id >= 0 && rock_pixels.count(id)) ++inside[id];
      }
    for (const auto& [id, count] : inside) {
      worst_share = std::max(worst_share, static_cast<double>(count) / static_cast<double>(rock_pixels[id]));
    }
  }
  const bool pass = shadow > 0 && !rock_pixels.empty() && coverage >= 0.95 && worst_share <= 0.05;
  return {pass, std::to_string(rock_pixels.size()) + " tall rocks in view, " + std::to_string(shadow) +
                    " shadow px, rejected leaves cover " + num(100.0 * coverage, 2) +
                    "% (need 95); largest rock share in an accepted ROI " + num(100.0 * worst_share, 2) +
                    "% (limit 5); " + std::to_string(d.rois.size()) + " accepted, " +
                    std::to_string(d.rejected.size()) + " rejected"};
}

bool on_sloped_patch(const Eigen::Vector3d& p) {
  const Eigen::Vector2d delta = p.head<2>() - hda::testing::kSlopedPatchCenter;
  return std::max(std::abs(delta.x()), std::abs(delta.y())) < 0.5 * hda::testing::kSlopedPatchSize;
}

// 5. End-to-end selection avoids the sloped region.
Outcome criterion5() {
  std::ostringstream os;
  bool pass = true;
  for (std::uint64_t seed : {1, 2}) {
    const TerrainScene scene = build_scene(hda::testing::flat_site_spec(seed));
    const HdaConfig config;
    const auto pair = render_pair(scene, config.camera);
    const HdaResult result =
        run_hda(pair.first.image, pair.nav[0], pair.second.image, pair.nav[1], config);
    os << "seed " << seed << ": " << to_string(result.status);
    if (result.status != HdaStatus::Complete || result.assessments.empty() || !result.assessments.front().safe) {
      pass = false;
      os << "; ";
      continue;
    }
    const SiteAssessment& best = result.assessments.front();
    const auto roi = std::find_if(result.decomposition.rois.begin(), result.decomposition.rois.end(),
                                  [&](const Roi& r) { return r.index == best.roi; });
    const auto truth = truth_site(scene, config.camera, pair.nav[0].pose, roi->rect);
    const auto on_patch = std::count_if(truth.points.begin(), truth.points.end(), on_sloped_patch);
    const double patch_share = static_cast<double>(on_patch) / static_cast<double>(truth.points.size());

    // Any ROI mostly on the sloped region must rank below the best site.
    bool sloped_rank1 = patch_share > 0.05;
    int sloped_rois = 0;
    for (const Roi& r : result.decomposition.rois) {
      const auto t = ground_truth_cloud(scene, config.camera, pair.nav[0].pose, r.rect, 8, 8);
      const auto n = std::count_if(t.begin(), t.end(), [](const TruthSample& s) { return on_sloped_patch(s.point); });
      if (2 * n > static_cast<long>(t.size())) ++sloped_rois;
    }
    const bool ok = truth.slope_deg < 10.0 && truth.roughness_m < 0.30 && !sloped_rank1;
    pass = pass && ok;
    os << ", rank 1 roi " << best.roi << " truth slope " << num(truth.slope_deg) << " deg, roughness "
       << num(truth.roughness_m) << " m, " << num(100.0 * patch_share, 1) << "% on sloped region ("
       << sloped_rois << " ROIs over it); ";
  }
  return {pass, os.str()};
}

// 6. Kick-out returns the nearest-first prefix within one ROI of the budget.
Outcome criterion6() {
  const TerrainScene scene = build_scene(hda::testing::flat_site_spec(1));
  HdaConfig config;
  const auto pair = render_pair(scene, config.camera);
  config.set_unlimited_budget();
  const HdaResult full = run_hda(pair.first.image, pair.nav[0], pair.second.image, pair.nav[1], config);
  const double budget = 0.2 * full.timing.total_s;

  HdaConfig limited_cfg;
  limited_cfg.set_total_budget(budget);
  const HdaResult limited = run_hda(pair.first.image, pair.nav[0], pair.second.image, pair.nav[1], limited_cfg);

  std::ostringstream os;
  os << "unconstrained " << num(full.timing.total_s) << " s over " << full.rois_processed << " ROIs; budget "
     << num(budget) << " s -> " << to_string(limited.status) << ", " << limited.rois_processed << " processed, "
     << limited.rois_skipped << " skipped";
  bool pass = limited.status == HdaStatus::PartialBudget && limited.kicked_out;

  // Processed ROIs are the head of the nearest-first order.
  const auto k = limited.traces.size();
  bool prefix = k < full.processing_order.size() && limited.processing_order == full.processing_order;
  for (std::size_t i = 0; prefix && i < k; ++i) prefix = limited.traces[i].roi.index == full.processing_order[i];
  // Distances are non-decreasing along the order.
  for (std::size_t i = 1; prefix && i < full.traces.size(); ++i) {
    prefix = full.traces[i - 1].predicted_distance_m <= full.traces[i].predicted_distance_m;
  }
  // The partial ranking is the full run's assessments of those ROIs.
  std::set<int> done;
  for (std::size_t i = 0; i < k; ++i) done.insert(limited.traces[i].roi.index);
  std::vector<std::pair<int, double>> expect;
  std::vector<std::pair<int, double>> got;
  for (const auto& a : full.assessments)
    if (done.count(a.roi)) expect.emplace_back(a.roi, a.slope_deg);
  for (const auto& a : limited.assessments) got.emplace_back(a.roi, a.slope_deg);
  std::sort(expect.begin(), expect.end());
  std::sort(got.begin(), got.end());
  const bool same_sites = expect == got;

  double longest_roi = 0.0;
  for (const auto& t : full.traces) longest_roi = std::max(longest_roi, t.duration_s);
  for (const auto& t : limited.traces) longest_roi = std::max(longest_roi, t.duration_s);
  const double overrun = limited.timing.total_s - budget;
  const bool within = overrun <= longest_roi;

  pass = pass && prefix && same_sites && within;
  os << "; prefix " << (prefix ? "yes" : "no") << ", assessments match " << (same_sites ? "yes" : "no")
     << "; wall " << num(limited.timing.total_s) << " s, overrun " << num(overrun) << " s vs longest ROI "
     << num(longest_roi) << " s";
  return {pass, os.str()};
}

// 7. Stage times grow with image size; 2048 x 2048 finishes on time.
Outcome criterion7() {
  const TerrainScene scene = build_scene(default_scene_spec());
  std::vector<ImagePair> pairs;
  for (int size : {1024, 2048}) {
    const CameraModel cam = default_camera(size, size);
    auto rendered = render_pair(scene, cam);
    ImagePair p;
    p.label = std::to_string(size) + "x" + std::to_string(size);
    p.image1 = std::move(rendered.first.image);
    p.image2 = std::move(rendered.second.image);
    p.nav1 = rendered.nav[0];
    p.nav2 = rendered.nav[1];
    pairs.push_back(std::move(p));
  }
  const auto rows = profile_run(pairs, HdaConfig{}, 3);
  const fs::path csv = fs::temp_directory_path() / "hda_acceptance_profile.csv";
  write_profile_csv(csv, rows);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  int data_rows = 0;
  for (std::string line; std::getline(in, line);) data_rows += !line.empty();
  fs::remove(csv);

  const bool shape = header.find("quadtree_median_s") != std::string::npos &&
                     header.find("sfm_median_s") != std::string::npos && data_rows == 2;
  const auto& small = rows[0];
  const auto& large = rows[1];
  const bool grows = large.quadtree().median_s > small.quadtree().median_s &&
                     large.sfm().median_s > small.sfm().median_s &&
                     large.total().median_s > small.total().median_s;
  const bool fast = large.total().max_s < 15.0;
  const bool pass = shape && grows && fast && small.total_samples.size() == 3;
  return {pass, "median quadtree/sfm/total 1024: " + num(small.quadtree().median_s, 4) + "/" +
                    num(small.sfm().median_s) + "/" + num(small.total().median_s) + " s, 2048: " +
                    num(large.quadtree().median_s, 4) + "/" + num(large.sfm().median_s) + "/" +
                    num(large.total().median_s) + " s (limit 15); csv columns " + (shape ? "ok" : "wrong")};
}

// 8. Realized rock diameters follow the truncated power law.
Outcome criterion8() {
  RockDistributionParams params = default_scene_spec().rocks.value();
  std::vector<double> d;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    for (const Rock& rock : scatter_rocks(params, seed).rocks) d.push_back(rock.diameter_m);
  }
  std::sort(d.begin(), d.end());
  // Cumulative law restricted to [d_min, d_max].
  const double lo = std::pow(params.d_min_m, params.r);
  const double hi = std::pow(params.d_max_m, params.r);
  auto cdf = [&](double x) { return (lo - std::pow(x, params.r)) / (lo - hi); };
  double ks = 0.0;
  const double n = static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double f = cdf(d[i]);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  const bool pass = !d.empty() && ks < 0.05;
  std::ostringstream os;
  os << d.size() << " rocks over 100 seeds (r = " << params.r << ", D in [" << params.d_min_m << ", "
     << params.d_max_m << "] m), KS statistic " << std::scientific << std::setprecision(3) << ks << " (limit 0.05)";
  return {pass, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// First `columns` comma-separated fields of every line.
std::string leading_columns(const std::string& text, int columns) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    int seen = 0;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == ',' && ++seen == columns) {
        cut = i;
        break;
      }
    }
    out += line.substr(0, cut) + '\n';
  }
  return out;
}

// 9. Every command is byte-reproducible across runs and thread counts.
Outcome criterion9() {
  const fs::path root = fs::temp_directory_path() / "hda_acceptance_determinism";
  fs::remove_all(root);
  // Wall-clock measurements are the only non-reproducible outputs.
  const std::set<std::string> timing_files = {"timing.csv", "profile.csv", "profile_samples.csv"};

  std::ostringstream detail;
  bool pass = true;
  std::map<std::string, std::string> reference;
  int runs = 0;
  for (unsigned threads : {1U, 1U, 3U}) {
    const fs::path out = root / ("run" + std::to_string(runs++));
    cli::ExperimentSpec spec;
    spec.set_seed(11);
    spec.set_camera(default_camera(512, 512));
    spec.scene = hda::testing::flat_site_spec(11);
    spec.mc.baselines_m = {10.0, 30.0};
    spec.mc.pixel_noise_px = {0.5};
    spec.mc.n_trials = 50;
    spec.profile.sizes_px = {512};
    spec.profile.reps = 2;
    spec.threads = threads;
    spec.output_dir = out;
    std::ostringstream log;
    std::ostringstream err;
    const int g = cli::cmd_generate(spec, log, err);
    const int r = cli::cmd_run(spec, true, log, err);
    const int m = cli::cmd_mc(spec, log, err);
    const int p = cli::cmd_profile(spec, log, err);
    if (g != 0 || r == cli::kExitFailure || m != 0 || p != 0) {
      return {false, "command failed: " + err.str()};
    }
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
      if (!entry.is_regular_file()) continue;
      const std::string rel = fs::relative(entry.path(), out).string();
      std::string bytes = slurp(entry.path());
      if (rel == "profile.csv") bytes = leading_columns(bytes, 4);
      else if (timing_files.count(rel)) continue;
      files[rel] = std::move(bytes);
    }
    if (reference.empty()) {
      reference = std::move(files);
      detail << reference.size() << " files compared (" << (r == 0 ? "run found a site" : "run found no site")
             << ")";
      continue;
    }
    if (files.size() != reference.size()) pass = false;
    for (const auto& [name, bytes] : reference) {
      auto it = files.find(name);
      if (it == files.end() || it->second != bytes) {
        pass = false;
        detail << "; " << name << " differs with " << threads << " threads";
      }
    }
  }
  fs::remove_all(root);
  detail << " across 2 runs and 1 vs 3 threads; timing columns excluded";
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3,
                                                          criterion4, criterion5, criterion6,
                                                          criterion7, criterion8, criterion9};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    Stopwatch clock;
    Outcome outcome;
    try {
      outcome = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << "criterion " << id << ": " << (outcome.pass ? "PASS" : "FAIL") << " - " << outcome.detail << " ["
              << fmt_fixed(clock.seconds(), 1) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

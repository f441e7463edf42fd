#include "hda_cli/spec.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include "hda/error.hpp"

namespace hda::cli {

namespace {

using nlohmann::json;

std::string type_name(const json& v) {
  if (v.is_number_integer()) return "integer";
  return v.type_name();
}

// Typed access to one JSON object. Every key read is recorded so that
// finish() can reject the rest as unknown.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw SpecError(path_, "expected object, got " + type_name(obj_));
  }

  std::string path_of(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, path_of(key));
  }

  void positive(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      out = as_number(*v, path_of(key));
      if (!(out > 0.0)) throw SpecError(path_of(key), "must be > 0");
    }
  }

  void non_negative(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      out = as_number(*v, path_of(key));
      if (!(out >= 0.0)) throw SpecError(path_of(key), "must be >= 0");
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out, long long lo, long long hi) {
    if (const json* v = find(key)) out = static_cast<Int>(as_integer(*v, path_of(key), lo, hi));
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw SpecError(path_of(key), "expected boolean, got " + type_name(*v));
      out = v->get<bool>();
    }
  }

  void path(const std::string& key, std::optional<std::filesystem::path>& out, const std::filesystem::path& base) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw SpecError(path_of(key), "expected string, got " + type_name(*v));
      out = base / v->get<std::string>();
    }
  }

  void vec2(const std::string& key, Eigen::Vector2d& out) {
    if (const json* v = find(key)) out = as_vector<2>(*v, path_of(key));
  }

  void vec3(const std::string& key, Eigen::Vector3d& out) {
    if (const json* v = find(key)) out = as_vector<3>(*v, path_of(key));
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      const std::string p = path_of(key);
      if (!v->is_array()) throw SpecError(p, "expected array, got " + type_name(*v));
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) out.push_back(as_number((*v)[i], p + "[" + std::to_string(i) + "]"));
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw SpecError(path_of(it.key()), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw SpecError(path, "expected number, got " + type_name(v));
    return v.get<double>();
  }

  static long long as_integer(const json& v, const std::string& path, long long lo, long long hi) {
    if (!v.is_number_integer()) throw SpecError(path, "expected integer, got " + type_name(v));
    long long value = 0;
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max())) {
        throw SpecError(path, "out of range");
      }
      value = static_cast<long long>(u);
    } else {
      value = v.get<long long>();
    }
    if (value < lo || value > hi) {
      throw SpecError(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return value;
  }

  template <int N>
  static Eigen::Matrix<double, N, 1> as_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != N) {
      throw SpecError(path, "expected array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) out[i] = as_number(v[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& require_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw SpecError(path, "expected array, got " + type_name(v));
  return v;
}

void parse_rocks(const json& v, const std::string& path, std::optional<RockDistributionParams>& out) {
  if (v.is_null()) {
    out.reset();
    return;
  }
  RockDistributionParams rocks = out.value_or(RockDistributionParams{});
  Fields f(v, path);
  if (f.has("k") && f.has("density_per_m2")) throw SpecError(path, "give either k or density_per_m2");
  f.number("r", rocks.r);
  f.positive("d_min_m", rocks.d_min_m);
  f.positive("d_max_m", rocks.d_max_m);
  f.positive("area_radius_m", rocks.area_radius_m);
  f.vec2("center", rocks.center);
  f.positive("height_ratio", rocks.height_ratio);
  f.positive("k", rocks.k);
  if (f.has("density_per_m2")) {
    double density = 0.0;
    f.positive("density_per_m2", density);
    rocks.k = k_from_density(density, rocks.area_radius_m);
  }
  f.finish();
  try {
    rocks.validate();
  } catch (const Error& e) {
    throw SpecError(path, e.what());
  }
  out = rocks;
}

void parse_scene(const json& v, const std::string& path, SceneSpec& scene) {
  Fields f(v, path);
  if (const json* preset = f.find("preset")) {
    if (!preset->is_string()) throw SpecError(f.path_of("preset"), "expected string");
    const auto name = preset->get<std::string>();
    if (name == "default") {
      scene = default_scene_spec();
    } else if (name == "flat") {
      scene = default_scene_spec();
      scene.octaves.clear();
      scene.rocks.reset();
    } else {
      throw SpecError(f.path_of("preset"), "unknown preset '" + name + "' (expected default or flat)");
    }
  }
  f.positive("size_m", scene.size_m);
  f.positive("resolution_mpp", scene.resolution_mpp);
  if (const json* octs = f.find("octaves")) {
    const std::string p = f.path_of("octaves");
    require_array(*octs, p);
    scene.octaves.clear();
    for (std::size_t i = 0; i < octs->size(); ++i) {
      Octave o;
      Fields of((*octs)[i], index_path(p, i));
      of.positive("wavelength_m", o.wavelength_m);
      of.non_negative("amplitude_m", o.amplitude_m);
      of.finish();
      scene.octaves.push_back(o);
    }
  }
  if (const json* tilt = f.find("tilt")) {
    Fields tf(*tilt, f.path_of("tilt"));
    tf.number("slope_deg", scene.tilt.slope_deg);
    tf.number("azimuth_deg", scene.tilt.azimuth_deg);
    tf.finish();
    if (!(std::abs(scene.tilt.slope_deg) < 90.0)) throw SpecError(tf.path_of("slope_deg"), "must be in (-90, 90)");
  }
  if (const json* patches = f.find("patches")) {
    const std::string p = f.path_of("patches");
    require_array(*patches, p);
    scene.patches.clear();
    for (std::size_t i = 0; i < patches->size(); ++i) {
      SlopedPatch patch;
      Fields pf((*patches)[i], index_path(p, i));
      pf.vec2("center", patch.center);
      pf.positive("size_m", patch.size_m);
      pf.number("slope_deg", patch.slope_deg);
      pf.finish();
      if (!(patch.slope_deg >= 0.0 && patch.slope_deg < 90.0)) {
        throw SpecError(pf.path_of("slope_deg"), "must be in [0, 90)");
      }
      scene.patches.push_back(patch);
    }
  }
  if (const json* rocks = f.find("rocks")) parse_rocks(*rocks, f.path_of("rocks"), scene.rocks);
  if (const json* boulders = f.find("boulders")) {
    const std::string p = f.path_of("boulders");
    require_array(*boulders, p);
    scene.extra_rocks.clear();
    for (std::size_t i = 0; i < boulders->size(); ++i) {
      Rock rock;
      rock.center = Eigen::Vector2d::Zero();
      double yaw_deg = 0.0;
      Fields bf((*boulders)[i], index_path(p, i));
      bf.vec2("center", rock.center);
      bf.positive("diameter_m", rock.diameter_m);
      bf.positive("height_m", rock.height_m);
      bf.number("yaw_deg", yaw_deg);
      bf.finish();
      if (rock.diameter_m == 0.0) throw SpecError(bf.path_of("diameter_m"), "required");
      if (rock.height_m == 0.0) rock.height_m = 0.5 * rock.diameter_m;
      rock.yaw_rad = yaw_deg * std::numbers::pi / 180.0;
      scene.extra_rocks.push_back(rock);
    }
  }
  if (const json* sun = f.find("sun")) {
    double elevation = 30.0;
    double azimuth = 135.0;
    Fields sf(*sun, f.path_of("sun"));
    sf.number("elevation_deg", elevation);
    sf.number("azimuth_deg", azimuth);
    sf.finish();
    if (!(elevation > 0.0 && elevation <= 90.0)) throw SpecError(sf.path_of("elevation_deg"), "must be in (0, 90]");
    scene.sun_dir = sun_from_angles(elevation, azimuth);
  }
  f.positive("albedo", scene.albedo);
  if (scene.albedo > 1.0) throw SpecError(f.path_of("albedo"), "must be in (0, 1]");
  if (const json* tex = f.find("texture")) {
    Fields tf(*tex, f.path_of("texture"));
    tf.non_negative("amplitude", scene.texture.amplitude);
    tf.numbers("wavelengths_m", scene.texture.wavelengths_m);
    tf.finish();
    for (std::size_t i = 0; i < scene.texture.wavelengths_m.size(); ++i) {
      if (!(scene.texture.wavelengths_m[i] > 0.0)) {
        throw SpecError(index_path(tf.path_of("wavelengths_m"), i), "must be > 0");
      }
    }
  }
  f.finish();
}

void parse_camera(const json& v, const std::string& path, CameraModel& cam) {
  Fields f(v, path);
  int width = cam.width_px;
  int height = cam.height_px;
  double hfov = cam.hfov_deg();
  f.integer("width_px", width, 16, 1 << 15);
  f.integer("height_px", height, 16, 1 << 15);
  f.positive("hfov_deg", hfov);
  f.finish();
  if (!(hfov < 180.0)) throw SpecError(f.path_of("hfov_deg"), "must be < 180");
  cam = CameraModel::from_hfov(width, height, hfov);
}

void parse_trajectory(const json& v, const std::string& path, const std::filesystem::path& base,
                      ExperimentSpec& spec) {
  Fields f(v, path);
  TrajectorySpec& t = spec.trajectory;
  f.positive("altitude_m", t.altitude_m);
  f.non_negative("downrange_m", t.downrange_m);
  f.non_negative("ground_speed_mps", t.ground_speed_mps);
  f.positive("capture_interval_s", t.capture_interval_s);
  f.number("start_time_s", t.start_time_s);
  f.vec3("target", t.target);
  f.path("nav_csv", spec.trajectory_nav, base);
  f.finish();
}

void parse_hda(const json& v, const std::string& path, HdaConfig& hda) {
  Fields f(v, path);
  if (const json* q = f.find("quadtree")) {
    Fields qf(*q, f.path_of("quadtree"));
    qf.positive("max_stddev", hda.quadtree.max_stddev);
    qf.non_negative("min_mean", hda.quadtree.min_mean);
    qf.integer("min_size_px", hda.quadtree.min_size_px, 1, 1 << 15);
    qf.non_negative("min_footprint_m", hda.quadtree.min_footprint_m);
    if (const json* m = qf.find("max_footprint_m")) {
      hda.quadtree.max_footprint_m =
          m->is_null() ? std::numeric_limits<double>::infinity() : Fields::as_number(*m, qf.path_of("max_footprint_m"));
    }
    qf.integer("max_depth", hda.quadtree.max_depth, 0, 30);
    qf.finish();
  }
  if (const json* o = f.find("orb")) {
    Fields of(*o, f.path_of("orb"));
    of.integer("max_keypoints", hda.orb.max_keypoints, 0, 1 << 20);
    of.integer("levels", hda.orb.levels, 1, 8);
    of.positive("scale_factor", hda.orb.scale_factor);
    double fast = hda.orb.fast_threshold;
    of.positive("fast_threshold", fast);
    hda.orb.fast_threshold = static_cast<float>(fast);
    of.number("harris_k", hda.orb.harris_k);
    of.finish();
  }
  f.positive("match_ratio", hda.match_ratio);
  f.boolean("cross_check", hda.cross_check);
  if (const json* r = f.find("ransac")) {
    Fields rf(*r, f.path_of("ransac"));
    rf.positive("threshold_px", hda.ransac.threshold_px);
    rf.integer("max_iters", hda.ransac.max_iters, 1, 1 << 24);
    rf.finish();
  }
  f.positive("nav_threshold_px", hda.nav_threshold_px);
  f.boolean("refine", hda.refine);
  if (const json* r = f.find("refine_params")) {
    Fields rf(*r, f.path_of("refine_params"));
    rf.integer("half_window", hda.refine_params.half_window, 1, 64);
    rf.integer("max_iterations", hda.refine_params.max_iterations, 1, 1000);
    rf.positive("max_shift_px", hda.refine_params.max_shift_px);
    rf.non_negative("min_eigenvalue", hda.refine_params.min_eigenvalue);
    rf.positive("max_warp_change", hda.refine_params.max_warp_change);
    rf.positive("max_residual", hda.refine_params.max_residual);
    rf.finish();
  }
  f.non_negative("roi_margin", hda.roi_margin);
  f.non_negative("min_parallax_deg", hda.min_parallax_deg);
  if (const json* l = f.find("limits")) {
    Fields lf(*l, f.path_of("limits"));
    lf.positive("slope_deg", hda.limits.slope_deg);
    lf.positive("roughness_m", hda.limits.roughness_m);
    lf.positive("area_m2", hda.limits.area_m2);
    lf.integer("min_points", hda.limits.min_points, 3, 1 << 20);
    lf.finish();
  }
  if (const json* w = f.find("weights")) {
    Fields wf(*w, f.path_of("weights"));
    wf.non_negative("slope", hda.weights.slope);
    wf.non_negative("roughness", hda.weights.roughness);
    wf.non_negative("inverse_area", hda.weights.inverse_area);
    wf.finish();
  }
  // A lone total budget rescales the stage budgets; explicit stage budgets
  // are taken as given.
  const bool stage_given = f.has("budget_quadtree_s") || f.has("budget_sfm_s");
  if (f.has("budget_total_s") && !stage_given) {
    double total = hda.budget_total_s;
    f.positive("budget_total_s", total);
    hda.set_total_budget(total);
  } else {
    f.positive("budget_total_s", hda.budget_total_s);
  }
  f.positive("budget_quadtree_s", hda.budget_quadtree_s);
  f.positive("budget_sfm_s", hda.budget_sfm_s);
  f.positive("budget_time_scale", hda.budget_time_scale);
  f.vec3("ils_position", hda.ils_position);
  f.finish();
}

void parse_mc(const json& v, const std::string& path, McConfig& mc) {
  Fields f(v, path);
  if (const json* m = f.find("motions")) {
    const std::string p = f.path_of("motions");
    require_array(*m, p);
    mc.motions.clear();
    for (std::size_t i = 0; i < m->size(); ++i) {
      const json& item = (*m)[i];
      const std::string name = item.is_string() ? item.get<std::string>() : std::string();
      if (name == "Lateral") {
        mc.motions.push_back(Motion::Lateral);
      } else if (name == "Boresight") {
        mc.motions.push_back(Motion::Boresight);
      } else {
        throw SpecError(index_path(p, i), "expected \"Lateral\" or \"Boresight\"");
      }
    }
  }
  f.numbers("baselines_m", mc.baselines_m);
  f.numbers("pixel_noise_px", mc.pixel_noise_px);
  f.integer("n_trials", mc.n_trials, 1, 1 << 24);
  f.integer("n_features", mc.n_features, 3, 1 << 20);
  f.positive("altitude_m", mc.altitude_m);
  f.number("look_angle_deg", mc.look_angle_deg);
  f.non_negative("truth_slope_deg", mc.truth_slope_deg);
  f.positive("patch_size_m", mc.patch_size_m);
  f.finish();
  try {
    mc.validate();
  } catch (const Error& e) {
    throw SpecError(path, e.what());
  }
}

}  // namespace

void ExperimentSpec::set_seed(std::uint64_t value) {
  seed = value;
  scene.seed = value;
  mc.seed = value;
  hda.ransac.seed = value;
}

void ExperimentSpec::set_camera(const CameraModel& cam) {
  camera = cam;
  hda.camera = cam;
  mc.camera = cam;
}

ExperimentSpec parse_experiment(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ExperimentSpec spec;
  Fields f(doc, "");
  std::uint64_t seed = spec.seed;
  f.integer("seed", seed, 0, std::numeric_limits<long long>::max());

  if (const json* v = f.find("scene")) parse_scene(*v, "scene", spec.scene);
  CameraModel cam = spec.camera;
  if (const json* v = f.find("camera")) parse_camera(*v, "camera", cam);
  if (const json* v = f.find("trajectory")) parse_trajectory(*v, "trajectory", base_dir, spec);
  if (const json* v = f.find("inputs")) {
    Fields in(*v, "inputs");
    in.path("image1", spec.image1, base_dir);
    in.path("image2", spec.image2, base_dir);
    in.path("nav", spec.nav, base_dir);
    in.finish();
  }
  if (const json* v = f.find("hda")) parse_hda(*v, "hda", spec.hda);
  if (const json* v = f.find("mc")) parse_mc(*v, "mc", spec.mc);
  if (const json* v = f.find("profile")) {
    Fields pf(*v, "profile");
    if (const json* sizes = pf.find("sizes_px")) {
      require_array(*sizes, "profile.sizes_px");
      spec.profile.sizes_px.clear();
      for (std::size_t i = 0; i < sizes->size(); ++i) {
        spec.profile.sizes_px.push_back(
            static_cast<int>(Fields::as_integer((*sizes)[i], index_path("profile.sizes_px", i), 16, 1 << 15)));
      }
    }
    pf.integer("reps", spec.profile.reps, 1, 1000);
    pf.finish();
  }
  if (const json* v = f.find("generate")) {
    Fields gf(*v, "generate");
    gf.integer("truth_cloud_rows", spec.generate.truth_cloud_rows, 2, 4096);
    gf.integer("truth_cloud_cols", spec.generate.truth_cloud_cols, 2, 4096);
    gf.integer("truth_map_stride", spec.generate.truth_map_stride, 1, 1024);
    gf.finish();
  }
  f.integer("threads", spec.threads, 0, 1024);
  if (const json* v = f.find("output_dir")) {
    if (!v->is_string()) throw SpecError("output_dir", "expected string, got " + type_name(*v));
    spec.output_dir = base_dir / v->get<std::string>();
  } else {
    spec.output_dir = base_dir / spec.output_dir;
  }
  f.finish();

  spec.set_seed(seed);
  spec.set_camera(cam);
  try {
    spec.trajectory.validate();
  } catch (const Error& e) {
    throw SpecError("trajectory", e.what());
  }
  try {
    spec.hda.validate();
  } catch (const Error& e) {
    throw SpecError("hda", e.what());
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Parse, file.string() + ": " + e.what());
  }
  return parse_experiment(doc, file.parent_path());
}

}  // namespace hda::cli

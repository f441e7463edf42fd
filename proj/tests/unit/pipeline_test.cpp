#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "hda/pipeline.hpp"
#include "hda/scene.hpp"
#include "scenes.hpp"

namespace hda {
namespace {

constexpr int kSize = 512;

CameraModel small_camera() { return CameraModel::from_hfov(kSize, kSize, 5.0); }

HdaConfig small_config() {
  HdaConfig c;
  c.camera = small_camera();
  return c;
}

SceneSpec flat_textured() {
  SceneSpec spec = default_scene_spec();
  spec.octaves.clear();
  spec.rocks.reset();
  return spec;
}

// 30 m of lateral travel between captures.
TrajectorySpec thirty_metre_baseline() {
  TrajectorySpec t;
  t.capture_interval_s = 30.0 / t.ground_speed_mps;
  return t;
}


const testing::RenderedPair& flat_pair() {
  static const testing::RenderedPair pair =
      testing::render_pair(build_scene(flat_textured()), small_camera(), thirty_metre_baseline());
  return pair;
}

HdaResult run(const testing::RenderedPair& p, const HdaConfig& c) {
  return run_hda(p.first.image, p.nav[0], p.second.image, p.nav[1], c);
}

TEST(RunHda, FlatPlaneComplete) {
  const auto& p = flat_pair();
  EXPECT_NEAR((p.nav[1].pose.position - p.nav[0].pose.position).norm(), 30.0, 1e-9);
  const HdaResult r = run(p, small_config());
  ASSERT_EQ(r.status, HdaStatus::Complete) << r.failure_reason;
  ASSERT_FALSE(r.assessments.empty());
  const SiteAssessment& top = r.assessments.front();
  EXPECT_EQ(top.rank, 1);
  EXPECT_TRUE(top.safe);
  EXPECT_LT(top.slope_deg, 1.0);
  EXPECT_FALSE(r.kicked_out);
  EXPECT_EQ(r.rois_processed, static_cast<int>(r.decomposition.rois.size()));
  EXPECT_EQ(r.rois_skipped, 0);
}

TEST(RunHda, TinyBudgetKicksOut) {
  HdaConfig c = small_config();
  c.set_total_budget(1e-6);
  const HdaResult r = run(flat_pair(), c);
  EXPECT_EQ(r.status, HdaStatus::PartialBudget);
  EXPECT_EQ(r.rois_processed, 0);
  EXPECT_TRUE(r.kicked_out);
  EXPECT_EQ(r.rois_skipped, static_cast<int>(r.decomposition.rois.size()));
}

TEST(RunHda, AllShadowIsNoSafeSite) {
  SceneSpec spec = flat_textured();
  spec.albedo = 0.05;  // every pixel below the shadow threshold
  const auto p = testing::render_pair(build_scene(spec), small_camera());
  const HdaResult r = run(p, small_config());
  EXPECT_EQ(r.status, HdaStatus::NoSafeSite);
  EXPECT_TRUE(r.assessments.empty());
  EXPECT_TRUE(r.decomposition.rois.empty());
}

TEST(RunHda, InvalidInputsFail) {
  const auto& p = flat_pair();
  const HdaConfig c = small_config();
  EXPECT_EQ(run_hda(Image(), p.nav[0], p.second.image, p.nav[1], c).status, HdaStatus::Failed);
  EXPECT_EQ(run_hda(p.first.image, p.nav[0], Image(256, 256), p.nav[1], c).status, HdaStatus::Failed);
  const HdaResult same = run_hda(p.first.image, p.nav[0], p.second.image, p.nav[0], c);
  EXPECT_EQ(same.status, HdaStatus::Failed);
  EXPECT_FALSE(same.failure_reason.empty());
  HdaConfig bad = c;
  bad.budget_total_s = -1.0;
  EXPECT_EQ(run(p, bad).status, HdaStatus::Failed);
}

TEST(RunHda, ProcessingOrderNearestFirst) {
  HdaConfig c = small_config();
  c.set_unlimited_budget();
  const HdaResult r = run(flat_pair(), c);
  ASSERT_EQ(r.processing_order.size(), r.decomposition.rois.size());
  ASSERT_EQ(r.traces.size(), r.processing_order.size());
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    EXPECT_EQ(r.traces[i].roi.index, r.processing_order[i]);
    if (i > 0) {
      EXPECT_LE(r.traces[i - 1].predicted_distance_m, r.traces[i].predicted_distance_m);
    }
  }
}

TEST(RunHda, BudgetKeepsPrefixOfOrder) {
  HdaConfig unlimited = small_config();
  unlimited.set_unlimited_budget();
  const HdaResult full = run(flat_pair(), unlimited);
  ASSERT_GE(full.traces.size(), 4U);

  HdaConfig c = small_config();
  c.set_unlimited_budget();
  c.budget_sfm_s = 0.5 * full.traces[0].duration_s;
  c.budget_total_s = full.timing.quadtree_s + c.budget_sfm_s + 10.0;
  c.budget_quadtree_s = c.budget_total_s - c.budget_sfm_s;
  const HdaResult part = run(flat_pair(), c);
  ASSERT_EQ(part.status, HdaStatus::PartialBudget) << part.failure_reason;
  ASSERT_GE(part.rois_processed, 1);
  ASSERT_LT(part.rois_processed, static_cast<int>(full.traces.size()));
  for (int i = 0; i < part.rois_processed; ++i) EXPECT_EQ(part.processing_order[i], full.processing_order[i]);
  EXPECT_EQ(part.rois_processed + part.rois_skipped, static_cast<int>(full.processing_order.size()));
}

TEST(RunHda, DeterministicWithUnlimitedBudget) {
  HdaConfig c = small_config();
  c.set_unlimited_budget();
  const HdaResult a = run(flat_pair(), c);
  const HdaResult b = run(flat_pair(), c);
  ASSERT_EQ(a.assessments.size(), b.assessments.size());
  for (std::size_t i = 0; i < a.assessments.size(); ++i) {
    EXPECT_EQ(a.assessments[i].roi, b.assessments[i].roi);
    EXPECT_EQ(a.assessments[i].slope_deg, b.assessments[i].slope_deg);
    EXPECT_EQ(a.assessments[i].roughness_m, b.assessments[i].roughness_m);
    EXPECT_EQ(a.assessments[i].n_points, b.assessments[i].n_points);
  }
}

TEST(HdaConfig, BudgetHelpers) {
  HdaConfig c;
  c.set_total_budget(3.0);
  EXPECT_DOUBLE_EQ(c.budget_total_s, 3.0);
  EXPECT_DOUBLE_EQ(c.budget_quadtree_s, 4.0 * 0.2);
  EXPECT_DOUBLE_EQ(c.budget_sfm_s, 10.0 * 0.2);
  EXPECT_NO_THROW(c.validate());
  c.budget_quadtree_s = 2.5;
  EXPECT_ANY_THROW(c.validate());
}

TEST(Profile, RepetitionsGiveSamples) {
  const auto& p = flat_pair();
  const std::vector<ImagePair> pairs = {{"flat", p.first.image, p.nav[0], p.second.image, p.nav[1]}};
  const auto rows = profile_run(pairs, small_config(), 3);
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_EQ(rows[0].width, kSize);
  EXPECT_EQ(rows[0].quadtree_samples.size(), 3U);
  EXPECT_EQ(rows[0].sfm_samples.size(), 3U);
  EXPECT_EQ(rows[0].total_samples.size(), 3U);
  const StageStats t = rows[0].total();
  EXPECT_LE(t.min_s, t.median_s);
  EXPECT_LE(t.median_s, t.max_s);
}

TEST(Profile, StageStats) {
  const StageStats s = stage_stats({3.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(s.min_s, 1.0);
  EXPECT_DOUBLE_EQ(s.median_s, 2.0);
  EXPECT_DOUBLE_EQ(s.max_s, 3.0);
  EXPECT_DOUBLE_EQ(stage_stats({1.0, 4.0}).median_s, 2.5);
}

}  // namespace
}  // namespace hda

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hda/camera.hpp"
#include "hda/image.hpp"
#include "hda/roi.hpp"

namespace hda {

struct QuadtreeCriteria {
  double max_stddev = 7.0;  // brightness units on the 0..255 scale
  double min_mean = 20.0;    // shadow rejection
  int min_size_px = 8;
  double min_footprint_m = 9.5;
  // Regions whose smaller ground axis exceeds this are always split, so
  // candidates stay at landing-site scale. Infinity disables the limit.
  double max_footprint_m = 15.0;
  int max_depth = 12;

  void validate() const;
};

struct RegionStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

// Direct two-pass statistics over the pixels of `rect`.
RegionStats roi_stats(const Image& image, const Rect& rect);

// Summed-area tables of value and value^2. Sums are exact integers, so the
// statistics match roi_stats to rounding.
class IntegralStats {
 public:
  explicit IntegralStats(const Image& image);
  RegionStats stats(const Rect& rect) const;

 private:
  std::uint64_t sum(const std::vector<std::uint64_t>& table, const Rect& rect) const;

  int width_;
  int height_;
  std::vector<std::uint64_t> sum_;
  std::vector<std::uint64_t> sum_sq_;
};

struct Footprint {
  double cross_range_m = 0.0;
  double down_range_m = 0.0;

  double min_axis() const { return cross_range_m < down_range_m ? cross_range_m : down_range_m; }
};

// Ground size of a pixel rectangle at the laser range; the down-range axis
// (image rows) is stretched by 1/cos(look_angle).
Footprint footprint_of(const Rect& rect, double range_m, const CameraModel& cam, double look_angle_rad);

struct Decomposition {
  Rect crop;                 // power-of-two square actually decomposed
  std::vector<Roi> rois;     // accepted, indexed row-major by (y0, x0)
  std::vector<Roi> rejected; // rejected leaves, row-major

  bool empty() const { return rois.empty(); }
};

// Recursive brightness-variance decomposition. A region is accepted when
// stddev <= max_stddev, mean >= min_mean and its footprint lies within
// [min_footprint_m, max_footprint_m]; otherwise it is split into quadrants
// while the children still satisfy the size limits, and rejected when it
// cannot be split.
Decomposition decompose(const Image& image, const QuadtreeCriteria& criteria, double range_m,
                        const CameraModel& cam, double look_angle_rad = 0.0);

// index,x0,y0,size_px,mean,stddev,footprint_m,accepted
void write_roi_csv(const std::filesystem::path& path, const Decomposition& decomposition);

}  // namespace hda

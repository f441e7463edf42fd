#pragma once

#include "hda/image.hpp"

namespace hda {

// Candidate landing region in image coordinates. Quadtree output is always
// square; regions predicted into the second image need not be.
struct Roi {
  Rect rect;
  double mean_brightness = 0.0;
  double stddev_brightness = 0.0;
  double footprint_m = 0.0;  // smaller ground axis, meters
  int index = -1;            // -1 for rejected leaves
  bool accepted = false;

  int size_px() const { return rect.width; }
};

}  // namespace hda

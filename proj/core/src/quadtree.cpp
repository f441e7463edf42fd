#include "hda/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hda/error.hpp"
#include "hda/io.hpp"

namespace hda {

void QuadtreeCriteria::validate() const {
  if (min_size_px < 2) throw Error(ErrorCode::InvalidArgument, "quadtree min_size_px must be >= 2");
  if (!(min_footprint_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadtree min_footprint_m must be > 0");
  if (!(max_footprint_m >= min_footprint_m)) {
    throw Error(ErrorCode::InvalidArgument, "quadtree max_footprint_m must be >= min_footprint_m");
  }
  if (!(max_stddev >= 0.0)) throw Error(ErrorCode::InvalidArgument, "quadtree max_stddev must be >= 0");
  if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "quadtree max_depth must be >= 0");
}

RegionStats roi_stats(const Image& image, const Rect& rect) {
  if (rect.empty() || !image.bounds().contains(rect)) {
    throw Error(ErrorCode::OutOfBounds, "statistics rectangle outside image");
  }
  double sum = 0.0;
  for (int y = rect.y0; y < rect.y1(); ++y)
    for (int x = rect.x0; x < rect.x1(); ++x) sum += image(x, y);
  const double n = static_cast<double>(rect.area());
  const double mean = sum / n;
  double ss = 0.0;
  for (int y = rect.y0; y < rect.y1(); ++y)
    for (int x = rect.x0; x < rect.x1(); ++x) {
      const double d = image(x, y) - mean;
      ss += d * d;
    }
  return {mean, std::sqrt(ss / n)};
}

IntegralStats::IntegralStats(const Image& image)
    : width_(image.width()),
      height_(image.height()),
      sum_(static_cast<std::size_t>(width_ + 1) * (height_ + 1), 0),
      sum_sq_(sum_.size(), 0) {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  for (int y = 0; y < height_; ++y) {
    std::uint64_t row = 0, row_sq = 0;
    const std::uint8_t* src = image.row(y);
    for (int x = 0; x < width_; ++x) {
      const std::uint64_t v = src[x];
      row += v;
      row_sq += v * v;
      const std::size_t at = (y + 1) * stride + x + 1;
      sum_[at] = sum_[at - stride] + row;
      sum_sq_[at] = sum_sq_[at - stride] + row_sq;
    }
  }
}

std::uint64_t IntegralStats::sum(const std::vector<std::uint64_t>& t, const Rect& r) const {
  const std::size_t stride = static_cast<std::size_t>(width_) + 1;
  const auto at = [&](int x, int y) { return t[static_cast<std::size_t>(y) * stride + x]; };
  return at(r.x1(), r.y1()) + at(r.x0, r.y0) - at(r.x0, r.y1()) - at(r.x1(), r.y0);
}

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

RegionStats IntegralStats::stats(const Rect& rect) const {
  const auto n = static_cast<u128>(rect.area());
  const auto s = static_cast<u128>(sum(sum_, rect));
  const auto ss = static_cast<u128>(sum(sum_sq_, rect));
  // n * ss - s^2 >= 0 exactly (Cauchy-Schwarz on integers).
  const auto numerator = n * ss - s * s;
  const double nd = static_cast<double>(n);
  return {static_cast<double>(s) / nd, std::sqrt(static_cast<double>(numerator)) / nd};
}

Footprint footprint_of(const Rect& rect, double range_m, const CameraModel& cam, double look_angle_rad) {
  if (!(range_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "range must be positive");
  const double scale = range_m / cam.focal_length_px;
  return {rect.width * scale, rect.height * scale / std::cos(look_angle_rad)};
}

namespace {

struct Builder {
  const IntegralStats& stats;
  const QuadtreeCriteria& criteria;
  double range_m;
  const CameraModel& cam;
  double look;
  std::vector<Roi> accepted;
  std::vector<Roi> rejected;

  void visit(const Rect& rect, int depth) {
    const RegionStats st = stats.stats(rect);
    const Footprint fp = footprint_of(rect, range_m, cam, look);

    Roi roi;
    roi.rect = rect;
    roi.mean_brightness = st.mean;
    roi.stddev_brightness = st.stddev;
    roi.footprint_m = fp.min_axis();

    if (st.stddev <= criteria.max_stddev && st.mean >= criteria.min_mean &&
        roi.footprint_m >= criteria.min_footprint_m && roi.footprint_m <= criteria.max_footprint_m) {
      roi.accepted = true;
      accepted.push_back(roi);
      return;
    }

    const int half = rect.width / 2;
    const Rect child{rect.x0, rect.y0, half, half};
    const bool can_split = half >= criteria.min_size_px && depth < criteria.max_depth &&
                           rect.width % 2 == 0 &&
                           footprint_of(child, range_m, cam, look).min_axis() >= criteria.min_footprint_m;
    if (!can_split) {
      rejected.push_back(roi);
      return;
    }
    visit({rect.x0, rect.y0, half, half}, depth + 1);
    visit({rect.x0 + half, rect.y0, half, half}, depth + 1);
    visit({rect.x0, rect.y0 + half, half, half}, depth + 1);
    visit({rect.x0 + half, rect.y0 + half, half, half}, depth + 1);
  }
};

bool row_major(const Roi& a, const Roi& b) {
  if (a.rect.y0 != b.rect.y0) return a.rect.y0 < b.rect.y0;
  return a.rect.x0 < b.rect.x0;
}

}  // namespace

Decomposition decompose(const Image& image, const QuadtreeCriteria& criteria, double range_m,
                        const CameraModel& cam, double look_angle_rad) {
  criteria.validate();
  if (!(range_m > 0.0)) throw Error(ErrorCode::InvalidArgument, "range must be positive");

  Decomposition out;
  out.crop = centered_pow2_square(image.width(), image.height());
  if (out.crop.empty()) return out;

  const IntegralStats stats(image);
  Builder builder{stats, criteria, range_m, cam, look_angle_rad, {}, {}};
  builder.visit(out.crop, 0);

  out.rois = std::move(builder.accepted);
  out.rejected = std::move(builder.rejected);
  std::sort(out.rois.begin(), out.rois.end(), row_major);
  std::sort(out.rejected.begin(), out.rejected.end(), row_major);
  for (std::size_t i = 0; i < out.rois.size(); ++i) out.rois[i].index = static_cast<int>(i);
  return out;
}

void write_roi_csv(const std::filesystem::path& path, const Decomposition& d) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "index,x0,y0,size_px,mean,stddev,footprint_m,accepted\n";
  std::vector<const Roi*> all;
  for (const auto& r : d.rois) all.push_back(&r);
  for (const auto& r : d.rejected) all.push_back(&r);
  std::sort(all.begin(), all.end(), [](const Roi* a, const Roi* b) { return row_major(*a, *b); });
  for (const Roi* r : all) {
    out << r->index << ',' << r->rect.x0 << ',' << r->rect.y0 << ',' << r->rect.width << ','
        << fmt_double(r->mean_brightness) << ',' << fmt_double(r->stddev_brightness) << ','
        << fmt_double(r->footprint_m) << ',' << (r->accepted ? 1 : 0) << '\n';
  }
}

}  // namespace hda

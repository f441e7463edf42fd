#include "hda/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "hda/error.hpp"
#include "hda/io.hpp"
#include "hda/random.hpp"

namespace hda {

int hamming(const Descriptor& a, const Descriptor& b) {
  return std::popcount(a[0] ^ b[0]) + std::popcount(a[1] ^ b[1]) + std::popcount(a[2] ^ b[2]) +
         std::popcount(a[3] ^ b[3]);
}

namespace {

constexpr int kPatchRadius = 15;    // orientation moment radius
constexpr int kPatternExtent = 13;  // max |coordinate| of an unrotated test point
constexpr int kLevelBorder = 22;    // rotated pattern + blur + FAST ring

constexpr std::array<std::array<int, 2>, 16> kCircle = {{{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1},
                                                         {2, 2}, {1, 3}, {0, 3}, {-1, 3}, {-2, 2}, {-3, 1},
                                                         {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

struct TestPair {
  int x1, y1, x2, y2;
};

// Gaussian-distributed point pairs (BRIEF "G II" sampling) from a fixed seed.
const std::array<TestPair, 256>& test_pattern() {
  static const std::array<TestPair, 256> pattern = [] {
    std::array<TestPair, 256> p{};
    Rng rng(0x0b5eed5ULL);
    const double sigma = (2.0 * kPatchRadius + 1.0) / 5.0;
    auto coord = [&] {
      return static_cast<int>(std::lround(std::clamp(rng.normal(0.0, sigma), -1.0 * kPatternExtent,
                                                     1.0 * kPatternExtent)));
    };
    for (auto& t : p) {
      do {
        t = {coord(), coord(), coord(), coord()};
      } while (t.x1 == t.x2 && t.y1 == t.y2);
    }
    return p;
  }();
  return pattern;
}

ImageF resize_bilinear(const ImageF& src, int width, int height) {
  ImageF out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out(x, y) = sample_bilinear(src, (x + 0.5) * sx, (y + 0.5) * sy);
  return out;
}

// Separable [1 4 6 4 1]/16 blur with edge clamping.
ImageF blur5(const ImageF& src) {
  const int w = src.width(), h = src.height();
  ImageF tmp(w, h), out(w, h);
  constexpr float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * src(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = s;
    }
  return out;
}

bool fast9(const ImageF& img, int x, int y, float threshold) {
  const float p = img(x, y);
  const float hi = p + threshold;
  const float lo = p - threshold;
  // Quick rejection on the compass points: a 9-arc covers at least 2 of them.
  int bright = 0, dark = 0;
  for (int k = 0; k < 16; k += 4) {
    const float v = img(x + kCircle[k][0], y + kCircle[k][1]);
    bright += v > hi;
    dark += v < lo;
  }
  if (bright < 2 && dark < 2) return false;

  std::array<int, 16> state{};
  for (int k = 0; k < 16; ++k) {
    const float v = img(x + kCircle[k][0], y + kCircle[k][1]);
    state[k] = v > hi ? 1 : (v < lo ? -1 : 0);
  }
  for (const int want : {1, -1}) {
    int run = 0;
    for (int k = 0; k < 32; ++k) {
      if (state[k & 15] == want) {
        if (++run >= 9) return true;
      } else {
        run = 0;
      }
    }
  }
  return false;
}

double harris(const ImageF& img, int x, int y, double k) {
  double a = 0, b = 0, c = 0;
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) {
      const int px = x + dx, py = y + dy;
      const double ix = 0.5 * (img(px + 1, py) - img(px - 1, py));
      const double iy = 0.5 * (img(px, py + 1) - img(px, py - 1));
      a += ix * ix;
      b += iy * iy;
      c += ix * iy;
    }
  return a * b - c * c - k * (a + b) * (a + b);
}

// Least-squares point q with g_i . (q - p_i) = 0 over the Harris window;
// exact for an ideal corner. Returns the integer position when the window is
// ill-conditioned or the shift would leave the pixel neighbourhood.
Eigen::Vector2d subpixel_corner(const ImageF& img, int x, int y) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) {
      const int px = x + dx, py = y + dy;
      const Eigen::Vector2d g(0.5 * (img(px + 1, py) - img(px - 1, py)), 0.5 * (img(px, py + 1) - img(px, py - 1)));
      const Eigen::Matrix2d ggt = g * g.transpose();
      a += ggt;
      b += ggt * Eigen::Vector2d(dx, dy);
    }
  const double det = a.determinant();
  const double tr = a.trace();
  if (!(det > 1e-3 * tr * tr)) return {x, y};
  const Eigen::Vector2d d = a.inverse() * b;
  if (std::abs(d.x()) > 2.0 || std::abs(d.y()) > 2.0) return {x, y};
  return {x + d.x(), y + d.y()};
}

float intensity_centroid_angle(const ImageF& img, int x, int y) {
  double m01 = 0, m10 = 0;
  for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy) {
    const int span = static_cast<int>(std::sqrt(static_cast<double>(kPatchRadius * kPatchRadius - dy * dy)));
    for (int dx = -span; dx <= span; ++dx) {
      const double v = img(x + dx, y + dy);
      m10 += dx * v;
      m01 += dy * v;
    }
  }
  return static_cast<float>(std::atan2(m01, m10));
}

Descriptor describe(const ImageF& smooth, int x, int y, float angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Descriptor d{};
  const auto& pattern = test_pattern();
  auto sample = [&](int px, int py) {
    const int rx = static_cast<int>(std::lround(c * px - s * py));
    const int ry = static_cast<int>(std::lround(s * px + c * py));
    return smooth(x + rx, y + ry);
  };
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const TestPair& t = pattern[i];
    if (sample(t.x1, t.y1) < sample(t.x2, t.y2)) d[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  return d;
}

struct Candidate {
  double response;
  int level;
  int x;
  int y;
};

}  // namespace

std::vector<Keypoint> detect_and_describe(const Image& image, const Rect& roi, const OrbParams& params) {
  const Rect clipped = roi.intersect(image.bounds());
  if (clipped.empty() || params.max_keypoints <= 0 || params.levels < 1) return {};

  const double top_scale = std::pow(params.scale_factor, params.levels - 1);
  const int border = static_cast<int>(std::ceil(kLevelBorder * top_scale)) + 2;
  const Rect window = Rect{clipped.x0 - border, clipped.y0 - border, clipped.width + 2 * border,
                           clipped.height + 2 * border}
                          .intersect(image.bounds());

  std::vector<ImageF> levels;
  std::vector<double> scales;
  levels.push_back(to_float(crop(image, window)));
  scales.push_back(1.0);
  for (int l = 1; l < params.levels; ++l) {
    const double s = std::pow(params.scale_factor, l);
    const int w = static_cast<int>(std::lround(window.width / s));
    const int h = static_cast<int>(std::lround(window.height / s));
    if (w < 2 * kLevelBorder + 1 || h < 2 * kLevelBorder + 1) break;
    levels.push_back(resize_bilinear(levels.front(), w, h));
    scales.push_back(static_cast<double>(window.width) / w);
  }

  std::vector<Candidate> candidates;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const ImageF& img = levels[l];
    const int w = img.width(), h = img.height();
    if (w <= 2 * kLevelBorder || h <= 2 * kLevelBorder) continue;
    Raster<double> score(w, h, -std::numeric_limits<double>::infinity());
    for (int y = kLevelBorder; y < h - kLevelBorder; ++y) {
      const double v0 = (y + 0.5) * scales[l] + window.y0;
      if (v0 < clipped.y0 - 1 || v0 > clipped.y1() + 1) continue;
      for (int x = kLevelBorder; x < w - kLevelBorder; ++x) {
        const double u0 = (x + 0.5) * scales[l] + window.x0;
        if (u0 < clipped.x0 - 1 || u0 > clipped.x1() + 1) continue;
        if (fast9(img, x, y, params.fast_threshold)) score(x, y) = harris(img, x, y, params.harris_k);
      }
    }
    for (int y = kLevelBorder; y < h - kLevelBorder; ++y) {
      for (int x = kLevelBorder; x < w - kLevelBorder; ++x) {
        const double s = score(x, y);
        if (!(s > 0.0)) continue;
        const double u0 = (x + 0.5) * scales[l] + window.x0;
        const double v0 = (y + 0.5) * scales[l] + window.y0;
        if (u0 < clipped.x0 || u0 >= clipped.x1() || v0 < clipped.y0 || v0 >= clipped.y1()) continue;
        bool is_max = true;
        for (int dy = -1; dy <= 1 && is_max; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double n = score(x + dx, y + dy);
            const bool earlier = dy < 0 || (dy == 0 && dx < 0);
            if (n > s || (earlier && n == s)) {
              is_max = false;
              break;
            }
          }
        if (is_max) candidates.push_back({s, static_cast<int>(l), x, y});
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.level != b.level) return a.level < b.level;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (candidates.size() > static_cast<std::size_t>(params.max_keypoints)) {
    candidates.resize(static_cast<std::size_t>(params.max_keypoints));
  }

  std::vector<ImageF> smoothed(levels.size());
  std::vector<Keypoint> out;
  out.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    const auto l = static_cast<std::size_t>(c.level);
    if (smoothed[l].empty()) smoothed[l] = blur5(levels[l]);
    Keypoint kp;
    const Eigen::Vector2d q = subpixel_corner(levels[l], c.x, c.y);
    kp.px = {(q.x() + 0.5) * scales[l] + window.x0, (q.y() + 0.5) * scales[l] + window.y0};
    if (kp.px.x() < clipped.x0 || kp.px.x() >= clipped.x1() || kp.px.y() < clipped.y0 || kp.px.y() >= clipped.y1()) {
      kp.px = {(c.x + 0.5) * scales[l] + window.x0, (c.y + 0.5) * scales[l] + window.y0};
    }
    kp.response = static_cast<float>(c.response);
    kp.octave = c.level;
    kp.orientation = intensity_centroid_angle(levels[l], c.x, c.y);
    kp.descriptor = describe(smoothed[l], c.x, c.y, kp.orientation);
    out.push_back(kp);
  }
  return out;
}

std::vector<Descriptor> descriptors_of(std::span<const Keypoint> keypoints) {
  std::vector<Descriptor> d;
  d.reserve(keypoints.size());
  for (const auto& k : keypoints) d.push_back(k.descriptor);
  return d;
}

std::vector<Match> match(std::span<const Descriptor> desc1, std::span<const Descriptor> desc2, double ratio,
                         bool cross_check) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "ratio must be in (0, 1)");
  std::vector<Match> out;
  if (desc1.empty() || desc2.empty()) return out;

  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<int> best2_dist(desc2.size(), kNone);
  std::vector<int> best2_idx(desc2.size(), -1);
  struct Best {
    int idx = -1, dist = kNone, second = kNone;
  };
  std::vector<Best> best1(desc1.size());

  for (std::size_t i = 0; i < desc1.size(); ++i) {
    Best& b = best1[i];
    for (std::size_t j = 0; j < desc2.size(); ++j) {
      const int d = hamming(desc1[i], desc2[j]);
      if (d < b.dist) {
        b.second = b.dist;
        b.dist = d;
        b.idx = static_cast<int>(j);
      } else if (d < b.second) {
        b.second = d;
      }
      if (d < best2_dist[j]) {
        best2_dist[j] = d;
        best2_idx[j] = static_cast<int>(i);
      }
    }
  }

  for (std::size_t i = 0; i < desc1.size(); ++i) {
    const Best& b = best1[i];
    if (b.idx < 0) continue;
    if (b.second != kNone && !(b.dist < ratio * b.second)) continue;
    if (cross_check && best2_idx[static_cast<std::size_t>(b.idx)] != static_cast<int>(i)) continue;
    out.push_back({static_cast<int>(i), b.idx, b.dist, 0.0});
  }
  return out;
}

Eigen::Matrix2d plane_induced_jacobian(const Eigen::Vector2d& px1, const RelativePose& rel, const CameraModel& cam,
                                       double range_m, const Eigen::Vector3d& plane_normal_cam1) {
  const Eigen::Matrix3d rot = rel.rotation.toRotationMatrix();
  const Eigen::Vector3d t21 = rel.t21();
  auto map = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    const auto ground = intersect_range_plane(cam, p, range_m, plane_normal_cam1);
    if (!ground) throw Error(ErrorCode::OffImage, "pixel ray misses the terrain plane");
    const Eigen::Vector3d c2 = rot * *ground + t21;
    return cam.principal_point + cam.focal_length_px * c2.head<2>() / c2.z();
  };
  Eigen::Matrix2d j;
  j.col(0) = 0.5 * (map(px1 + Eigen::Vector2d(1, 0)) - map(px1 - Eigen::Vector2d(1, 0)));
  j.col(1) = 0.5 * (map(px1 + Eigen::Vector2d(0, 1)) - map(px1 - Eigen::Vector2d(0, 1)));
  return j;
}

RefinedMatches refine_matches(const ImageF& image1, const ImageF& image2, std::span<const Match> matches,
                              std::span<const Keypoint> kps1, std::span<const Keypoint> kps2,
                              const RefineParams& params, const WarpPredictor& warp) {
  RefinedMatches out;
  out.kps2.assign(kps2.begin(), kps2.end());
  const int r = params.half_window;
  const int n = (2 * r + 1) * (2 * r + 1);
  std::vector<double> tmpl(static_cast<std::size_t>(n));
  std::vector<Eigen::Vector2d> offsets(tmpl.size());
  {
    int k = 0;
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) offsets[static_cast<std::size_t>(k++)] = Eigen::Vector2d(dx, dy);
  }

  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  for (const Match& m : matches) {
    const Eigen::Vector2d p1 = kps1[static_cast<std::size_t>(m.idx1)].px;
    const Eigen::Vector2d start = kps2[static_cast<std::size_t>(m.idx2)].px;

    // Template statistics and texture strength in image 1.
    Eigen::Matrix2d structure = Eigen::Matrix2d::Zero();
    double tmean = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const double u = p1.x() + offsets[k].x(), v = p1.y() + offsets[k].y();
      tmpl[k] = sample_bilinear(image1, u, v);
      const Eigen::Vector2d g(0.5 * (sample_bilinear(image1, u + 1, v) - sample_bilinear(image1, u - 1, v)),
                              0.5 * (sample_bilinear(image1, u, v + 1) - sample_bilinear(image1, u, v - 1)));
      structure += g * g.transpose();
      tmean += tmpl[k];
    }
    tmean /= n;
    double tvar = 0.0;
    for (double t : tmpl) tvar += (t - tmean) * (t - tmean);
    tvar /= n;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(structure / n);
    if (eig.eigenvalues().minCoeff() < params.min_eigenvalue) continue;

    Eigen::Matrix2d a0 = Eigen::Matrix2d::Identity();
    if (warp) {
      try {
        a0 = warp(p1);
      } catch (const Error&) {
        continue;
      }
    }
    Eigen::Matrix2d a = a0;
    Eigen::Vector2d p2 = start;
    bool converged = false;
    double residual = 0.0;
    std::vector<double> values(tmpl.size());
    std::vector<Eigen::Vector2d> grads(tmpl.size());
    for (int it = 0; it < params.max_iterations; ++it) {
      double wmean = 0.0;
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const Eigen::Vector2d q = p2 + a * offsets[k];
        values[k] = sample_bilinear(image2, q.x(), q.y());
        grads[k] = {0.5 * (sample_bilinear(image2, q.x() + 1, q.y()) - sample_bilinear(image2, q.x() - 1, q.y())),
                    0.5 * (sample_bilinear(image2, q.x(), q.y() + 1) - sample_bilinear(image2, q.x(), q.y() - 1))};
        wmean += values[k];
      }
      wmean /= n;
      Mat6 h = Mat6::Zero();
      Vec6 b = Vec6::Zero();
      residual = 0.0;
      for (std::size_t k = 0; k < offsets.size(); ++k) {
        const Eigen::Vector2d& g = grads[k];
        const Eigen::Vector2d& o = offsets[k];
        Vec6 j;
        j << g.x() * o.x(), g.x() * o.y(), g.y() * o.x(), g.y() * o.y(), g.x(), g.y();
        const double e = (values[k] - wmean) - (tmpl[k] - tmean);
        h += j * j.transpose();
        b += j * e;
        residual += e * e;
      }
      const Vec6 delta = h.ldlt().solve(-b);
      if (!delta.allFinite()) break;
      a(0, 0) += delta(0);
      a(0, 1) += delta(1);
      a(1, 0) += delta(2);
      a(1, 1) += delta(3);
      p2 += delta.tail<2>();
      if ((p2 - start).norm() > params.max_shift_px) break;
      if ((a - a0).norm() > params.max_warp_change) break;
      if (delta.tail<2>().norm() < 1e-3 && delta.head<4>().norm() < 1e-4) {
        converged = true;
        break;
      }
    }
    if (!converged || residual / n > params.max_residual * params.max_residual * tvar) continue;
    out.kps2[static_cast<std::size_t>(m.idx2)].px = p2;
    out.matches.push_back(m);
  }
  return out;
}

void write_keypoints_csv(const std::filesystem::path& path, std::span<const Keypoint> keypoints) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "index,u,v,response,orientation,octave\n";
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const auto& k = keypoints[i];
    out << i << ',' << fmt_double(k.px.x()) << ',' << fmt_double(k.px.y()) << ',' << fmt_double(k.response)
        << ',' << fmt_double(k.orientation) << ',' << k.octave << '\n';
  }
}

void write_matches_csv(const std::filesystem::path& path, std::span<const Match> matches,
                       std::span<const Keypoint> kps1, std::span<const Keypoint> kps2) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "idx1,idx2,u1,v1,u2,v2,hamming,epipolar_residual_px\n";
  for (const auto& m : matches) {
    const auto& a = kps1[static_cast<std::size_t>(m.idx1)].px;
    const auto& b = kps2[static_cast<std::size_t>(m.idx2)].px;
    out << m.idx1 << ',' << m.idx2 << ',' << fmt_double(a.x()) << ',' << fmt_double(a.y()) << ','
        << fmt_double(b.x()) << ',' << fmt_double(b.y()) << ',' << m.hamming << ','
        << fmt_double(m.epipolar_residual_px) << '\n';
  }
}

}  // namespace hda

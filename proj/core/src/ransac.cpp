#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "hda/error.hpp"
#include "hda/features.hpp"
#include "hda/random.hpp"

namespace hda {

namespace {

Eigen::Vector3d homog(const Eigen::Vector2d& p) { return {p.x(), p.y(), 1.0}; }

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
Eigen::Matrix3d normalizer(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - c).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0.0, -s * c.x(), 0.0, s, -s * c.y(), 0.0, 0.0, 1.0;
  return t;
}

}  // namespace

double symmetric_epipolar_distance(const Eigen::Matrix3d& f, const Eigen::Vector2d& x1, const Eigen::Vector2d& x2) {
  const Eigen::Vector3d a = homog(x1);
  const Eigen::Vector3d b = homog(x2);
  const Eigen::Vector3d l2 = f * a;
  const Eigen::Vector3d l1 = f.transpose() * b;
  const double e = b.dot(l2);
  const double n2 = l2.head<2>().squaredNorm();
  const double n1 = l1.head<2>().squaredNorm();
  if (n1 <= 0.0 || n2 <= 0.0) return std::abs(e) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return std::sqrt(0.5 * (e * e / n1 + e * e / n2));
}

Eigen::Matrix3d fundamental_eight_point(std::span<const Eigen::Vector2d> x1, std::span<const Eigen::Vector2d> x2) {
  if (x1.size() != x2.size()) throw Error(ErrorCode::InvalidArgument, "point lists differ in length");
  if (x1.size() < 8) throw Error(ErrorCode::TooFewMatches, "eight-point estimate needs >= 8 pairs");
  const Eigen::Matrix3d t1 = normalizer(x1);
  const Eigen::Matrix3d t2 = normalizer(x2);

  Eigen::MatrixXd a(static_cast<Eigen::Index>(x1.size()), 9);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const Eigen::Vector3d p = t1 * homog(x1[i]);
    const Eigen::Vector3d q = t2 * homog(x2[i]);
    const auto r = static_cast<Eigen::Index>(i);
    a.row(r) << q.x() * p.x(), q.x() * p.y(), q.x(), q.y() * p.x(), q.y() * p.y(), q.y(), p.x(), p.y(), 1.0;
  }
  Eigen::Matrix<double, 9, 9> ata = a.transpose() * a;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(ata);
  const Eigen::Matrix<double, 9, 1> v = eig.eigenvectors().col(0);
  Eigen::Matrix3d f;
  f << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sv = svd.singularValues();
  sv(2) = 0.0;
  f = svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
  f = t2.transpose() * f * t1;
  const double n = f.norm();
  return n > 0.0 ? Eigen::Matrix3d(f / n) : f;
}

Eigen::Matrix3d fundamental_from_motion(const RelativePose& rel, const CameraModel& cam) {
  Eigen::Matrix3d k;
  k << cam.focal_length_px, 0.0, cam.principal_point.x(), 0.0, cam.focal_length_px, cam.principal_point.y(), 0.0,
      0.0, 1.0;
  const Eigen::Matrix3d kinv = k.inverse();
  const Eigen::Matrix3d e = skew(rel.t21()) * rel.rotation.toRotationMatrix();
  return kinv.transpose() * e * kinv;
}

RansacOutcome ransac_reject(std::span<const Match> matches, std::span<const Keypoint> kps1,
                            std::span<const Keypoint> kps2, const RansacParams& params) {
  if (matches.size() < 8) throw Error(ErrorCode::TooFewMatches, "RANSAC needs >= 8 matches");
  const std::size_t n = matches.size();
  std::vector<Eigen::Vector2d> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = kps1[static_cast<std::size_t>(matches[i].idx1)].px;
    x2[i] = kps2[static_cast<std::size_t>(matches[i].idx2)].px;
  }

  auto consensus = [&](const Eigen::Matrix3d& f, std::vector<char>& mask) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = symmetric_epipolar_distance(f, x1[i], x2[i]) < params.threshold_px;
      count += static_cast<std::size_t>(mask[i]);
    }
    return count;
  };

  Rng rng(params.seed);
  std::vector<char> best_mask(n, 0), mask(n, 0);
  std::size_t best_count = 0;
  Eigen::Matrix3d best_f = Eigen::Matrix3d::Zero();
  std::array<Eigen::Vector2d, 8> s1, s2;
  std::vector<std::size_t> idx(n);
  int iterations = 0;
  for (; iterations < params.max_iters; ++iterations) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
      std::swap(idx[k], idx[j]);
      s1[k] = x1[idx[k]];
      s2[k] = x2[idx[k]];
    }
    const Eigen::Matrix3d f = fundamental_eight_point(s1, s2);
    const std::size_t count = consensus(f, mask);
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
      best_f = f;
      if (best_count == n) {
        ++iterations;
        break;
      }
    }
  }

  // One refit on the consensus set; kept only when it does not shrink support.
  if (best_count >= 8) {
    std::vector<Eigen::Vector2d> i1, i2;
    for (std::size_t i = 0; i < n; ++i)
      if (best_mask[i]) {
        i1.push_back(x1[i]);
        i2.push_back(x2[i]);
      }
    const Eigen::Matrix3d f = fundamental_eight_point(i1, i2);
    if (consensus(f, mask) >= best_count) {
      best_count = consensus(f, best_mask);
      best_f = f;
    }
  }

  RansacOutcome out;
  out.fundamental = best_f;
  out.iterations = iterations;
  for (std::size_t i = 0; i < n; ++i)
    if (best_mask[i]) {
      Match m = matches[i];
      m.epipolar_residual_px = symmetric_epipolar_distance(best_f, x1[i], x2[i]);
      out.inliers.push_back(m);
    }
  return out;
}

std::vector<Match> nav_epipolar_reject(std::span<const Match> matches, std::span<const Keypoint> kps1,
                                       std::span<const Keypoint> kps2, const RelativePose& rel,
                                       const CameraModel& cam, double threshold_px) {
  if (!(rel.baseline_m > 0.0)) throw Error(ErrorCode::ZeroBaseline, "epipolar geometry undefined");
  const Eigen::Matrix3d f = fundamental_from_motion(rel, cam);
  std::vector<Match> out;
  for (const Match& m : matches) {
    const double d = symmetric_epipolar_distance(f, kps1[static_cast<std::size_t>(m.idx1)].px,
                                                 kps2[static_cast<std::size_t>(m.idx2)].px);
    if (d < threshold_px) {
      Match kept = m;
      kept.epipolar_residual_px = d;
      out.push_back(kept);
    }
  }
  return out;
}

}  // namespace hda

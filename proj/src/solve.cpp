#include "bbsreg/solve.hpp"

#include <Eigen/SVD>
#include <utility>

namespace bbsreg {

Correspondences::Correspondences(PointCloud src, PointCloud tgt, Eigen::VectorXd w)
    : source(std::move(src)), target(std::move(tgt)), weights(std::move(w)) {
  if (source.size() != target.size() || source.size() != weights.size()) {
    fail(Errc::SizeMismatch, "correspondence sizes differ");
  }
  if (!weights.allFinite() || (weights.array() < 0.0).any()) {
    fail(Errc::InvalidArgument, "weights must be finite and nonnegative");
  }
  if (!(weights.sum() > 0.0)) {
    fail(Errc::InvalidArgument, "weights must not all be zero");
  }
}

RigidTransform weighted_procrustes(const Correspondences& c) {
  const Eigen::Index n = c.source.size();
  if (n < 3) fail(Errc::DegenerateGeometry, "need at least three correspondences");

  const double wsum = c.weights.sum();
  Vec3 p_bar = Vec3::Zero();
  Vec3 q_bar = Vec3::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    p_bar += c.weights[i] * c.source.point(i);
    q_bar += c.weights[i] * c.target.point(i);
  }
  p_bar /= wsum;
  q_bar /= wsum;

  Mat3 h = Mat3::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    h += c.weights[i] * (c.source.point(i) - p_bar) *
         (c.target.point(i) - q_bar).transpose();
  }

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s[0] > 0.0) || s[1] <= s[0] * 1e-12) {
    fail(Errc::DegenerateGeometry, "weighted support is collinear or coincident");
  }

  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  const double d = (v * u.transpose()).determinant();  // reflection guard
  RigidTransform out;
  out.rotation = v * Vec3(1.0, 1.0, d).asDiagonal() * u.transpose();
  out.translation = q_bar - out.rotation * p_bar;
  return out;
}

}  // namespace bbsreg

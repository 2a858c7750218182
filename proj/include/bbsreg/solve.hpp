#pragma once

#include "bbsreg/core.hpp"

namespace bbsreg {

/// Weighted point pairs (p_i, q_i, gamma_i). Weights are nonnegative,
/// finite, and not all zero; clouds have equal size.
struct Correspondences {
  PointCloud source;
  PointCloud target;
  Eigen::VectorXd weights;

  Correspondences(PointCloud src, PointCloud tgt, Eigen::VectorXd w);
};

/// Closed-form minimizer of sum_i gamma_i ||R p_i + t - q_i||^2 over
/// SO(3) x R^3: weighted centroids, cross-covariance
/// H = sum gamma (p - pbar)(q - qbar)^T, SVD H = U S V^T,
/// R = V diag(1, 1, det(VU^T)) U^T, t = qbar - R pbar.
/// Throws DegenerateGeometry when the weighted support is collinear or
/// coincident (rank(H) < 2).
RigidTransform weighted_procrustes(const Correspondences& c);

}  // namespace bbsreg

#pragma once

#include "bbsreg/core.hpp"
#include "bbsreg/embed.hpp"

namespace bbsreg {

/// Pairwise Euclidean distances, tagged by the space they live in.
struct DistanceMatrix {
  enum class Kind { Spatial, Feature };

  Eigen::MatrixXd values;  // N x M, nonnegative
  Kind kind = Kind::Spatial;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

DistanceMatrix distance_matrix(const PointCloud& a, const PointCloud& b);
DistanceMatrix distance_matrix(const FeatureCloud& a, const FeatureCloud& b);

/// Hard best-buddy matrix: B(i,j) = 1 iff row i's minimum sits in column j
/// AND column j's minimum sits in row i. Argmin ties break to the lowest
/// index, so each row and column holds at most one 1.
Eigen::MatrixXi hard_bbs(const DistanceMatrix& d);

/// xi times the median over points of the distance to the nearest other
/// point in the same feature cloud (self excluded). Throws DegenerateCloud
/// when the result would not be positive.
double compute_alpha(const FeatureCloud& features, double xi);

/// SoftBBS: element-wise product of the column-wise and row-wise softmax
/// of -D*/alpha. Computed from max-shifted log-softmaxes, so no overflow
/// for any finite input.
Eigen::MatrixXd soft_bbs(const DistanceMatrix& d_star, double alpha);

/// Row-normalized pointer: pi(i) = B_tilde row i / its sum.
/// Requires strictly positive entries.
Eigen::MatrixXd soft_mapping(const Eigen::MatrixXd& b_tilde);

/// q_hat_i = sum_j pi(i,j) * q_j; one virtual target per source point.
PointCloud virtual_targets(const Eigen::MatrixXd& pi_tilde, const PointCloud& q);

/// gamma_i = sum_j B_tilde(i,j) * exp(-D(i,j)/temperature), with D the
/// spatial distance matrix.
Eigen::VectorXd gamma_weights(const Eigen::MatrixXd& b_tilde,
                              const DistanceMatrix& d_spatial,
                              double temperature);

/// Everything one matching pass produces.
struct SoftMatch {
  Eigen::MatrixXd b_tilde;   // N x M, in (0, 1)
  Eigen::MatrixXd pi_tilde;  // N x M, rows sum to 1
  PointCloud q_hat;          // N virtual targets
  Eigen::VectorXd gamma;     // N correspondence weights
  double alpha = 0.0;
  double temperature = 0.0;
};

/// Full pass: embed both clouds, D* and alpha in feature space, SoftBBS,
/// soft mapping, virtual targets; gamma always uses the spatial distances
/// between p and q. Identity embedding makes the feature distances equal
/// the spatial ones, which is exactly the 3D-space matching mode.
SoftMatch match_pass(const PointCloud& p, const PointCloud& q,
                     const EmbeddingKind& embedding, double xi,
                     double temperature);

/// Same pass over externally supplied features (row i of fp embeds p[i]).
SoftMatch match_pass(const PointCloud& p, const PointCloud& q,
                     const FeatureCloud& fp, const FeatureCloud& fq, double xi,
                     double temperature);

}  // namespace bbsreg

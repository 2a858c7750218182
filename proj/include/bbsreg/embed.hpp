#pragma once

#include <string>

#include "bbsreg/core.hpp"

namespace bbsreg {

/// Per-point embedding vectors, one row per source point, same index order.
struct FeatureCloud {
  Eigen::MatrixXd features;  // N x d, d >= 3

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// Which embedding stands in for the learned network.
struct EmbeddingKind {
  enum class Type { Identity, LocalGeometry };

  Type type = Type::Identity;
  int k = 16;  // LocalGeometry neighborhood size, >= 4

  static EmbeddingKind identity() { return {Type::Identity, 0}; }
  static EmbeddingKind local_geometry(int k = 16) {
    return {Type::LocalGeometry, k};
  }
};

/// Identity: features are the raw coordinates (d = 3).
///
/// LocalGeometry (d = 7): raw coordinates, then the eigenvalues of the
/// covariance of the k nearest neighbors (the point itself included),
/// sorted descending and normalized to sum 1, then the distance from the
/// point to its neighborhood centroid. The last four components are
/// invariant under rigid motion. Throws TooFewPoints when the cloud is
/// smaller than k.
FeatureCloud embed(const PointCloud& cloud, const EmbeddingKind& kind);

/// Reads a precomputed feature table: one row per point, whitespace
/// separated floats, '#' comment lines ignored. Row count must match
/// expected_rows (SizeMismatch otherwise); all rows must share one width.
FeatureCloud load_feature_table(const std::string& path,
                                Eigen::Index expected_rows);

}  // namespace bbsreg

#include "bbsreg/embed.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <vector>

namespace bbsreg {

namespace {

FeatureCloud embed_identity(const PointCloud& cloud) {
  return FeatureCloud{cloud.points()};
}

FeatureCloud embed_local_geometry(const PointCloud& cloud, int k) {
  if (k < 4) fail(Errc::InvalidArgument, "LocalGeometry requires k >= 4");
  const Eigen::Index n = cloud.size();
  if (n < k) fail(Errc::TooFewPoints, "cloud smaller than neighborhood size");

  Eigen::MatrixXd out(n, 7);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd d2 =
        (cloud.points().rowwise() - cloud.points().row(i)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                        return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
                      });

    Vec3 mean = Vec3::Zero();
    for (int j = 0; j < k; ++j) mean += cloud.point(order[static_cast<std::size_t>(j)]);
    mean /= static_cast<double>(k);

    Mat3 cov = Mat3::Zero();
    for (int j = 0; j < k; ++j) {
      Vec3 c = cloud.point(order[static_cast<std::size_t>(j)]) - mean;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(k);

    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 lambda = eig.eigenvalues().reverse();  // descending
    lambda = lambda.cwiseMax(0.0);
    const double trace = lambda.sum();
    if (trace > 0.0) lambda /= trace;  // coincident neighborhood keeps zeros

    out.block<1, 3>(i, 0) = cloud.points().row(i);
    out.block<1, 3>(i, 3) = lambda.transpose();
    out(i, 6) = (cloud.point(i) - mean).norm();
  }
  return FeatureCloud{std::move(out)};
}

}  // namespace

FeatureCloud embed(const PointCloud& cloud, const EmbeddingKind& kind) {
  switch (kind.type) {
    case EmbeddingKind::Type::Identity:
      return embed_identity(cloud);
    case EmbeddingKind::Type::LocalGeometry:
      return embed_local_geometry(cloud, kind.k);
  }
  fail(Errc::InvalidArgument, "unknown embedding kind");
}

FeatureCloud load_feature_table(const std::string& path,
                                Eigen::Index expected_rows) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open feature table: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p >= end || *p == '#') break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        fail(Errc::ParseError,
             "bad float in feature table at line " + std::to_string(lineno));
      }
      row.push_back(v);
      p = next;
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(Errc::ParseError,
           "inconsistent column count at line " + std::to_string(lineno));
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<Eigen::Index>(rows.size()) != expected_rows) {
    fail(Errc::SizeMismatch, "feature table row count does not match cloud");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(rows.front().size());
  if (dim < 3) fail(Errc::ParseError, "feature dimension must be >= 3");
  Eigen::MatrixXd features(expected_rows, dim);
  for (Eigen::Index i = 0; i < expected_rows; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  if (!features.allFinite()) {
    fail(Errc::ParseError, "feature table contains non-finite values");
  }
  return FeatureCloud{std::move(features)};
}

}  // namespace bbsreg

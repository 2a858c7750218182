#include "bbsreg/match.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bbsreg {

namespace {

// Squared distances via the norm expansion; one GEMM plus cheap passes.
Eigen::MatrixXd pairwise_squared(const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  const Eigen::VectorXd a_sq = a.rowwise().squaredNorm();
  const Eigen::VectorXd b_sq = b.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * (a * b.transpose());
  d.colwise() += a_sq;
  d.rowwise() += b_sq.transpose();
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b) {
  return pairwise_squared(a, b).cwiseSqrt();
}

// Softmax of -d/alpha down each column (normalizes over the row index),
// max-shifted so no overflow occurs for any finite input.
Eigen::MatrixXd softmax_cols(const Eigen::MatrixXd& scaled) {
  Eigen::MatrixXd out(scaled.rows(), scaled.cols());
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double mx = scaled.col(j).maxCoeff();
    out.col(j) = (scaled.col(j).array() - mx).exp();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

}  // namespace

DistanceMatrix distance_matrix(const PointCloud& a, const PointCloud& b) {
  return {pairwise_distances(a.points(), b.points()),
          DistanceMatrix::Kind::Spatial};
}

DistanceMatrix distance_matrix(const FeatureCloud& a, const FeatureCloud& b) {
  if (a.dim() != b.dim()) {
    fail(Errc::DimMismatch, "feature dimensions differ");
  }
  return {pairwise_distances(a.features, b.features),
          DistanceMatrix::Kind::Feature};
}

Eigen::MatrixXi hard_bbs(const DistanceMatrix& d) {
  const Eigen::Index n = d.rows();
  const Eigen::Index m = d.cols();
  std::vector<Eigen::Index> row_argmin(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> col_argmin(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < m; ++j) {
      if (d.values(i, j) < d.values(i, best)) best = j;
    }
    row_argmin[static_cast<std::size_t>(i)] = best;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (d.values(i, j) < d.values(best, j)) best = i;
    }
    col_argmin[static_cast<std::size_t>(j)] = best;
  }
  Eigen::MatrixXi b = Eigen::MatrixXi::Zero(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = row_argmin[static_cast<std::size_t>(i)];
    if (col_argmin[static_cast<std::size_t>(j)] == i) b(i, j) = 1;
  }
  return b;
}

double compute_alpha(const FeatureCloud& features, double xi) {
  if (xi <= 0.0) fail(Errc::InvalidArgument, "xi must be positive");
  const Eigen::Index n = features.size();
  if (n < 2) fail(Errc::TooFewPoints, "alpha needs at least two points");

  // Minima survive squaring, so work in the squared domain.
  const Eigen::MatrixXd d2 =
      pairwise_squared(features.features, features.features);
  std::vector<double> nn(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j) continue;  // the formula's min would be 0 at i == j
      if (d2(i, j) < best) best = d2(i, j);
    }
    nn[static_cast<std::size_t>(j)] = std::sqrt(best);
  }
  std::sort(nn.begin(), nn.end());
  const std::size_t half = nn.size() / 2;
  const double median =
      (nn.size() % 2 == 1) ? nn[half] : 0.5 * (nn[half - 1] + nn[half]);
  const double alpha = xi * median;
  if (!(alpha > 0.0)) {
    fail(Errc::DegenerateCloud, "all points coincide; alpha would be zero");
  }
  return alpha;
}

Eigen::MatrixXd soft_bbs(const DistanceMatrix& d_star, double alpha) {
  if (!(alpha > 0.0)) fail(Errc::InvalidArgument, "alpha must be positive");
  const Eigen::MatrixXd scaled = -d_star.values / alpha;
  const Eigen::MatrixXd col_factor = softmax_cols(scaled);
  const Eigen::MatrixXd row_factor =
      softmax_cols(scaled.transpose()).transpose();
  return col_factor.cwiseProduct(row_factor);
}

Eigen::MatrixXd soft_mapping(const Eigen::MatrixXd& b_tilde) {
  if ((b_tilde.array() <= 0.0).any()) {
    fail(Errc::InvalidArgument, "soft mapping requires strictly positive entries");
  }
  const Eigen::VectorXd row_sums = b_tilde.rowwise().sum();
  return b_tilde.array().colwise() / row_sums.array();
}

PointCloud virtual_targets(const Eigen::MatrixXd& pi_tilde, const PointCloud& q) {
  if (pi_tilde.cols() != q.size()) {
    fail(Errc::SizeMismatch, "mapping columns do not match target size");
  }
  // Column traversal keeps each row's accumulation in ascending j order.
  PointMatrix out = PointMatrix::Zero(pi_tilde.rows(), 3);
  for (Eigen::Index j = 0; j < pi_tilde.cols(); ++j) {
    out.col(0) += pi_tilde.col(j) * q.points()(j, 0);
    out.col(1) += pi_tilde.col(j) * q.points()(j, 1);
    out.col(2) += pi_tilde.col(j) * q.points()(j, 2);
  }
  return PointCloud(std::move(out));
}

Eigen::VectorXd gamma_weights(const Eigen::MatrixXd& b_tilde,
                              const DistanceMatrix& d_spatial,
                              double temperature) {
  if (!(temperature > 0.0)) {
    fail(Errc::InvalidArgument, "temperature must be positive");
  }
  if (b_tilde.rows() != d_spatial.rows() || b_tilde.cols() != d_spatial.cols()) {
    fail(Errc::ShapeMismatch, "SoftBBS and distance matrix shapes differ");
  }
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(b_tilde.rows());
  for (Eigen::Index j = 0; j < b_tilde.cols(); ++j) {
    gamma += b_tilde.col(j).cwiseProduct(
        (-d_spatial.values.col(j) / temperature).array().exp().matrix());
  }
  return gamma;
}

SoftMatch match_pass(const PointCloud& p, const PointCloud& q,
                     const FeatureCloud& fp, const FeatureCloud& fq, double xi,
                     double temperature) {
  if (p.size() < 2 || q.size() < 2) {
    fail(Errc::TooFewPoints, "matching needs at least two points per cloud");
  }
  if (fp.size() != p.size() || fq.size() != q.size()) {
    fail(Errc::SizeMismatch, "feature rows do not match cloud sizes");
  }
  const DistanceMatrix d_star = distance_matrix(fp, fq);
  const double alpha = compute_alpha(fp, xi);

  const Eigen::MatrixXd scaled = -d_star.values / alpha;
  const Eigen::MatrixXd col_factor = softmax_cols(scaled);
  const Eigen::MatrixXd row_factor =
      softmax_cols(scaled.transpose()).transpose();
  Eigen::MatrixXd b_tilde = col_factor.cwiseProduct(row_factor);

  const Eigen::VectorXd row_sums = b_tilde.rowwise().sum();
  Eigen::MatrixXd pi_tilde =
      b_tilde.array().colwise() / row_sums.cwiseMax(1e-300).array();
  for (Eigen::Index i = 0; i < row_sums.size(); ++i) {
    if (row_sums[i] > 0.0) continue;
    // Whole row underflowed; renormalize it in the log domain. The two
    // softmax factors of row i are recovered from their defining maxima.
    Eigen::ArrayXd log_row(scaled.cols());
    const double row_mx = scaled.row(i).maxCoeff();
    const double row_lse =
        row_mx + std::log((scaled.row(i).array() - row_mx).exp().sum());
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
      const double col_mx = scaled.col(j).maxCoeff();
      const double col_lse =
          col_mx + std::log((scaled.col(j).array() - col_mx).exp().sum());
      log_row[j] = 2.0 * scaled(i, j) - row_lse - col_lse;
    }
    const Eigen::ArrayXd shifted = (log_row - log_row.maxCoeff()).exp();
    pi_tilde.row(i) = (shifted / shifted.sum()).transpose();
  }

  PointCloud q_hat = virtual_targets(pi_tilde, q);
  SoftMatch sm{std::move(b_tilde), std::move(pi_tilde), std::move(q_hat),
               Eigen::VectorXd(), alpha, temperature};

  // Identity embeddings make D* the spatial matrix already; reuse it.
  const bool identity_features =
      fp.dim() == 3 && fq.dim() == 3 && fp.features == p.points() &&
      fq.features == q.points();
  const DistanceMatrix d_spatial =
      identity_features
          ? DistanceMatrix{d_star.values, DistanceMatrix::Kind::Spatial}
          : distance_matrix(p, q);
  sm.gamma = gamma_weights(sm.b_tilde, d_spatial, temperature);

  // The softmax factors are finite by construction; verify everything the
  // accumulations produced.
  if (!sm.q_hat.points().allFinite()) {
    fail(Errc::NumericalError, "virtual targets are not finite");
  }
  if (!sm.gamma.allFinite() || (sm.gamma.array() < 0.0).any()) {
    fail(Errc::NumericalError, "correspondence weights invalid");
  }
  const Eigen::VectorXd pi_sums = sm.pi_tilde.rowwise().sum();
  if (((pi_sums.array() - 1.0).abs() > 1e-9).any()) {
    fail(Errc::NumericalError, "soft mapping row does not sum to 1");
  }
  return sm;
}

SoftMatch match_pass(const PointCloud& p, const PointCloud& q,
                     const EmbeddingKind& embedding, double xi,
                     double temperature) {
  return match_pass(p, q, embed(p, embedding), embed(q, embedding), xi,
                    temperature);
}

}  // namespace bbsreg

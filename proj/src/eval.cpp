#include "bbsreg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "bbsreg/datagen.hpp"

namespace bbsreg {

namespace {

double wrap_deg(double deg) { return std::remainder(deg, 360.0); }

double size_measure(const PointCloud& cloud, SizeMeasure size) {
  const Vec3 extent = cloud.max_corner() - cloud.min_corner();
  return size == SizeMeasure::BboxDiagonal ? extent.norm() : extent.maxCoeff();
}

}  // namespace

PairErrors transform_errors(const RigidTransform& est, const RigidTransform& gt) {
  const EulerAngles ee = rotation_to_euler(est.rotation);
  const EulerAngles eg = rotation_to_euler(gt.rotation);
  PairErrors out;
  out.rot_err_deg = Vec3(std::abs(wrap_deg(ee.rx_deg - eg.rx_deg)),
                         std::abs(wrap_deg(ee.ry_deg - eg.ry_deg)),
                         std::abs(wrap_deg(ee.rz_deg - eg.rz_deg)));
  out.trans_err = (est.translation - gt.translation).cwiseAbs();
  const double frob = (est.rotation - gt.rotation).norm();
  out.chordal_deg = rad_to_deg(2.0 * std::asin(std::min(1.0, frob / (2.0 * std::sqrt(2.0)))));
  out.mte = (est.translation - gt.translation).norm();
  return out;
}

MetricSummary aggregate(const std::vector<PairErrors>& errors) {
  if (errors.empty()) fail(Errc::EmptySet, "no pair errors to aggregate");
  MetricSummary m;
  const double n_axis = 3.0 * static_cast<double>(errors.size());
  for (const PairErrors& e : errors) {
    for (int a = 0; a < 3; ++a) {
      m.mse_r += e.rot_err_deg[a] * e.rot_err_deg[a];
      m.mae_r += std::abs(e.rot_err_deg[a]);
      m.mse_t += e.trans_err[a] * e.trans_err[a];
      m.mae_t += std::abs(e.trans_err[a]);
    }
    m.mae_chordal += e.chordal_deg;
    m.mte += e.mte;
  }
  m.mse_r /= n_axis;
  m.mae_r /= n_axis;
  m.mse_t /= n_axis;
  m.mae_t /= n_axis;
  m.rmse_r = std::sqrt(m.mse_r);
  m.rmse_t = std::sqrt(m.mse_t);
  m.mae_chordal /= static_cast<double>(errors.size());
  m.mte /= static_cast<double>(errors.size());
  return m;
}

LossBreakdown loss(const PointCloud& p, const PointCloud& q,
                   const PointCloud& q_hat, const RigidTransform& est,
                   const RigidTransform& gt, const LossConfig& cfg) {
  if (q_hat.size() != p.size()) {
    fail(Errc::SizeMismatch, "q_hat size does not match p");
  }
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) {
    fail(Errc::InvalidArgument, "beta must lie in (0, 1]");
  }
  if (cfg.epoch_n < 0) fail(Errc::InvalidArgument, "epoch must be nonnegative");

  LossBreakdown out;
  out.term_rot = (gt.rotation.transpose() * est.rotation - Mat3::Identity())
                     .squaredNorm();
  out.term_trans = (gt.translation - est.translation).squaredNorm();

  const auto mask = overlap_mask(p, q, gt, cfg.theta);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    acc += (q_hat.point(i) - apply_point(gt, p.point(i))).squaredNorm();
  }
  out.term_pointwise = std::pow(cfg.beta, cfg.epoch_n) * acc /
                       static_cast<double>(p.size());
  out.total = out.term_rot + out.term_trans + out.term_pointwise;
  return out;
}

bool registration_success(const PointCloud& cloud, const RigidTransform& gt,
                          const RigidTransform& est, double threshold_fraction,
                          SuccessStatistic statistic, SizeMeasure size) {
  if (!(threshold_fraction > 0.0)) {
    fail(Errc::InvalidArgument, "threshold fraction must be positive");
  }
  const PointCloud with_est = apply_transform(cloud, est);
  const PointCloud with_gt = apply_transform(cloud, gt);
  const Eigen::VectorXd dev =
      (with_est.points() - with_gt.points()).rowwise().norm();
  const double stat = statistic == SuccessStatistic::MeanDeviation
                          ? dev.mean()
                          : dev.maxCoeff();
  return stat < threshold_fraction * size_measure(cloud, size);
}

SuccessGrid success_grid(const std::vector<SuccessTrial>& trials,
                         double threshold_fraction, SuccessStatistic statistic,
                         SizeMeasure size) {
  SuccessGrid grid;
  std::map<double, Eigen::Index> rows;
  std::map<double, Eigen::Index> cols;
  for (const SuccessTrial& t : trials) rows.emplace(t.rotation_deg, 0);
  for (const SuccessTrial& t : trials) cols.emplace(t.translation_frac, 0);
  for (auto& [key, idx] : rows) {
    idx = static_cast<Eigen::Index>(grid.rotations_deg.size());
    grid.rotations_deg.push_back(key);
  }
  for (auto& [key, idx] : cols) {
    idx = static_cast<Eigen::Index>(grid.translation_fracs.size());
    grid.translation_fracs.push_back(key);
  }
  Eigen::MatrixXd succ = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  Eigen::MatrixXd count = succ;
  for (const SuccessTrial& t : trials) {
    const Eigen::Index r = rows.at(t.rotation_deg);
    const Eigen::Index c = cols.at(t.translation_frac);
    count(r, c) += 1.0;
    if (registration_success(t.cloud, t.gt, t.est, threshold_fraction, statistic,
                             size)) {
      succ(r, c) += 1.0;
    }
  }
  grid.cells = Eigen::MatrixXd::Zero(succ.rows(), succ.cols());
  for (Eigen::Index r = 0; r < succ.rows(); ++r) {
    for (Eigen::Index c = 0; c < succ.cols(); ++c) {
      grid.cells(r, c) = count(r, c) > 0.0 ? 100.0 * succ(r, c) / count(r, c) : 0.0;
    }
  }
  return grid;
}

void write_metric_report(std::ostream& out, const MetricSummary& m,
                         const std::string& prefix) {
  const auto emit = [&](const char* key, double value) {
    out << prefix << key << " = " << value << "\n";
  };
  out.precision(17);
  emit("mse_r_deg2", m.mse_r);
  emit("rmse_r_deg", m.rmse_r);
  emit("mae_r_deg", m.mae_r);
  emit("mse_t", m.mse_t);
  emit("rmse_t", m.rmse_t);
  emit("mae_t", m.mae_t);
  emit("mae_chordal_deg", m.mae_chordal);
  emit("mte", m.mte);
}

void write_pair_table(std::ostream& out, const std::vector<std::string>& labels,
                      const std::vector<PairErrors>& errors) {
  if (labels.size() != errors.size()) {
    fail(Errc::SizeMismatch, "label count does not match error count");
  }
  out.precision(17);
  out << "pair\trot_err_x_deg\trot_err_y_deg\trot_err_z_deg"
      << "\ttrans_err_x\ttrans_err_y\ttrans_err_z\tchordal_deg\tmte\n";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const PairErrors& e = errors[i];
    out << labels[i] << '\t' << e.rot_err_deg.x() << '\t' << e.rot_err_deg.y()
        << '\t' << e.rot_err_deg.z() << '\t' << e.trans_err.x() << '\t'
        << e.trans_err.y() << '\t' << e.trans_err.z() << '\t' << e.chordal_deg
        << '\t' << e.mte << '\n';
  }
}

}  // namespace bbsreg

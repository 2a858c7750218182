#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bbsreg/core.hpp"

namespace bbsreg {

/// Per-pair error components.
struct PairErrors {
  Vec3 rot_err_deg;    // per-axis |Euler(est) - Euler(gt)|, wrapped to [-180,180]
  Vec3 trans_err;      // per-axis |t_est - t_gt|
  double chordal_deg;  // 2 asin(||R_est - R_gt||_F / (2 sqrt 2)), degrees
  double mte;          // ||t_est - t_gt||
};

/// Throws GimbalLock (propagated from the Euler conversion).
PairErrors transform_errors(const RigidTransform& est, const RigidTransform& gt);

/// Dataset-level statistics; rotation and translation blocks pool the
/// per-axis errors across axes and pairs.
struct MetricSummary {
  double mse_r = 0.0, rmse_r = 0.0, mae_r = 0.0;
  double mse_t = 0.0, rmse_t = 0.0, mae_t = 0.0;
  double mae_chordal = 0.0;
  double mte = 0.0;
};

/// Throws EmptySet for an empty input.
MetricSummary aggregate(const std::vector<PairErrors>& errors);

struct LossConfig {
  double beta = 0.95;  // pointwise-term decay constant, in (0, 1]
  int epoch_n = 0;
  double theta = 0.02;  // squared-distance threshold for gamma_GT
};

struct LossBreakdown {
  double total = 0.0;
  double term_rot = 0.0;        // ||R_gt^T R - I||_F^2
  double term_trans = 0.0;      // ||t_gt - t||^2
  double term_pointwise = 0.0;  // beta^n / N * sum gamma_GT ||q_hat - gt(p)||^2
};

/// Evaluates the training loss as a plain function of its inputs.
LossBreakdown loss(const PointCloud& p, const PointCloud& q,
                   const PointCloud& q_hat, const RigidTransform& est,
                   const RigidTransform& gt, const LossConfig& cfg);

enum class SuccessStatistic { MeanDeviation, MaxDeviation };
enum class SizeMeasure { BboxDiagonal, MaxExtent };

/// One registration trial placed in a (rotation, translation) grid cell.
struct SuccessTrial {
  double rotation_deg = 0.0;    // initial rotation magnitude (row key)
  double translation_frac = 0.0;  // initial translation as fraction of size (col key)
  PointCloud cloud;             // the moving cloud P
  RigidTransform gt;
  RigidTransform est;
};

struct SuccessGrid {
  std::vector<double> rotations_deg;     // sorted row keys
  std::vector<double> translation_fracs; // sorted column keys
  Eigen::MatrixXd cells;                 // success percentage per cell
};

/// A trial succeeds when the deviation statistic between est- and
/// gt-transformed clouds is below threshold_fraction times the cloud size
/// measure. Cells report 100 * successes / trials.
SuccessGrid success_grid(const std::vector<SuccessTrial>& trials,
                         double threshold_fraction,
                         SuccessStatistic statistic = SuccessStatistic::MeanDeviation,
                         SizeMeasure size = SizeMeasure::BboxDiagonal);

bool registration_success(const PointCloud& cloud, const RigidTransform& gt,
                          const RigidTransform& est, double threshold_fraction,
                          SuccessStatistic statistic = SuccessStatistic::MeanDeviation,
                          SizeMeasure size = SizeMeasure::BboxDiagonal);

/// Flat key=value report.
void write_metric_report(std::ostream& out, const MetricSummary& m,
                         const std::string& prefix = "");

/// Machine-readable table: header line, one tab-separated row per pair.
void write_pair_table(std::ostream& out, const std::vector<std::string>& labels,
                      const std::vector<PairErrors>& errors);

}  // namespace bbsreg

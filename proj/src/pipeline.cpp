#include "bbsreg/pipeline.hpp"

#include <cmath>
#include <limits>

namespace bbsreg {

void PipelineConfig::validate() const {
  if (!(xi > 0.0)) fail(Errc::InvalidArgument, "xi must be positive");
  if (!(t_initial > 0.0)) fail(Errc::InvalidArgument, "t_initial must be positive");
  if (!(t_decay > 0.0 && t_decay < 1.0)) {
    fail(Errc::InvalidArgument, "t_decay must lie in (0, 1)");
  }
  if (!(convergence_deg > 0.0) || !(fine_tune_convergence_deg > 0.0)) {
    fail(Errc::InvalidArgument, "convergence thresholds must be positive");
  }
  if (max_iters < 1 || icp_max_iters < 1) {
    fail(Errc::InvalidArgument, "iteration caps must be at least 1");
  }
  if (!(fine_tune_temperature > 0.0)) {
    fail(Errc::InvalidArgument, "fine-tune temperature must be positive");
  }
  if (!(icp_tol > 0.0)) fail(Errc::InvalidArgument, "icp_tol must be positive");
  if (embedding.type == EmbeddingKind::Type::LocalGeometry && embedding.k < 4) {
    fail(Errc::InvalidArgument, "LocalGeometry needs k >= 4");
  }
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Feature: return "feature";
    case Stage::Spatial: return "spatial";
    case Stage::Icp: return "icp";
  }
  return "?";
}

namespace {

void check_inputs(const PointCloud& p, const PointCloud& q,
                  const PipelineConfig& cfg) {
  cfg.validate();
  if (p.size() < 3 || q.size() < 3) {
    fail(Errc::TooFewPoints, "registration needs at least three points per cloud");
  }
}

// One soft-matching stage. Mutates `moving` and appends to the report.
bool run_soft_stage(PointCloud& moving, const PointCloud& q,
                    const PipelineConfig& cfg, Stage stage,
                    RegistrationReport& report) {
  const bool spatial = stage == Stage::Spatial;
  const EmbeddingKind kind =
      spatial ? EmbeddingKind::identity() : cfg.embedding;
  const double conv_deg =
      spatial ? cfg.fine_tune_convergence_deg : cfg.convergence_deg;
  double temperature = spatial ? cfg.fine_tune_temperature : cfg.t_initial;
  const FeatureCloud fq = embed(q, kind);  // fixed cloud, embed once

  for (int it = 0; it < cfg.max_iters; ++it) {
    const SoftMatch sm =
        match_pass(moving, q, embed(moving, kind), fq, cfg.xi, temperature);
    const RigidTransform step =
        weighted_procrustes(Correspondences(moving, sm.q_hat, sm.gamma));
    moving = apply_transform(moving, step);
    report.estimate = compose(step, report.estimate);

    const double step_deg = rotation_angle_deg(step.rotation);
    report.iterations.push_back({stage, step, step_deg, temperature});
    if (!spatial) temperature *= cfg.t_decay;
    if (step_deg < conv_deg) return true;
  }
  return false;
}

}  // namespace

RegistrationReport register_deepbbs(const PointCloud& p, const PointCloud& q,
                                    const PipelineConfig& cfg) {
  check_inputs(p, q, cfg);
  RegistrationReport report;
  PointCloud moving = p;
  report.converged = run_soft_stage(moving, q, cfg, Stage::Feature, report);
  return report;
}

RegistrationReport register_deepbbs_pp(const PointCloud& p, const PointCloud& q,
                                       const PipelineConfig& cfg) {
  check_inputs(p, q, cfg);
  RegistrationReport report;
  PointCloud moving = p;
  report.converged = run_soft_stage(moving, q, cfg, Stage::Feature, report);
  if (cfg.fine_tune) {
    report.converged = run_soft_stage(moving, q, cfg, Stage::Spatial, report);
  }
  return report;
}

RegistrationReport register_spatial_only(const PointCloud& p, const PointCloud& q,
                                         const PipelineConfig& cfg) {
  check_inputs(p, q, cfg);
  RegistrationReport report;
  PointCloud moving = p;
  report.converged = run_soft_stage(moving, q, cfg, Stage::Spatial, report);
  return report;
}

RegistrationReport register_icp(const PointCloud& p, const PointCloud& q,
                                const PipelineConfig& cfg) {
  check_inputs(p, q, cfg);
  RegistrationReport report;
  PointCloud moving = p;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p.size());
  double prev_msr = std::numeric_limits<double>::infinity();

  for (int it = 0; it < cfg.icp_max_iters; ++it) {
    // Exact nearest neighbor per moving point.
    PointMatrix matched(moving.size(), 3);
    for (Eigen::Index i = 0; i < moving.size(); ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double d = (q.point(j) - moving.point(i)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      matched.row(i) = q.points().row(best);
    }
    PointCloud target(matched);
    const RigidTransform step =
        weighted_procrustes(Correspondences(moving, target, ones));
    moving = apply_transform(moving, step);
    report.estimate = compose(step, report.estimate);

    const double step_deg = rotation_angle_deg(step.rotation);
    report.iterations.push_back({Stage::Icp, step, step_deg, 0.0});

    const double msr =
        (moving.points() - target.points()).rowwise().squaredNorm().mean();
    if (std::abs(prev_msr - msr) < cfg.icp_tol) {
      report.converged = true;
      break;
    }
    prev_msr = msr;
  }
  return report;
}

}  // namespace bbsreg

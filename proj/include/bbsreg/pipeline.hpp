#pragma once

#include <vector>

#include "bbsreg/embed.hpp"
#include "bbsreg/match.hpp"
#include "bbsreg/solve.hpp"

namespace bbsreg {

struct PipelineConfig {
  EmbeddingKind embedding = EmbeddingKind::identity();
  double xi = 0.4;

  // Feature stage: temperature starts at t_initial and is multiplied by
  // t_decay after every iteration.
  double t_initial = 1.0;
  double t_decay = 0.5;
  double convergence_deg = 0.4;
  int max_iters = 20;

  // Spatial fine-tuning stage: matching on raw coordinates at a fixed
  // temperature.
  bool fine_tune = true;
  double fine_tune_temperature = 1.0;
  double fine_tune_convergence_deg = 0.4;

  // Point-to-point ICP baseline.
  int icp_max_iters = 50;
  double icp_tol = 1e-6;

  void validate() const;
};

enum class Stage { Feature, Spatial, Icp };

const char* stage_name(Stage s);

struct IterationRecord {
  Stage stage;
  RigidTransform step;       // incremental transform of this iteration
  double rotation_step_deg;  // geodesic angle between consecutive estimates
  double temperature;        // 0 for ICP iterations
};

/// Cumulative estimate maps the original P into Q's frame; it equals the
/// ordered composition of the per-iteration steps (latest applied last).
struct RegistrationReport {
  RigidTransform estimate;
  std::vector<IterationRecord> iterations;
  bool converged = false;
};

/// Feature-space loop: match_pass at the current temperature, weighted
/// least squares, move P, halve the temperature; stops when the rotation
/// step drops below convergence_deg or max_iters is hit. Non-convergence
/// is reported, not thrown.
RegistrationReport register_deepbbs(const PointCloud& p, const PointCloud& q,
                                    const PipelineConfig& cfg);

/// register_deepbbs followed by spatial fine-tuning: the same loop with
/// raw coordinates as features and a fixed temperature.
RegistrationReport register_deepbbs_pp(const PointCloud& p, const PointCloud& q,
                                       const PipelineConfig& cfg);

/// Only the spatial stage, from the initial pose. Collapses from distant
/// poses by design; exposed for ablation.
RegistrationReport register_spatial_only(const PointCloud& p, const PointCloud& q,
                                         const PipelineConfig& cfg);

/// Vanilla point-to-point ICP: exact (brute-force) nearest neighbors,
/// unweighted closed-form alignment per iteration, stop when the change in
/// mean squared residual drops below icp_tol.
RegistrationReport register_icp(const PointCloud& p, const PointCloud& q,
                                const PipelineConfig& cfg);

}  // namespace bbsreg

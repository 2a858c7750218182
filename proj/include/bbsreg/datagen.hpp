#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbsreg/core.hpp"

namespace bbsreg {

/// Synthetic pair construction parameters, mirroring the standard
/// partial/noisy/resampled registration protocols.
struct ExperimentSpec {
  int n_points = 1024;
  double rotation_max_deg = 45.0;
  double translation_min = -0.5;
  double translation_max = 0.5;
  std::optional<int> partial_keep;     // crop each cloud to this many points
  std::optional<double> noise_sigma;   // per-coordinate Gaussian, after crop
  enum class Sampling { Shared, Independent } sampling = Sampling::Shared;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RegistrationPair {
  PointCloud p;
  PointCloud q;
  RigidTransform gt;  // maps P's frame into Q's frame (pre-noise, pre-crop)
};

/// Builds a pair from a source cloud:
///   1. sample n_points (farthest-point from a random start in Shared mode;
///      two independent no-replacement draws in Independent mode),
///   2. draw the ground-truth transform and apply it to produce Q,
///   3. optional partial crop: per cloud, keep the `partial_keep` nearest
///      neighbors of a randomly selected seed point,
///   4. optional additive Gaussian noise on both clouds.
/// Deterministic given spec.seed. Throws SourceTooSmall when the source
/// cannot supply the requested counts.
RegistrationPair make_pair(const PointCloud& source, const ExperimentSpec& spec);

/// gamma_GT: flag per P point, 1 when some q_j lies within *squared*
/// distance theta of the transformed point. Brute-force min over Q.
std::vector<std::uint8_t> overlap_mask(const PointCloud& p, const PointCloud& q,
                                       const RigidTransform& gt, double theta);

/// Pair with a magnitude-controlled perturbation: rotation of exactly
/// rotation_deg about a random axis and a translation of translation_frac
/// times the sampled cloud's bounding-box diagonal in a random direction.
/// Sampling/partial/noise follow the spec; its rotation and translation
/// ranges are ignored.
RegistrationPair make_pair_magnitude(const PointCloud& source,
                                     const ExperimentSpec& spec,
                                     double rotation_deg,
                                     double translation_frac);

/// Benchmark configuration: an ExperimentSpec plus optional rotation /
/// translation magnitude sweeps (the success-grid protocol).
struct BenchmarkSpec {
  ExperimentSpec base;
  std::vector<double> rotation_grid_deg;
  std::vector<double> translation_grid_frac;
  double success_threshold = 0.01;

  bool sweeps() const {
    return !rotation_grid_deg.empty() || !translation_grid_frac.empty();
  }
};

BenchmarkSpec read_benchmark_spec(const std::string& path);

/// Procedurally generated test shapes (surface samples with jitter), used
/// where a mesh dataset is not available.
enum class ShapeKind {
  Box,
  Sphere,
  Cylinder,
  Cone,
  Torus,
  Helix,
  Blob,
  Dumbbell,
  Bracket,
  Cross,
  Constellation,
};

constexpr int kShapeKindCount = 11;

/// Kinds with no rotational self-symmetry; only these give well-posed
/// transform-space error metrics (a symmetric shape can align perfectly
/// while the recovered transform differs from the generator by a symmetry).
constexpr ShapeKind kAsymmetricShapeKinds[] = {
    ShapeKind::Helix, ShapeKind::Blob, ShapeKind::Bracket, ShapeKind::Cross,
    ShapeKind::Constellation};

PointCloud make_shape(ShapeKind kind, int n_points, Rng& rng);

/// Shape picked by variant index (wraps around the kinds) with
/// per-variant size/aspect jitter; convenient for seeded trial batches.
PointCloud make_shape_variant(int variant, int n_points, Rng& rng);

/// Flat key=value serialization (one pair per line, '#' comments).
ExperimentSpec read_experiment_spec(const std::string& path);
void write_experiment_spec(const ExperimentSpec& spec, const std::string& path);

}  // namespace bbsreg

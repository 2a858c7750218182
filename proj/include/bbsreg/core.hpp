#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "bbsreg/errors.hpp"

namespace bbsreg {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Ordered set of 3D points. Point order is stable and index-addressable;
/// indices are correspondence identities throughout the library.
class PointCloud {
 public:
  explicit PointCloud(PointMatrix points);

  Eigen::Index size() const { return points_.rows(); }
  Vec3 point(Eigen::Index i) const { return points_.row(i).transpose(); }
  const PointMatrix& points() const { return points_; }

  Vec3 centroid() const { return points_.colwise().mean().transpose(); }
  Vec3 min_corner() const { return points_.colwise().minCoeff().transpose(); }
  Vec3 max_corner() const { return points_.colwise().maxCoeff().transpose(); }

 private:
  PointMatrix points_;
};

/// Rotation R in SO(3) plus translation t; maps x to R*x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
};

/// ||R^T R - I||_F < tol and det(R) = +1 within tol.
bool is_rigid(const RigidTransform& xf, double tol = 1e-9);

Vec3 apply_point(const RigidTransform& xf, const Vec3& x);
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& xf);

/// apply(compose(a, b), x) == apply(a, apply(b, x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& xf);

/// Geodesic rotation angle of R, in degrees.
double rotation_angle_deg(const Mat3& r);

/// Fixed-axis Euler angles in degrees, composed X-then-Y-then-Z:
/// R = Rz(rz) * Ry(ry) * Rx(rx) acting on column vectors.
struct EulerAngles {
  double rx_deg = 0.0;
  double ry_deg = 0.0;
  double rz_deg = 0.0;
};

Mat3 euler_to_rotation(const EulerAngles& e);

/// Inverse of euler_to_rotation. Throws GimbalLock when |R(2,0)| is within
/// 1e-9 of 1 (the Y angle hits +-90 degrees and X/Z are not separable).
EulerAngles rotation_to_euler(const Mat3& r);

/// Seedable deterministic stream. All stochastic operations take one of
/// these explicitly so experiments replay bit-exactly; the raw engine is
/// mt19937_64 but every draw goes through our own conversions so the
/// stream does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Zero-mean Gaussian via Box-Muller (two uniform draws per call).
  double gaussian(double sigma);
  /// Uniform integer in [0, n); rejection sampling, no modulo bias.
  std::size_t index(std::size_t n);
  std::uint64_t next_u64() { return engine_(); }

  /// Independent stream derived from (seed, stream) by splitmix64 mixing.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
};

/// Deterministic per-stream seed derivation (the mixing Rng::derive uses).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Greedy farthest-point sampling: first point is cloud[start_index], each
/// subsequent point maximizes its minimum distance to the selected set.
/// Ties break toward the lowest candidate index. Throws BadCount when k or
/// start_index is out of range.
std::vector<Eigen::Index> farthest_point_sample_indices(const PointCloud& cloud,
                                                        Eigen::Index k,
                                                        Eigen::Index start_index);
PointCloud farthest_point_sample(const PointCloud& cloud, Eigen::Index k,
                                 Eigen::Index start_index);

/// Rotation-only transform with each Euler component uniform in
/// [-max_deg, +max_deg]; draws rx, ry, rz in that order.
RigidTransform random_rotation_euler(double max_deg, Rng& rng);

/// Each component uniform in [lo, hi); draws x, y, z in that order.
Vec3 random_translation(double lo, double hi, Rng& rng);

}  // namespace bbsreg

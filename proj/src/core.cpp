#include "bbsreg/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbsreg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::BadCount: return "BadCount";
    case Errc::GimbalLock: return "GimbalLock";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::DegenerateCloud: return "DegenerateCloud";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::SourceTooSmall: return "SourceTooSmall";
    case Errc::EmptySet: return "EmptySet";
    case Errc::ParseError: return "ParseError";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::IoError: return "IoError";
    case Errc::NotARotation: return "NotARotation";
    case Errc::DegenerateFit: return "DegenerateFit";
    case Errc::AllRemoved: return "AllRemoved";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NumericalError: return "NumericalError";
  }
  return "Error";
}

PointCloud::PointCloud(PointMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1) {
    fail(Errc::TooFewPoints, "point cloud must contain at least one point");
  }
  if (!points_.allFinite()) {
    fail(Errc::NumericalError, "point cloud contains non-finite coordinates");
  }
}

bool is_rigid(const RigidTransform& xf, double tol) {
  const Mat3& r = xf.rotation;
  if (!r.allFinite() || !xf.translation.allFinite()) return false;
  double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  return ortho < tol && std::abs(r.determinant() - 1.0) < tol;
}

Vec3 apply_point(const RigidTransform& xf, const Vec3& x) {
  return xf.rotation * x + xf.translation;
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& xf) {
  PointMatrix out = cloud.points() * xf.rotation.transpose();
  out.rowwise() += xf.translation.transpose();
  return PointCloud(std::move(out));
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidTransform invert(const RigidTransform& xf) {
  RigidTransform out;
  out.rotation = xf.rotation.transpose();
  out.translation = -(out.rotation * xf.translation);
  return out;
}

double rotation_angle_deg(const Mat3& r) {
  double c = (r.trace() - 1.0) / 2.0;
  c = std::clamp(c, -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

Mat3 euler_to_rotation(const EulerAngles& e) {
  if (!std::isfinite(e.rx_deg) || !std::isfinite(e.ry_deg) ||
      !std::isfinite(e.rz_deg)) {
    fail(Errc::InvalidArgument, "non-finite Euler angles");
  }
  const double a = deg_to_rad(e.rx_deg);
  const double b = deg_to_rad(e.ry_deg);
  const double c = deg_to_rad(e.rz_deg);
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  rz << std::cos(c), -std::sin(c), 0, std::sin(c), std::cos(c), 0, 0, 0, 1;
  return rz * ry * rx;
}

EulerAngles rotation_to_euler(const Mat3& r) {
  // For R = Rz*Ry*Rx: R(2,0) = -sin(ry), R(2,1) = cos(ry) sin(rx),
  // R(2,2) = cos(ry) cos(rx), R(1,0) = sin(rz) cos(ry), R(0,0) = cos(rz) cos(ry).
  if (std::abs(r(2, 0)) >= 1.0 - 1e-9) {
    fail(Errc::GimbalLock, "ry at +-90 degrees; euler decomposition ill-conditioned");
  }
  EulerAngles e;
  e.ry_deg = rad_to_deg(std::asin(-r(2, 0)));
  e.rx_deg = rad_to_deg(std::atan2(r(2, 1), r(2, 2)));
  e.rz_deg = rad_to_deg(std::atan2(r(1, 0), r(0, 0)));
  return e;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (!(lo <= hi)) fail(Errc::InvalidArgument, "uniform bounds inverted");
  return lo + (hi - lo) * uniform();
}

double Rng::gaussian(double sigma) {
  if (sigma < 0.0) fail(Errc::InvalidArgument, "negative sigma");
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) fail(Errc::InvalidArgument, "index over empty range");
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix_seed(seed, stream));
}

std::vector<Eigen::Index> farthest_point_sample_indices(const PointCloud& cloud,
                                                        Eigen::Index k,
                                                        Eigen::Index start_index) {
  const Eigen::Index n = cloud.size();
  if (k < 1 || k > n) fail(Errc::BadCount, "sample count out of range");
  if (start_index < 0 || start_index >= n) {
    fail(Errc::BadCount, "start index out of range");
  }
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(k));
  picked.push_back(start_index);

  Eigen::VectorXd min_sq =
      (cloud.points().rowwise() - cloud.points().row(start_index))
          .rowwise()
          .squaredNorm();
  for (Eigen::Index round = 1; round < k; ++round) {
    Eigen::Index best = 0;
    double best_d = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (min_sq[i] > best_d) {  // strict: ties keep the lowest index
        best_d = min_sq[i];
        best = i;
      }
    }
    picked.push_back(best);
    Eigen::VectorXd d =
        (cloud.points().rowwise() - cloud.points().row(best)).rowwise().squaredNorm();
    min_sq = min_sq.cwiseMin(d);
  }
  return picked;
}

PointCloud farthest_point_sample(const PointCloud& cloud, Eigen::Index k,
                                 Eigen::Index start_index) {
  const auto idx = farthest_point_sample_indices(cloud, k, start_index);
  PointMatrix out(static_cast<Eigen::Index>(idx.size()), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = cloud.points().row(idx[static_cast<std::size_t>(i)]);
  }
  return PointCloud(std::move(out));
}

RigidTransform random_rotation_euler(double max_deg, Rng& rng) {
  if (max_deg < 0.0) fail(Errc::InvalidArgument, "negative rotation bound");
  EulerAngles e;
  e.rx_deg = rng.uniform(-max_deg, max_deg);
  e.ry_deg = rng.uniform(-max_deg, max_deg);
  e.rz_deg = rng.uniform(-max_deg, max_deg);
  RigidTransform out;
  out.rotation = euler_to_rotation(e);
  return out;
}

Vec3 random_translation(double lo, double hi, Rng& rng) {
  Vec3 t;
  t.x() = rng.uniform(lo, hi);
  t.y() = rng.uniform(lo, hi);
  t.z() = rng.uniform(lo, hi);
  return t;
}

}  // namespace bbsreg

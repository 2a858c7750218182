#include "bbsreg/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bbsreg {

void ExperimentSpec::validate() const {
  if (n_points < 1) fail(Errc::InvalidArgument, "n_points must be positive");
  if (rotation_max_deg < 0.0) fail(Errc::InvalidArgument, "negative rotation bound");
  if (translation_min > translation_max) {
    fail(Errc::InvalidArgument, "translation interval inverted");
  }
  if (partial_keep && (*partial_keep < 1 || *partial_keep > n_points)) {
    fail(Errc::InvalidArgument, "partial_keep must lie in [1, n_points]");
  }
  if (noise_sigma && *noise_sigma < 0.0) {
    fail(Errc::InvalidArgument, "noise_sigma must be nonnegative");
  }
}

namespace {

PointCloud draw_without_replacement(const PointCloud& source, int n, Rng& rng) {
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(source.size()));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  PointMatrix out(n, 3);
  for (int i = 0; i < n; ++i) {
    const std::size_t pick = i + rng.index(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[pick]);
    out.row(i) = source.points().row(pool[static_cast<std::size_t>(i)]);
  }
  return PointCloud(std::move(out));
}

// Keeps the `keep` nearest neighbors of cloud[seed] (the seed included),
// in original index order.
PointCloud knn_crop(const PointCloud& cloud, Eigen::Index seed, int keep) {
  Eigen::VectorXd d2 =
      (cloud.points().rowwise() - cloud.points().row(seed)).rowwise().squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(cloud.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::partial_sort(order.begin(), order.begin() + keep, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return d2[a] != d2[b] ? d2[a] < d2[b] : a < b;
                    });
  order.resize(static_cast<std::size_t>(keep));
  std::sort(order.begin(), order.end());
  PointMatrix out(keep, 3);
  for (int i = 0; i < keep; ++i) {
    out.row(i) = cloud.points().row(order[static_cast<std::size_t>(i)]);
  }
  return PointCloud(std::move(out));
}

PointCloud add_noise(const PointCloud& cloud, double sigma, Rng& rng) {
  PointMatrix out = cloud.points();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      out(i, j) += rng.gaussian(sigma);
    }
  }
  return PointCloud(std::move(out));
}

}  // namespace

RegistrationPair make_pair(const PointCloud& source, const ExperimentSpec& spec) {
  spec.validate();
  if (source.size() < spec.n_points) {
    fail(Errc::SourceTooSmall, "source cloud smaller than n_points");
  }
  Rng rng(spec.seed);

  PointCloud base = [&] {
    if (spec.sampling == ExperimentSpec::Sampling::Shared) {
      const Eigen::Index start = static_cast<Eigen::Index>(rng.index(
          static_cast<std::size_t>(source.size())));
      return farthest_point_sample(source, spec.n_points, start);
    }
    return draw_without_replacement(source, spec.n_points, rng);
  }();
  PointCloud base_q =
      spec.sampling == ExperimentSpec::Sampling::Shared
          ? base
          : draw_without_replacement(source, spec.n_points, rng);

  RigidTransform gt = random_rotation_euler(spec.rotation_max_deg, rng);
  gt.translation = random_translation(spec.translation_min, spec.translation_max, rng);

  PointCloud p = base;
  PointCloud q = apply_transform(base_q, gt);

  if (spec.partial_keep) {
    const int keep = *spec.partial_keep;
    const Eigen::Index p_seed =
        static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p.size())));
    const Eigen::Index q_seed =
        static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(q.size())));
    p = knn_crop(p, p_seed, keep);
    q = knn_crop(q, q_seed, keep);
  }
  if (spec.noise_sigma && *spec.noise_sigma > 0.0) {
    p = add_noise(p, *spec.noise_sigma, rng);
    q = add_noise(q, *spec.noise_sigma, rng);
  }
  return {std::move(p), std::move(q), gt};
}

std::vector<std::uint8_t> overlap_mask(const PointCloud& p, const PointCloud& q,
                                       const RigidTransform& gt, double theta) {
  if (!(theta > 0.0)) fail(Errc::InvalidArgument, "theta must be positive");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const Vec3 moved = apply_point(gt, p.point(i));
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      best = std::min(best, (q.point(j) - moved).squaredNorm());
    }
    mask[static_cast<std::size_t>(i)] = best < theta ? 1 : 0;  // squared threshold
  }
  return mask;
}

// ---------------------------------------------------------------------------
// Procedural shapes
// ---------------------------------------------------------------------------

namespace {

Vec3 unit_sphere_dir(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

// Area-weighted sample on an axis-aligned box surface with half extents h.
Vec3 box_surface(const Vec3& h, Rng& rng) {
  const double ax = h.y() * h.z();
  const double ay = h.x() * h.z();
  const double az = h.x() * h.y();
  const double pick = rng.uniform(0.0, ax + ay + az);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double u = rng.uniform(-1.0, 1.0);
  const double v = rng.uniform(-1.0, 1.0);
  if (pick < ax) return {sign * h.x(), u * h.y(), v * h.z()};
  if (pick < ax + ay) return {u * h.x(), sign * h.y(), v * h.z()};
  return {u * h.x(), v * h.y(), sign * h.z()};
}

Vec3 cylinder_surface(double radius, double half_height, Rng& rng) {
  const double lateral = 2.0 * kPi * radius * 2.0 * half_height;
  const double caps = 2.0 * kPi * radius * radius;
  const double a = rng.uniform(0.0, lateral + caps);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  if (a < lateral) {
    return {radius * std::cos(phi), radius * std::sin(phi),
            rng.uniform(-half_height, half_height)};
  }
  const double r = radius * std::sqrt(rng.uniform());
  const double z = rng.uniform() < 0.5 ? -half_height : half_height;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

PointCloud make_shape(ShapeKind kind, int n_points, Rng& rng) {
  if (n_points < 1) fail(Errc::BadCount, "shape needs at least one point");
  PointMatrix pts(n_points, 3);

  // Per-shape aspect parameters come out of the stream first so a given
  // seed fixes the geometry before the surface samples.
  switch (kind) {
    case ShapeKind::Box: {
      const Vec3 h(1.0, rng.uniform(0.5, 0.9), rng.uniform(0.25, 0.55));
      for (int i = 0; i < n_points; ++i) pts.row(i) = box_surface(h, rng).transpose();
      break;
    }
    case ShapeKind::Sphere: {
      const Vec3 axes(1.0, rng.uniform(0.55, 0.8), rng.uniform(0.3, 0.55));
      for (int i = 0; i < n_points; ++i) {
        pts.row(i) = unit_sphere_dir(rng).cwiseProduct(axes).transpose();
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = rng.uniform(0.35, 0.6);
      for (int i = 0; i < n_points; ++i) {
        pts.row(i) = cylinder_surface(r, 1.0, rng).transpose();
      }
      break;
    }
    case ShapeKind::Cone: {
      const double base_r = rng.uniform(0.5, 0.8);
      const double slant = std::sqrt(base_r * base_r + 4.0);
      const double lateral = kPi * base_r * slant;
      const double disc = kPi * base_r * base_r;
      for (int i = 0; i < n_points; ++i) {
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        if (rng.uniform(0.0, lateral + disc) < lateral) {
          const double frac = std::sqrt(rng.uniform());  // area-uniform down the slant
          const double rr = base_r * frac;
          pts.row(i) = Vec3(rr * std::cos(phi), rr * std::sin(phi), 1.0 - 2.0 * frac)
                           .transpose();
        } else {
          const double rr = base_r * std::sqrt(rng.uniform());
          pts.row(i) = Vec3(rr * std::cos(phi), rr * std::sin(phi), -1.0).transpose();
        }
      }
      break;
    }
    case ShapeKind::Torus: {
      const double ring = 0.72;
      const double tube = rng.uniform(0.18, 0.32);
      for (int i = 0; i < n_points; ++i) {
        const double u = rng.uniform(0.0, 2.0 * kPi);
        const double v = rng.uniform(0.0, 2.0 * kPi);
        const double w = ring + tube * std::cos(v);
        pts.row(i) =
            Vec3(w * std::cos(u), w * std::sin(u), tube * std::sin(v)).transpose();
      }
      break;
    }
    case ShapeKind::Helix: {
      const double turns = rng.uniform(1.5, 2.5);
      const double tube = 0.13;
      for (int i = 0; i < n_points; ++i) {
        const double t = rng.uniform(0.0, 1.0);
        const double ang = 2.0 * kPi * turns * t;
        const Vec3 center(0.62 * std::cos(ang), 0.62 * std::sin(ang), 2.0 * t - 1.0);
        const Vec3 offset = unit_sphere_dir(rng) * tube;
        pts.row(i) = (center + offset).transpose();
      }
      break;
    }
    case ShapeKind::Blob: {
      Vec3 lobes[4];
      double amps[4];
      int powers[4];
      for (int k = 0; k < 4; ++k) {
        lobes[k] = unit_sphere_dir(rng);
        amps[k] = rng.uniform(-0.28, 0.28);
        powers[k] = 2 + k % 3;
      }
      for (int i = 0; i < n_points; ++i) {
        const Vec3 u = unit_sphere_dir(rng);
        double r = 1.0;
        for (int k = 0; k < 4; ++k) {
          r += amps[k] * std::pow(u.dot(lobes[k]), powers[k]);
        }
        pts.row(i) = (std::max(r, 0.3) * 0.8 * u).transpose();
      }
      break;
    }
    case ShapeKind::Dumbbell: {
      const double ra = rng.uniform(0.45, 0.6);
      const double rb = rng.uniform(0.25, 0.38);
      const Vec3 ca(-0.65, 0.0, 0.0);
      const Vec3 cb(0.7, 0.12, 0.0);
      for (int i = 0; i < n_points; ++i) {
        const double pick = rng.uniform();
        if (pick < 0.45) {
          pts.row(i) = (ca + ra * unit_sphere_dir(rng)).transpose();
        } else if (pick < 0.75) {
          pts.row(i) = (cb + rb * unit_sphere_dir(rng)).transpose();
        } else {
          const double t = rng.uniform(-0.4, 0.45);
          const double phi = rng.uniform(0.0, 2.0 * kPi);
          pts.row(i) = Vec3(t, 0.1 * std::cos(phi) + 0.04, 0.1 * std::sin(phi))
                           .transpose();
        }
      }
      break;
    }
    case ShapeKind::Bracket: {
      const Vec3 ha(1.0, 0.14, rng.uniform(0.3, 0.45));
      const Vec3 hb(0.14, rng.uniform(0.55, 0.75), ha.z());
      const Vec3 cb(-1.0 + hb.x(), 0.14 + hb.y(), 0.0);
      const double wa = ha.y() * ha.z() + ha.x() * ha.z() + ha.x() * ha.y();
      const double wb = hb.y() * hb.z() + hb.x() * hb.z() + hb.x() * hb.y();
      for (int i = 0; i < n_points; ++i) {
        if (rng.uniform(0.0, wa + wb) < wa) {
          pts.row(i) = box_surface(ha, rng).transpose();
        } else {
          pts.row(i) = (cb + box_surface(hb, rng)).transpose();
        }
      }
      break;
    }
    case ShapeKind::Cross: {
      const Vec3 lengths(1.0, rng.uniform(0.6, 0.8), rng.uniform(0.4, 0.55));
      const double th = 0.12;
      for (int i = 0; i < n_points; ++i) {
        const int axis = static_cast<int>(rng.index(3));
        Vec3 h(th, th, th);
        h[axis] = lengths[axis];
        Vec3 v = box_surface(h, rng);
        // Offset the Y and Z arms so the union is not centrally symmetric.
        if (axis == 1) v.y() += 0.18;
        if (axis == 2) v.z() -= 0.12;
        pts.row(i) = v.transpose();
      }
      break;
    }
    case ShapeKind::Constellation: {
      // Structurally distinct components (rod, plate, solid ball, shell) in
      // an asymmetric arrangement; local covariance signatures separate the
      // regions even when poses are far apart.
      const Vec3 c_rod(0.9, 0.1, 0.0);
      const Vec3 c_plate(-0.7, 0.6, 0.3);
      const Vec3 c_ball(-0.2, -0.8, -0.2);
      const Vec3 c_shell(0.3, 0.2, 0.9);
      const Vec3 rod_dir = Vec3(0.8, 0.5, 0.33).normalized();
      const Vec3 plate_u = Vec3(0.9, -0.4, 0.2).normalized();
      const Vec3 plate_v = Vec3(0.2, 0.8, 0.6).normalized();
      const double rod_len = rng.uniform(0.45, 0.6);
      const double ball_r = rng.uniform(0.25, 0.35);
      const double shell_r = rng.uniform(0.24, 0.32);
      for (int i = 0; i < n_points; ++i) {
        const double pick = rng.uniform();
        Vec3 v;
        if (pick < 0.28) {
          v = c_rod + rng.uniform(-rod_len, rod_len) * rod_dir;
          v += 0.012 * Vec3(rng.gaussian(1.0), rng.gaussian(1.0), rng.gaussian(1.0));
        } else if (pick < 0.56) {
          v = c_plate + rng.uniform(-0.4, 0.4) * plate_u +
              rng.uniform(-0.3, 0.3) * plate_v;
          v += 0.008 * Vec3(rng.gaussian(1.0), rng.gaussian(1.0), rng.gaussian(1.0));
        } else if (pick < 0.8) {
          Vec3 u;
          do {
            u = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                     rng.uniform(-1.0, 1.0));
          } while (u.norm() > 1.0);
          v = c_ball + ball_r * u;
        } else {
          v = c_shell + shell_r * unit_sphere_dir(rng);
        }
        pts.row(i) = v.transpose();
      }
      break;
    }
  }

  // Mild anisotropic jitter so no two variants are metrically identical.
  const Vec3 s(rng.uniform(0.85, 1.15), rng.uniform(0.85, 1.15),
               rng.uniform(0.85, 1.15));
  pts = pts.array().rowwise() * s.transpose().array();
  PointCloud cloud(std::move(pts));
  PointMatrix centered = cloud.points().rowwise() - cloud.centroid().transpose();
  return PointCloud(std::move(centered));
}

PointCloud make_shape_variant(int variant, int n_points, Rng& rng) {
  if (variant < 0) fail(Errc::InvalidArgument, "variant must be nonnegative");
  return make_shape(static_cast<ShapeKind>(variant % kShapeKindCount), n_points, rng);
}

RegistrationPair make_pair_magnitude(const PointCloud& source,
                                     const ExperimentSpec& spec,
                                     double rotation_deg,
                                     double translation_frac) {
  spec.validate();
  if (rotation_deg < 0.0 || translation_frac < 0.0) {
    fail(Errc::InvalidArgument, "magnitudes must be nonnegative");
  }
  if (source.size() < spec.n_points) {
    fail(Errc::SourceTooSmall, "source cloud smaller than n_points");
  }
  Rng rng(spec.seed);

  PointCloud base = [&] {
    if (spec.sampling == ExperimentSpec::Sampling::Shared) {
      const Eigen::Index start = static_cast<Eigen::Index>(rng.index(
          static_cast<std::size_t>(source.size())));
      return farthest_point_sample(source, spec.n_points, start);
    }
    return draw_without_replacement(source, spec.n_points, rng);
  }();
  PointCloud base_q =
      spec.sampling == ExperimentSpec::Sampling::Shared
          ? base
          : draw_without_replacement(source, spec.n_points, rng);

  // Rotation of exactly rotation_deg about a random axis; translation of
  // translation_frac times the bounding-box diagonal in a random direction.
  Vec3 axis;
  do {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    axis = Vec3(r * std::cos(phi), r * std::sin(phi), z);
  } while (axis.norm() < 0.5);
  RigidTransform gt;
  gt.rotation =
      Eigen::AngleAxisd(deg_to_rad(rotation_deg), axis.normalized()).toRotationMatrix();
  const double diag = (base.max_corner() - base.min_corner()).norm();
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  gt.translation =
      Vec3(r * std::cos(phi), r * std::sin(phi), z) * (translation_frac * diag);

  PointCloud p = base;
  PointCloud q = apply_transform(base_q, gt);
  if (spec.partial_keep) {
    const int keep = *spec.partial_keep;
    const Eigen::Index p_seed =
        static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(p.size())));
    const Eigen::Index q_seed =
        static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(q.size())));
    p = knn_crop(p, p_seed, keep);
    q = knn_crop(q, q_seed, keep);
  }
  if (spec.noise_sigma && *spec.noise_sigma > 0.0) {
    p = add_noise(p, *spec.noise_sigma, rng);
    q = add_noise(q, *spec.noise_sigma, rng);
  }
  return {std::move(p), std::move(q), gt};
}

// ---------------------------------------------------------------------------
// key=value spec files
// ---------------------------------------------------------------------------

namespace {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t lineno;
};

std::vector<KeyValue> parse_keyvalues(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open spec file: " + path);
  std::vector<KeyValue> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed;
    for (char ch : line) {
      if (ch == '#') break;
      trimmed.push_back(ch);
    }
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\t' ||
                                trimmed.back() == '\r')) {
      trimmed.pop_back();
    }
    const std::size_t start = trimmed.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) {
      fail(Errc::ParseError,
           path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto strip = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t");
      const std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out.push_back({strip(trimmed.substr(0, eq)), strip(trimmed.substr(eq + 1)), lineno});
  }
  return out;
}

double kv_double(const KeyValue& kv, const std::string& path) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
  if (ec != std::errc{} || p != kv.value.data() + kv.value.size()) {
    fail(Errc::ParseError, path + ":" + std::to_string(kv.lineno) +
                               ": bad number for " + kv.key);
  }
  return v;
}

long long kv_int(const KeyValue& kv, const std::string& path) {
  long long v = 0;
  auto [p, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), v);
  if (ec != std::errc{} || p != kv.value.data() + kv.value.size()) {
    fail(Errc::ParseError, path + ":" + std::to_string(kv.lineno) +
                               ": bad integer for " + kv.key);
  }
  return v;
}

std::vector<double> kv_double_list(const KeyValue& kv, const std::string& path) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= kv.value.size()) {
    std::size_t comma = kv.value.find(',', pos);
    if (comma == std::string::npos) comma = kv.value.size();
    std::string tok = kv.value.substr(pos, comma - pos);
    const std::size_t a = tok.find_first_not_of(" \t");
    const std::size_t b = tok.find_last_not_of(" \t");
    tok = a == std::string::npos ? std::string() : tok.substr(a, b - a + 1);
    if (tok.empty()) {
      fail(Errc::ParseError, path + ":" + std::to_string(kv.lineno) +
                                 ": empty entry in list for " + kv.key);
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size()) {
      fail(Errc::ParseError, path + ":" + std::to_string(kv.lineno) +
                                 ": bad list number for " + kv.key);
    }
    out.push_back(v);
    pos = comma + 1;
    if (comma == kv.value.size()) break;
  }
  return out;
}

// Returns true when the key belongs to the base ExperimentSpec.
bool apply_base_key(ExperimentSpec& spec, const KeyValue& kv,
                    const std::string& path) {
  if (kv.key == "n_points") spec.n_points = static_cast<int>(kv_int(kv, path));
  else if (kv.key == "rotation_max_deg") spec.rotation_max_deg = kv_double(kv, path);
  else if (kv.key == "translation_min") spec.translation_min = kv_double(kv, path);
  else if (kv.key == "translation_max") spec.translation_max = kv_double(kv, path);
  else if (kv.key == "partial_keep") spec.partial_keep = static_cast<int>(kv_int(kv, path));
  else if (kv.key == "noise_sigma") spec.noise_sigma = kv_double(kv, path);
  else if (kv.key == "seed") spec.seed = static_cast<std::uint64_t>(kv_int(kv, path));
  else if (kv.key == "sampling") {
    if (kv.value == "shared") spec.sampling = ExperimentSpec::Sampling::Shared;
    else if (kv.value == "independent") {
      spec.sampling = ExperimentSpec::Sampling::Independent;
    } else {
      fail(Errc::ParseError, path + ":" + std::to_string(kv.lineno) +
                                 ": sampling must be shared|independent");
    }
  } else {
    return false;
  }
  return true;
}

}  // namespace

ExperimentSpec read_experiment_spec(const std::string& path) {
  ExperimentSpec spec;
  for (const KeyValue& kv : parse_keyvalues(path)) {
    if (!apply_base_key(spec, kv, path)) {
      fail(Errc::ParseError,
           path + ":" + std::to_string(kv.lineno) + ": unknown key '" + kv.key + "'");
    }
  }
  spec.validate();
  return spec;
}

BenchmarkSpec read_benchmark_spec(const std::string& path) {
  BenchmarkSpec spec;
  for (const KeyValue& kv : parse_keyvalues(path)) {
    if (apply_base_key(spec.base, kv, path)) continue;
    if (kv.key == "rotation_grid_deg") {
      spec.rotation_grid_deg = kv_double_list(kv, path);
    } else if (kv.key == "translation_grid_frac") {
      spec.translation_grid_frac = kv_double_list(kv, path);
    } else if (kv.key == "success_threshold") {
      spec.success_threshold = kv_double(kv, path);
    } else {
      fail(Errc::ParseError,
           path + ":" + std::to_string(kv.lineno) + ": unknown key '" + kv.key + "'");
    }
  }
  spec.base.validate();
  if (!(spec.success_threshold > 0.0)) {
    fail(Errc::ParseError, path + ": success_threshold must be positive");
  }
  if (spec.rotation_grid_deg.empty() != spec.translation_grid_frac.empty()) {
    fail(Errc::ParseError,
         path + ": rotation and translation grids must come together");
  }
  return spec;
}

void write_experiment_spec(const ExperimentSpec& spec, const std::string& path) {
  spec.validate();
  std::ostringstream out;
  out << "n_points = " << spec.n_points << "\n";
  out << "rotation_max_deg = " << spec.rotation_max_deg << "\n";
  out << "translation_min = " << spec.translation_min << "\n";
  out << "translation_max = " << spec.translation_max << "\n";
  if (spec.partial_keep) out << "partial_keep = " << *spec.partial_keep << "\n";
  if (spec.noise_sigma) out << "noise_sigma = " << *spec.noise_sigma << "\n";
  out << "sampling = "
      << (spec.sampling == ExperimentSpec::Sampling::Shared ? "shared" : "independent")
      << "\n";
  out << "seed = " << spec.seed << "\n";
  std::ofstream f(path);
  if (!f) fail(Errc::IoError, "cannot write spec file: " + path);
  f << out.str();
  if (!f) fail(Errc::IoError, "failed writing spec file: " + path);
}

}  // namespace bbsreg

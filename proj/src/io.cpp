#include "bbsreg/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace bbsreg {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t lineno,
                             const std::string& what) {
  fail(Errc::ParseError, path + ":" + std::to_string(lineno) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(const std::string& tok, const std::string& path,
                    std::size_t lineno) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    parse_fail(path, lineno, "expected a number, got '" + tok + "'");
  }
  if (!std::isfinite(v)) parse_fail(path, lineno, "non-finite coordinate");
  return v;
}

long long parse_count(const std::string& tok, const std::string& path,
                      std::size_t lineno) {
  long long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size() || v < 0) {
    parse_fail(path, lineno, "expected a count, got '" + tok + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                               std::chars_format::general, 17);
  return std::string(buf, p);
}

class LineReader {
 public:
  LineReader(std::istream& in, std::string path)
      : in_(in), path_(std::move(path)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno_;
    return true;
  }

  std::size_t lineno() const { return lineno_; }
  const std::string& path() const { return path_; }

 private:
  std::istream& in_;
  std::string path_;
  std::size_t lineno_ = 0;
};

PointCloud finish_cloud(std::vector<Vec3> points, const std::string& path,
                        std::size_t lineno) {
  if (points.empty()) parse_fail(path, lineno, "file contains no points");
  PointMatrix m(static_cast<Eigen::Index>(points.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = points[static_cast<std::size_t>(i)].transpose();
  }
  return PointCloud(std::move(m));
}

PointCloud read_xyz(std::istream& in, const std::string& path) {
  LineReader reader(in, path);
  std::vector<Vec3> points;
  std::string line;
  while (reader.next(line)) {
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto toks = split_ws(line);
    if (toks.size() != 3) {
      parse_fail(path, reader.lineno(),
                 "expected 3 coordinates, got " + std::to_string(toks.size()));
    }
    points.emplace_back(parse_double(toks[0], path, reader.lineno()),
                        parse_double(toks[1], path, reader.lineno()),
                        parse_double(toks[2], path, reader.lineno()));
  }
  return finish_cloud(std::move(points), path, reader.lineno());
}

struct PlyElement {
  std::string name;
  long long count = 0;
  std::vector<std::string> properties;  // property names, in order
};

PointCloud read_ply(std::istream& in, const std::string& path) {
  LineReader reader(in, path);
  std::string line;
  if (!reader.next(line) || split_ws(line) != std::vector<std::string>{"ply"}) {
    parse_fail(path, reader.lineno(), "missing 'ply' magic");
  }

  std::vector<PlyElement> elements;
  bool saw_format = false;
  bool ended = false;
  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) parse_fail(path, reader.lineno(), "blank line in header");
    if (toks[0] == "comment") continue;
    if (toks[0] == "format") {
      if (toks.size() != 3) parse_fail(path, reader.lineno(), "malformed format line");
      if (toks[1] != "ascii") {
        fail(Errc::UnsupportedFormat,
             path + ": binary PLY ('" + toks[1] + "') is not supported; "
             "only 'format ascii 1.0' can be read");
      }
      if (toks[2] != "1.0") parse_fail(path, reader.lineno(), "unsupported PLY version");
      saw_format = true;
    } else if (toks[0] == "element") {
      if (toks.size() != 3) parse_fail(path, reader.lineno(), "malformed element line");
      PlyElement el;
      el.name = toks[1];
      el.count = parse_count(toks[2], path, reader.lineno());
      elements.push_back(std::move(el));
    } else if (toks[0] == "property") {
      if (elements.empty()) {
        parse_fail(path, reader.lineno(), "property before any element");
      }
      if (toks.size() < 3) parse_fail(path, reader.lineno(), "malformed property line");
      if (toks[1] == "list") {
        if (elements.back().name == "vertex") {
          parse_fail(path, reader.lineno(), "list property on vertex element");
        }
        elements.back().properties.push_back(toks.back());
      } else {
        elements.back().properties.push_back(toks[2]);
      }
    } else if (toks[0] == "end_header") {
      ended = true;
      break;
    } else {
      parse_fail(path, reader.lineno(), "unknown header keyword '" + toks[0] + "'");
    }
  }
  if (!ended) parse_fail(path, reader.lineno(), "header never ends");
  if (!saw_format) parse_fail(path, reader.lineno(), "header lacks a format line");

  const auto vertex_it =
      std::find_if(elements.begin(), elements.end(),
                   [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex_it == elements.end()) {
    parse_fail(path, reader.lineno(), "no vertex element declared");
  }
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_it->properties.size(); ++i) {
    if (vertex_it->properties[i] == "x") ix = static_cast<int>(i);
    if (vertex_it->properties[i] == "y") iy = static_cast<int>(i);
    if (vertex_it->properties[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) {
    parse_fail(path, reader.lineno(), "vertex element lacks x/y/z properties");
  }

  std::vector<Vec3> points;
  for (const PlyElement& el : elements) {
    for (long long row = 0; row < el.count; ++row) {
      if (!reader.next(line)) {
        parse_fail(path, reader.lineno() + 1,
                   "file ends inside element '" + el.name + "'");
      }
      if (el.name != "vertex") continue;  // skip declared non-vertex rows
      const auto toks = split_ws(line);
      if (toks.size() != el.properties.size()) {
        parse_fail(path, reader.lineno(),
                   "vertex row has " + std::to_string(toks.size()) +
                       " values, header declares " +
                       std::to_string(el.properties.size()));
      }
      points.emplace_back(
          parse_double(toks[static_cast<std::size_t>(ix)], path, reader.lineno()),
          parse_double(toks[static_cast<std::size_t>(iy)], path, reader.lineno()),
          parse_double(toks[static_cast<std::size_t>(iz)], path, reader.lineno()));
    }
  }
  while (reader.next(line)) {
    if (!split_ws(line).empty()) {
      parse_fail(path, reader.lineno(), "content after the declared elements");
    }
  }
  return finish_cloud(std::move(points), path, reader.lineno());
}

PointCloud read_off(std::istream& in, const std::string& path) {
  LineReader reader(in, path);
  std::string line;
  std::vector<std::string> counts;
  bool have_magic = false;
  while (reader.next(line)) {
    auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (!have_magic) {
      if (toks[0] != "OFF") parse_fail(path, reader.lineno(), "missing OFF magic");
      have_magic = true;
      if (toks.size() == 1) continue;       // counts on the next line
      toks.erase(toks.begin());             // 'OFF nv nf ne' on one line
    }
    counts = toks;
    break;
  }
  if (!have_magic) parse_fail(path, reader.lineno(), "missing OFF magic");
  if (counts.size() != 3) {
    parse_fail(path, reader.lineno(), "expected 'nv nf ne' counts");
  }
  const long long nv = parse_count(counts[0], path, reader.lineno());
  const long long nf = parse_count(counts[1], path, reader.lineno());

  std::vector<Vec3> points;
  long long got = 0;
  while (got < nv) {
    if (!reader.next(line)) {
      parse_fail(path, reader.lineno() + 1, "file ends before declared vertices");
    }
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 3) {
      parse_fail(path, reader.lineno(), "vertex line must hold 3 coordinates");
    }
    points.emplace_back(parse_double(toks[0], path, reader.lineno()),
                        parse_double(toks[1], path, reader.lineno()),
                        parse_double(toks[2], path, reader.lineno()));
    ++got;
  }
  for (long long f = 0; f < nf; ++f) {
    if (!reader.next(line)) {
      parse_fail(path, reader.lineno() + 1, "file ends before declared faces");
    }
    if (split_ws(line).empty()) --f;  // tolerate blank separator lines
  }
  while (reader.next(line)) {
    if (!split_ws(line).empty()) {
      parse_fail(path, reader.lineno(), "content after the declared elements");
    }
  }
  return finish_cloud(std::move(points), path, reader.lineno());
}

}  // namespace

CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "xyz" || ext == "txt") return CloudFormat::Xyz;
  if (ext == "ply") return CloudFormat::PlyAscii;
  if (ext == "off") return CloudFormat::Off;
  fail(Errc::UnsupportedFormat,
       "cannot infer cloud format from extension '." + ext + "'");
}

PointCloud read_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open cloud file: " + path);
  switch (format) {
    case CloudFormat::Xyz: return read_xyz(in, path);
    case CloudFormat::PlyAscii: return read_ply(in, path);
    case CloudFormat::Off: return read_off(in, path);
  }
  fail(Errc::UnsupportedFormat, "unknown cloud format");
}

PointCloud read_cloud(const std::string& path) {
  return read_cloud(path, format_from_path(path));
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(Errc::IoError, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(Errc::IoError, "cannot rename into place: " + path);
  }
}

void write_cloud(const PointCloud& cloud, const std::string& path,
                 CloudFormat format) {
  std::ostringstream out;
  switch (format) {
    case CloudFormat::Xyz:
      for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points()(i, 0)) << ' '
            << format_double(cloud.points()(i, 1)) << ' '
            << format_double(cloud.points()(i, 2)) << '\n';
      }
      break;
    case CloudFormat::PlyAscii:
      out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
          << "\nproperty double x\nproperty double y\nproperty double z\n"
             "end_header\n";
      for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points()(i, 0)) << ' '
            << format_double(cloud.points()(i, 1)) << ' '
            << format_double(cloud.points()(i, 2)) << '\n';
      }
      break;
    case CloudFormat::Off:
      out << "OFF\n" << cloud.size() << " 0 0\n";
      for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points()(i, 0)) << ' '
            << format_double(cloud.points()(i, 1)) << ' '
            << format_double(cloud.points()(i, 2)) << '\n';
      }
      break;
  }
  atomic_write_text(path, out.str());
}

void write_cloud(const PointCloud& cloud, const std::string& path) {
  write_cloud(cloud, path, format_from_path(path));
}

RigidTransform read_transform(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open transform file: " + path);
  LineReader reader(in, path);
  RigidTransform xf;
  std::string line;
  for (int row = 0; row < 3;) {
    if (!reader.next(line)) {
      parse_fail(path, reader.lineno() + 1, "expected 3 transform rows");
    }
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() != 4) {
      parse_fail(path, reader.lineno(), "transform row must hold 4 numbers");
    }
    for (int col = 0; col < 3; ++col) {
      xf.rotation(row, col) =
          parse_double(toks[static_cast<std::size_t>(col)], path, reader.lineno());
    }
    xf.translation[row] = parse_double(toks[3], path, reader.lineno());
    ++row;
  }
  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (!toks.empty() && toks[0][0] != '#') {
      parse_fail(path, reader.lineno(), "content after the transform rows");
    }
  }
  const double ortho =
      (xf.rotation.transpose() * xf.rotation - Mat3::Identity()).norm();
  if (ortho > 1e-6 || xf.rotation.determinant() < 0.0) {
    fail(Errc::NotARotation, path + ": rotation block violates SO(3) by " +
                                 std::to_string(ortho));
  }
  return xf;
}

void write_transform(const RigidTransform& xf, const std::string& path) {
  std::ostringstream out;
  for (int row = 0; row < 3; ++row) {
    out << format_double(xf.rotation(row, 0)) << ' '
        << format_double(xf.rotation(row, 1)) << ' '
        << format_double(xf.rotation(row, 2)) << ' '
        << format_double(xf.translation[row]) << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open matrix file: " + path);
  LineReader reader(in, path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (reader.next(line)) {
    const auto toks = split_ws(line);
    if (toks.empty() || toks[0][0] == '#') continue;
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) row.push_back(parse_double(t, path, reader.lineno()));
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(path, reader.lineno(), "ragged matrix row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_fail(path, reader.lineno(), "empty matrix file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

PointCloud remove_ground_plane(const PointCloud& cloud, double layer_half_width) {
  if (layer_half_width < 0.0) {
    fail(Errc::InvalidArgument, "layer half width must be nonnegative");
  }
  if (cloud.size() < 4) {
    fail(Errc::DegenerateFit, "plane fit needs at least four points");
  }
  const Vec3 centroid = cloud.centroid();
  const PointMatrix centered = cloud.points().rowwise() - centroid.transpose();
  const Mat3 cov = centered.transpose() * centered / static_cast<double>(cloud.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues();  // ascending
  if (!(evals[1] > evals[2] * 1e-12)) {
    fail(Errc::DegenerateFit, "covariance rank below 2; no plane to fit");
  }
  const Vec3 normal = eig.eigenvectors().col(0);

  std::vector<Eigen::Index> survivors;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (std::abs(centered.row(i).dot(normal)) > layer_half_width) {
      survivors.push_back(i);
    }
  }
  if (survivors.empty()) {
    fail(Errc::AllRemoved, "every point lies inside the ground layer");
  }
  PointMatrix out(static_cast<Eigen::Index>(survivors.size()), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) = cloud.points().row(survivors[static_cast<std::size_t>(i)]);
  }
  return PointCloud(std::move(out));
}

}  // namespace bbsreg

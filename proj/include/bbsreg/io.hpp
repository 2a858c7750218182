#pragma once

#include <string>

#include "bbsreg/core.hpp"

namespace bbsreg {

enum class CloudFormat { Xyz, PlyAscii, Off };

/// Picks the format from the file extension (.xyz/.txt, .ply, .off);
/// throws UnsupportedFormat otherwise.
CloudFormat format_from_path(const std::string& path);

/// XYZ: three whitespace-separated floats per line, '#' comment lines
/// ignored. PLY: ascii 1.0 only (binary rejected with UnsupportedFormat),
/// x/y/z picked out of the vertex properties, other elements skipped.
/// OFF: vertices read, faces ignored. Content after the declared elements
/// is a ParseError; all errors carry a line number.
PointCloud read_cloud(const std::string& path, CloudFormat format);
PointCloud read_cloud(const std::string& path);

/// Full-precision (17 significant digits) text output; XYZ round-trips
/// bit-exactly. Writes are atomic (temp file + rename).
void write_cloud(const PointCloud& cloud, const std::string& path,
                 CloudFormat format);
void write_cloud(const PointCloud& cloud, const std::string& path);

/// Transform file: three lines of four floats, each row [R | t]. Read
/// validates the SO(3) invariants and throws NotARotation past 1e-6.
RigidTransform read_transform(const std::string& path);
void write_transform(const RigidTransform& xf, const std::string& path);

/// Plain-text matrix, one whitespace-separated row per line.
void write_matrix(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd read_matrix(const std::string& path);

/// Total-least-squares plane fit (smallest covariance eigenvector), then
/// removes points whose absolute plane distance is at most
/// layer_half_width. Survivors keep their original order. The default
/// clears a layer of 0.5 total thickness.
PointCloud remove_ground_plane(const PointCloud& cloud,
                               double layer_half_width = 0.25);

/// Atomic text write used by every file producer: write to a temp file in
/// the destination directory, then rename over the target.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace bbsreg

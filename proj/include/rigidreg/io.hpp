/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <string>

#include "rigidreg/geom.hpp"

namespace rigidreg {

/// Text format: one `x y z` triple per line, `#` starts a comment.
PointCloud read_xyz(const std::string& path);
void write_xyz(const PointCloud& cloud, const std::string& path);

/// ASCII PLY with an `element vertex` carrying x, y, z properties.
/// Additional properties and elements are ignored.
PointCloud read_ply(const std::string& path);
void write_ply(const PointCloud& cloud, const std::string& path);

/// Dispatches on the file extension (.xyz / .ply, case-insensitive).
PointCloud read_cloud(const std::string& path);
void write_cloud(const PointCloud& cloud, const std::string& path);

}  // namespace rigidreg

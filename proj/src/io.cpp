/*
 * (C) Copyright 2026 rigidreg contributors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "rigidreg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rigidreg {

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(path + ": " + what);
}

void format_point(char* buf, std::size_t cap, const Vec3& p) {
  // 17 significant digits round-trips a double exactly.
  std::snprintf(buf, cap, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
}

}  // namespace

PointCloud read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::vector<Vec3> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Vec3 p;
    if (ls >> p.x >> p.y >> p.z) {
      pts.push_back(p);
    } else {
      std::string leftover;
      std::istringstream probe(line);
      if (probe >> leftover)
        fail(path, "malformed point on line " + std::to_string(lineno));
    }
  }
  if (pts.empty()) fail(path, "no points");
  return PointCloud(std::move(pts));
}

void write_xyz(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  char buf[128];
  for (const Vec3& p : cloud.points()) {
    format_point(buf, sizeof buf, p);
    out << buf;
  }
  if (!out) fail(path, "write failed");
}

PointCloud read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) fail(path, "not a PLY file");

  long vertex_count = -1;
  int n_props = 0;
  int ix = -1, iy = -1, iz = -1;
  bool in_vertex_element = false;
  bool ascii = false;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (tok == "element") {
      std::string name;
      long count = 0;
      ls >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) vertex_count = count;
    } else if (tok == "property" && in_vertex_element) {
      std::string type, name;
      ls >> type >> name;
      if (name == "x") ix = n_props;
      if (name == "y") iy = n_props;
      if (name == "z") iz = n_props;
      ++n_props;
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) fail(path, "only ascii PLY is supported");
  if (vertex_count < 1) fail(path, "missing element vertex");
  if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z properties");

  std::vector<Vec3> pts;
  pts.reserve(vertex_count);
  std::vector<double> fields(n_props);
  for (long v = 0; v < vertex_count; ++v) {
    if (!std::getline(in, line)) fail(path, "truncated vertex data");
    std::istringstream ls(line);
    for (int f = 0; f < n_props; ++f)
      if (!(ls >> fields[f])) fail(path, "malformed vertex on line for vertex " + std::to_string(v));
    pts.push_back({fields[ix], fields[iy], fields[iz]});
  }
  return PointCloud(std::move(pts));
}

void write_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "end_header\n";
  char buf[128];
  for (const Vec3& p : cloud.points()) {
    format_point(buf, sizeof buf, p);
    out << buf;
  }
  if (!out) fail(path, "write failed");
}

PointCloud read_cloud(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "ply") return read_ply(path);
  return read_xyz(path);
}

void write_cloud(const PointCloud& cloud, const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "ply")
    write_ply(cloud, path);
  else
    write_xyz(cloud, path);
}

}  // namespace rigidreg

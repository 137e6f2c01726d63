// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "nocspose/errors.hpp"

namespace nocspose {

TriangleMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  TriangleMesh mesh;
  bool any_color = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ss >> x >> y >> z)) throw IoError("malformed vertex in " + path);
      mesh.vertices.emplace_back(x, y, z);
      double r, g, b;
      if (ss >> r >> g >> b) {
        mesh.vertex_color.resize(mesh.vertices.size(),
                                 Eigen::Vector3d(0.5, 0.5, 0.5));
        mesh.vertex_color.back() = {r, g, b};
        any_color = true;
      } else if (any_color) {
        mesh.vertex_color.resize(mesh.vertices.size(),
                                 Eigen::Vector3d(0.5, 0.5, 0.5));
      }
    } else if (tag == "f") {
      std::vector<int> face;
      std::string token;
      while (ss >> token) {
        // accept v, v/vt, v//vn, v/vt/vn
        const size_t slash = token.find('/');
        const int idx = std::stoi(token.substr(0, slash));
        // negative indices are relative to the current vertex count
        face.push_back(idx > 0 ? idx - 1
                               : static_cast<int>(mesh.vertices.size()) + idx);
      }
      if (face.size() < 3) throw IoError("degenerate face in " + path);
      for (size_t i = 1; i + 1 < face.size(); ++i) {
        mesh.triangles.push_back({face[0], face[i], face[i + 1]});
      }
    }
    // other records (vn, vt, usemtl, ...) are ignored
  }
  for (const auto& t : mesh.triangles) {
    for (int i : t) {
      if (i < 0 || static_cast<size_t>(i) >= mesh.vertices.size()) {
        throw IoError("face index out of range in " + path);
      }
    }
  }
  if (any_color) mesh.vertex_color.resize(mesh.vertices.size(),
                                          Eigen::Vector3d(0.5, 0.5, 0.5));
  return mesh;
}

void write_obj(const std::string& path, const TriangleMesh& mesh) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path);
  const bool colors = mesh.has_color();
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const auto& v = mesh.vertices[i];
    if (colors) {
      const auto& c = mesh.vertex_color[i];
      std::fprintf(f, "v %.9g %.9g %.9g %.9g %.9g %.9g\n", v.x(), v.y(), v.z(),
                   c.x(), c.y(), c.z());
    } else {
      std::fprintf(f, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    }
  }
  for (const auto& t : mesh.triangles) {
    std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
  }
  std::fclose(f);
}

}  // namespace nocspose

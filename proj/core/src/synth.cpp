// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "nocspose/errors.hpp"
#include "nocspose/random.hpp"
#include "nocspose/raster.hpp"

namespace nocspose {

namespace {

void append_box(TriangleMesh& mesh, const Eigen::Vector3d& center,
                const Eigen::Vector3d& size) {
  const int base = static_cast<int>(mesh.vertices.size());
  const Eigen::Vector3d h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back(center + Eigen::Vector3d((i & 1) ? h.x() : -h.x(),
                                                     (i & 2) ? h.y() : -h.y(),
                                                     (i & 4) ? h.z() : -h.z()));
  }
  static const int faces[12][3] = {
      {0, 2, 1}, {1, 2, 3},
      {4, 5, 6}, {5, 7, 6},
      {0, 1, 4}, {1, 5, 4},
      {2, 6, 3}, {3, 6, 7},
      {0, 4, 2}, {2, 4, 6},
      {1, 3, 5}, {3, 7, 5},
  };
  for (const auto& f : faces) {
    mesh.triangles.push_back({base + f[0], base + f[1], base + f[2]});
  }
}

TriangleMesh make_box(const Eigen::Vector3d& size) {
  TriangleMesh mesh;
  append_box(mesh, Eigen::Vector3d::Zero(), size);
  return mesh;
}

TriangleMesh make_icosphere(double radius, int level) {
  // icosahedron
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    const auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int id = static_cast<int>(verts.size());
      verts.push_back((verts[static_cast<size_t>(a)] +
                       verts[static_cast<size_t>(b)]).normalized());
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const auto& v : verts) mesh.vertices.push_back(radius * v);
  mesh.triangles = std::move(faces);
  return mesh;
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  TriangleMesh mesh;
  const double hh = 0.5 * height;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * M_PI * i / segments;
    const double x = radius * std::cos(a);
    const double z = radius * std::sin(a);
    mesh.vertices.push_back({x, -hh, z});
    mesh.vertices.push_back({x, hh, z});
  }
  const int bottom_center = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back({0.0, -hh, 0.0});
  const int top_center = bottom_center + 1;
  mesh.vertices.push_back({0.0, hh, 0.0});

  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    mesh.triangles.push_back({b0, t0, b1});
    mesh.triangles.push_back({b1, t0, t1});
    mesh.triangles.push_back({bottom_center, b1, b0});
    mesh.triangles.push_back({top_center, t0, t1});
  }
  return mesh;
}

void paint(TriangleMesh& mesh, ColorPattern pattern, std::uint64_t seed) {
  if (mesh.vertices.empty()) return;
  Eigen::Vector3d lo, hi;
  mesh.bounding_box(lo, hi);
  const Eigen::Vector3d extent =
      (hi - lo).cwiseMax(Eigen::Vector3d::Constant(1e-12));
  Rng rng(seed);
  const Eigen::Vector3d uniform_color(0.25 + 0.5 * rng.uniform(),
                                      0.25 + 0.5 * rng.uniform(),
                                      0.25 + 0.5 * rng.uniform());
  mesh.vertex_color.resize(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Eigen::Vector3d t =
        (mesh.vertices[i] - lo).cwiseQuotient(extent);
    switch (pattern) {
      case ColorPattern::kAxisGradient:
        mesh.vertex_color[i] = t;
        break;
      case ColorPattern::kChecker: {
        const int parity = (static_cast<int>(std::floor(t.x() * 4.0)) +
                            static_cast<int>(std::floor(t.y() * 4.0)) +
                            static_cast<int>(std::floor(t.z() * 4.0))) % 2;
        mesh.vertex_color[i] = parity == 0
                                   ? Eigen::Vector3d(0.9, 0.9, 0.9)
                                   : Eigen::Vector3d(0.1, 0.1, 0.1);
        break;
      }
      case ColorPattern::kUniform:
        mesh.vertex_color[i] = uniform_color;
        break;
    }
  }
}

}  // namespace

PrimitiveKind primitive_kind_from_string(const std::string& name) {
  if (name == "box") return PrimitiveKind::kBox;
  if (name == "sphere") return PrimitiveKind::kSphere;
  if (name == "cylinder") return PrimitiveKind::kCylinder;
  if (name == "composite-marker") return PrimitiveKind::kCompositeMarker;
  throw InvalidSpec("unknown primitive kind: " + name);
}

std::string to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::kBox: return "box";
    case PrimitiveKind::kSphere: return "sphere";
    case PrimitiveKind::kCylinder: return "cylinder";
    case PrimitiveKind::kCompositeMarker: return "composite-marker";
  }
  return "box";
}

ColorPattern color_pattern_from_string(const std::string& name) {
  if (name == "gradient") return ColorPattern::kAxisGradient;
  if (name == "checker") return ColorPattern::kChecker;
  if (name == "uniform") return ColorPattern::kUniform;
  throw InvalidSpec("unknown color pattern: " + name);
}

std::string to_string(ColorPattern pattern) {
  switch (pattern) {
    case ColorPattern::kAxisGradient: return "gradient";
    case ColorPattern::kChecker: return "checker";
    case ColorPattern::kUniform: return "uniform";
  }
  return "gradient";
}

TriangleMesh make_primitive_scene(const SceneSpec& spec, std::uint64_t seed) {
  for (double d : spec.dimensions) {
    if (!(d > 0.0)) throw InvalidSpec("primitive dimensions must be positive");
  }
  const auto dim = [&](size_t i, double fallback) {
    return i < spec.dimensions.size() ? spec.dimensions[i] : fallback;
  };

  TriangleMesh mesh;
  switch (spec.kind) {
    case PrimitiveKind::kBox:
      mesh = make_box({dim(0, 1.0), dim(1, 1.0), dim(2, 1.0)});
      break;
    case PrimitiveKind::kSphere:
      mesh = make_icosphere(dim(0, 0.5),
                            static_cast<int>(std::lround(dim(1, 3.0))));
      break;
    case PrimitiveKind::kCylinder:
      mesh = make_cylinder(dim(0, 0.35), dim(1, 1.0),
                           static_cast<int>(std::lround(dim(2, 24.0))));
      break;
    case PrimitiveKind::kCompositeMarker: {
      // offset boxes with distinct extents so no rotation maps the shape
      // onto itself; mild seeded jitter varies the family without risking
      // an accidental symmetry
      const double s = dim(0, 1.0);
      Rng jitter(mix_seed(seed, 3));
      const auto j = [&](double v) { return v * jitter.uniform(0.85, 1.15); };
      append_box(mesh, {0.0, 0.0, 0.0}, {j(0.9) * s, j(0.5) * s, j(0.6) * s});
      append_box(mesh, {j(0.33) * s, j(0.3) * s, j(0.18) * s},
                 {j(0.24) * s, j(0.34) * s, j(0.24) * s});
      append_box(mesh, {-j(0.3) * s, -j(0.12) * s, -j(0.22) * s},
                 {j(0.18) * s, j(0.5) * s, j(0.16) * s});
      break;
    }
  }
  paint(mesh, spec.pattern, mix_seed(seed, 7));
  return mesh;
}

SampledCamera sample_camera(const CameraSamplerConfig& cfg) {
  Rng rng(cfg.seed);
  SampledCamera cam;

  cam.fov_deg = std::clamp(rng.normal(cfg.fov_mean_deg, cfg.fov_std_deg),
                           cfg.fov_min_deg, cfg.fov_max_deg);
  cam.intrinsics = CameraIntrinsics::from_fov_deg(cam.fov_deg, cfg.image_width,
                                                  cfg.image_height);
  cam.intrinsics.cx += rng.normal(0.0, cfg.principal_point_jitter_std_px);
  cam.intrinsics.cy += rng.normal(0.0, cfg.principal_point_jitter_std_px);
  cam.intrinsics.cx =
      std::clamp(cam.intrinsics.cx, 0.0, cfg.image_width - 1.0);
  cam.intrinsics.cy =
      std::clamp(cam.intrinsics.cy, 0.0, cfg.image_height - 1.0);

  cam.spherical.elevation_deg =
      rng.uniform(cfg.elevation_min_deg, cfg.elevation_max_deg);
  cam.spherical.azimuth_deg =
      rng.uniform(cfg.azimuth_min_deg, cfg.azimuth_max_deg);
  cam.spherical.radius = rng.uniform(cfg.radius_min, cfg.radius_max);
  cam.spherical.target = nocs_cube_center();
  cam.pose = cam.spherical.to_pose();
  return cam;
}

Episode make_episode(const TriangleMesh& mesh, int n_views,
                     const CameraSamplerConfig& cfg, std::uint64_t seed) {
  if (mesh.empty()) throw EmptyMesh("make_episode: empty mesh");
  if (n_views < 1 || n_views > 6) {
    throw InvalidSpec("make_episode: n_views must be within [1, 6], got " +
                      std::to_string(n_views));
  }

  Episode ep;
  ep.seed = seed;

  // object in the unit cube; cameras live in that frame. After baking,
  // vertex_nocs == vertices exactly.
  TriangleMesh cube_mesh = mesh;
  normalize_to_nocs(cube_mesh);
  cube_mesh = bake_nocs_frame(cube_mesh);

  std::vector<SampledCamera> cams(static_cast<size_t>(n_views));
  for (int i = 0; i < n_views; ++i) {
    CameraSamplerConfig view_cfg = cfg;
    view_cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(i) + 1);
    cams[static_cast<size_t>(i)] = sample_camera(view_cfg);
  }

  ep.phi0_deg = cams[0].spherical.azimuth_deg;
  const TriangleMesh aligned =
      apply_azimuth_alignment(cube_mesh, ep.phi0_deg, &ep.nocs_frame);
  ep.nocs_mesh = bake_nocs_frame(aligned);

  ep.views.resize(static_cast<size_t>(n_views));
  for (int i = 0; i < n_views; ++i) {
    EpisodeView& view = ep.views[static_cast<size_t>(i)];
    const SampledCamera& cam = cams[static_cast<size_t>(i)];
    view.intrinsics = cam.intrinsics;
    view.fov_deg = cam.fov_deg;
    view.spherical = cam.spherical;
    view.gt_pose = pose_in_nocs_frame(cam.pose, ep.nocs_frame);

    const RenderBuffers rb =
        rasterize(ep.nocs_mesh, view.gt_pose, view.intrinsics, 4);
    view.rgb = rb.rgb;
    view.mask = rb.mask;
    view.nocs = render_nocs_view(ep.nocs_mesh, view.gt_pose, view.intrinsics);
  }
  return ep;
}

NocsMap corrupt_nocs(const NocsMap& map, const NoiseSpec& spec) {
  NocsMap out = map;
  Rng rng(spec.seed);

  if (spec.gaussian_sigma > 0.0) {
    for (size_t i = 0; i < out.valid.size(); ++i) {
      if (!out.valid[i]) continue;
      for (int c = 0; c < 3; ++c) {
        out.coords[i * 3 + c] = std::clamp(
            out.coords[i * 3 + c] + rng.normal(0.0, spec.gaussian_sigma), 0.0,
            1.0);
      }
    }
  }

  if (spec.outlier_fraction > 0.0) {
    std::vector<size_t> valid_idx;
    for (size_t i = 0; i < out.valid.size(); ++i) {
      if (out.valid[i]) valid_idx.push_back(i);
    }
    const size_t k = static_cast<size_t>(
        std::floor(spec.outlier_fraction * static_cast<double>(valid_idx.size())));
    // partial Fisher-Yates picks k pixels without replacement
    for (size_t j = 0; j < k && j < valid_idx.size(); ++j) {
      const size_t pick =
          j + static_cast<size_t>(rng.uniform_index(valid_idx.size() - j));
      std::swap(valid_idx[j], valid_idx[pick]);
      for (int c = 0; c < 3; ++c) {
        out.coords[valid_idx[j] * 3 + c] = rng.uniform();
      }
    }
  }

  for (int pass = 0; pass < spec.boundary_erosion_px; ++pass) {
    std::vector<std::uint8_t> eroded = out.valid;
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        if (!out.valid[out.index(x, y)]) continue;
        const bool interior = x > 0 && x + 1 < out.width && y > 0 &&
                              y + 1 < out.height &&
                              out.valid[out.index(x - 1, y)] &&
                              out.valid[out.index(x + 1, y)] &&
                              out.valid[out.index(x, y - 1)] &&
                              out.valid[out.index(x, y + 1)];
        if (!interior) eroded[out.index(x, y)] = 0;
      }
    }
    out.valid = std::move(eroded);
  }
  return out;
}

PoseSE3 azimuth_flipped_pose(const PoseSE3& pose, double degrees) {
  const double a = deg_to_rad(degrees);
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  rot(0, 0) = std::cos(a);
  rot(0, 2) = std::sin(a);
  rot(2, 0) = -std::sin(a);
  rot(2, 2) = std::cos(a);
  const Eigen::Vector3d c = nocs_cube_center();

  PoseSE3 out;
  out.rotation = pose.rotation * rot;
  out.translation = pose.translation + pose.rotation * (c - rot * c);
  return out;
}

}  // namespace nocspose

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nocspose/errors.hpp"

namespace nocspose {

namespace {

constexpr double kNearPlane = 1e-6;
constexpr float kInf = std::numeric_limits<float>::infinity();

// A polygon vertex during near-plane clipping: camera-space position plus
// barycentric coordinates with respect to the original triangle, so clipped
// geometry still interpolates the original vertex attributes.
struct ClipVertex {
  Eigen::Vector3d cam;
  Eigen::Vector3d bary;
};

int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool a_in = a.cam.z() >= kNearPlane;
    const bool b_in = b.cam.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.cam.z()) / (b.cam.z() - a.cam.z());
      out[n++] = {a.cam + t * (b.cam - a.cam), a.bary + t * (b.bary - a.bary)};
    }
  }
  return n;
}

// Per-sub-sample fragment record. Barycentrics refer to the original
// triangle's vertices; b2 is implied.
struct Fragment {
  float z = kInf;
  std::int32_t tri = -1;
  float b0 = 0.0f;
  float b1 = 0.0f;
};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

RenderBuffers::RenderBuffers(int width, int height)
    : rgb(width, height, 3),
      mask(width, height, 1),
      depth(width, height, 1, kInf),
      nocs(width, height, 3) {}

RenderBuffers rasterize(const TriangleMesh& mesh, const PoseSE3& pose,
                        const CameraIntrinsics& k, int supersample) {
  const int ss = std::max(1, supersample);
  const int sw = k.width * ss;
  const int sh = k.height * ss;
  RenderBuffers out(k.width, k.height);
  if (mesh.empty() || mesh.triangles.empty()) return out;

  std::vector<Eigen::Vector3d> cam(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam[i] = pose.apply(mesh.vertices[i]);
  }

  std::vector<Fragment> frags(static_cast<size_t>(sw) * sh);
  const double inv_ss = 1.0 / ss;

  for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    const ClipVertex in[3] = {
        {cam[static_cast<size_t>(tri[0])], {1.0, 0.0, 0.0}},
        {cam[static_cast<size_t>(tri[1])], {0.0, 1.0, 0.0}},
        {cam[static_cast<size_t>(tri[2])], {0.0, 0.0, 1.0}},
    };
    ClipVertex poly[4];
    const int n = clip_near(in, poly);
    if (n < 3) continue;

    // project the clipped polygon once
    double su[4], sv[4], invz[4];
    Eigen::Vector3d bary_over_z[4];
    for (int i = 0; i < n; ++i) {
      const double z = poly[i].cam.z();
      su[i] = k.fx * poly[i].cam.x() / z + k.cx;
      sv[i] = k.fy * poly[i].cam.y() / z + k.cy;
      invz[i] = 1.0 / z;
      bary_over_z[i] = poly[i].bary * invz[i];
    }

    for (int f = 1; f + 1 < n; ++f) {
      const int ia = 0, ib = f, ic = f + 1;
      double area2 = edge(su[ia], sv[ia], su[ib], sv[ib], su[ic], sv[ic]);
      if (area2 == 0.0) continue;
      const double flip = area2 < 0.0 ? -1.0 : 1.0;
      area2 *= flip;

      const double min_u = std::min({su[ia], su[ib], su[ic]});
      const double max_u = std::max({su[ia], su[ib], su[ic]});
      const double min_v = std::min({sv[ia], sv[ib], sv[ic]});
      const double max_v = std::max({sv[ia], sv[ib], sv[ic]});
      // sub-sample g sits at (g + 0.5) / ss in pixel units
      int x0 = static_cast<int>(std::floor(min_u * ss - 0.5));
      int x1 = static_cast<int>(std::ceil(max_u * ss - 0.5));
      int y0 = static_cast<int>(std::floor(min_v * ss - 0.5));
      int y1 = static_cast<int>(std::ceil(max_v * ss - 0.5));
      x0 = std::max(x0, 0);
      y0 = std::max(y0, 0);
      x1 = std::min(x1, sw - 1);
      y1 = std::min(y1, sh - 1);
      if (x0 > x1 || y0 > y1) continue;

      for (int gy = y0; gy <= y1; ++gy) {
        const double py = (gy + 0.5) * inv_ss;
        for (int gx = x0; gx <= x1; ++gx) {
          const double px = (gx + 0.5) * inv_ss;
          const double w0 = flip * edge(su[ib], sv[ib], su[ic], sv[ic], px, py);
          const double w1 = flip * edge(su[ic], sv[ic], su[ia], sv[ia], px, py);
          const double w2 = flip * edge(su[ia], sv[ia], su[ib], sv[ib], px, py);
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          const double l0 = w0 / area2;
          const double l1 = w1 / area2;
          const double l2 = w2 / area2;
          const double iz = l0 * invz[ia] + l1 * invz[ib] + l2 * invz[ic];
          const double z = 1.0 / iz;
          Fragment& fr = frags[static_cast<size_t>(gy) * sw + gx];
          if (static_cast<float>(z) < fr.z) {
            const Eigen::Vector3d ob =
                (l0 * bary_over_z[ia] + l1 * bary_over_z[ib] +
                 l2 * bary_over_z[ic]) *
                z;
            fr.z = static_cast<float>(z);
            fr.tri = static_cast<std::int32_t>(ti);
            fr.b0 = static_cast<float>(ob.x());
            fr.b1 = static_cast<float>(ob.y());
          }
        }
      }
    }
  }

  // Resolve order for the depth sample: sub-samples ranked by distance from
  // the pixel center, ties in row-major order.
  std::vector<int> order(static_cast<size_t>(ss) * ss);
  std::iota(order.begin(), order.end(), 0);
  const double half = 0.5 * ss;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = (a % ss + 0.5 - half) * (a % ss + 0.5 - half) +
                      (a / ss + 0.5 - half) * (a / ss + 0.5 - half);
    const double db = (b % ss + 0.5 - half) * (b % ss + 0.5 - half) +
                      (b / ss + 0.5 - half) * (b / ss + 0.5 - half);
    return da < db;
  });

  const bool has_color = mesh.has_color();
  const bool has_nocs = mesh.has_nocs();
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      int covered = 0;
      double rgb_acc[3] = {0.0, 0.0, 0.0};
      double nocs_acc[3] = {0.0, 0.0, 0.0};
      for (int sj = 0; sj < ss; ++sj) {
        const size_t row = (static_cast<size_t>(y) * ss + sj) * sw;
        for (int si = 0; si < ss; ++si) {
          const Fragment& fr = frags[row + static_cast<size_t>(x) * ss + si];
          if (fr.tri < 0) continue;
          ++covered;
          const auto& tri = mesh.triangles[static_cast<size_t>(fr.tri)];
          const double b0 = fr.b0;
          const double b1 = fr.b1;
          const double b2 = 1.0 - b0 - b1;
          if (has_color) {
            for (int c = 0; c < 3; ++c) {
              rgb_acc[c] += b0 * mesh.vertex_color[static_cast<size_t>(tri[0])][c] +
                            b1 * mesh.vertex_color[static_cast<size_t>(tri[1])][c] +
                            b2 * mesh.vertex_color[static_cast<size_t>(tri[2])][c];
            }
          } else {
            for (double& c : rgb_acc) c += 0.5;
          }
          if (has_nocs) {
            for (int c = 0; c < 3; ++c) {
              nocs_acc[c] += b0 * mesh.vertex_nocs[static_cast<size_t>(tri[0])][c] +
                             b1 * mesh.vertex_nocs[static_cast<size_t>(tri[1])][c] +
                             b2 * mesh.vertex_nocs[static_cast<size_t>(tri[2])][c];
            }
          }
        }
      }
      if (covered == 0) continue;
      out.mask.at(x, y) = static_cast<float>(covered) / (ss * ss);
      for (int c = 0; c < 3; ++c) {
        out.rgb.at(x, y, c) = static_cast<float>(rgb_acc[c] / covered);
        out.nocs.at(x, y, c) = static_cast<float>(nocs_acc[c] / covered);
      }
      for (int idx : order) {
        const Fragment& fr =
            frags[(static_cast<size_t>(y) * ss + idx / ss) * sw +
                  static_cast<size_t>(x) * ss + idx % ss];
        if (fr.tri >= 0) {
          out.depth.at(x, y) = fr.z;
          break;
        }
      }
    }
  }
  return out;
}

NocsMap render_nocs_view(const TriangleMesh& mesh, const PoseSE3& pose,
                         const CameraIntrinsics& k) {
  if (mesh.empty()) throw EmptyMesh("render_nocs_view: mesh has no vertices");
  if (!mesh.has_nocs()) {
    throw EmptyMesh("render_nocs_view: mesh has no NOCS coordinates");
  }
  // One sample at each pixel center so every valid pixel carries an exact
  // surface coordinate rather than a blend across the footprint.
  const RenderBuffers rb = rasterize(mesh, pose, k, 1);
  NocsMap map(k.width, k.height);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (rb.mask.at(x, y) > 0.5f) {
        map.set(x, y,
                {rb.nocs.at(x, y, 0), rb.nocs.at(x, y, 1), rb.nocs.at(x, y, 2)},
                true);
      }
    }
  }
  return map;
}

}  // namespace nocspose

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/posesolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "nocspose/errors.hpp"
#include "nocspose/random.hpp"

namespace nocspose {

namespace {

// Squared reprojection error of one correspondence; infinite when the point
// lands behind the camera.
double sq_error(const Correspondence& c, const CameraIntrinsics& k,
                const PoseSE3& pose) {
  const Eigen::Vector3d p = pose.apply(c.nocs_point);
  if (p.z() <= 0.0) return std::numeric_limits<double>::infinity();
  const Eigen::Vector2d proj(k.fx * p.x() / p.z() + k.cx,
                             k.fy * p.y() / p.z() + k.cy);
  return (proj - c.pixel).squaredNorm();
}

double total_cost(const std::vector<Correspondence>& corrs,
                  const CameraIntrinsics& k, const PoseSE3& pose) {
  double cost = 0.0;
  for (const auto& c : corrs) cost += sq_error(c, k, pose);
  return cost;
}

// DLT on the normalized projection matrix: intrinsics divided out, smallest
// eigenvector of A^T A, rotation block projected onto SO(3).
PoseSE3 dlt_init(const std::vector<Correspondence>& corrs,
                 const CameraIntrinsics& k) {
  const size_t n = corrs.size();
  Eigen::Matrix<double, 12, 12> ata = Eigen::Matrix<double, 12, 12>::Zero();
  for (const auto& c : corrs) {
    const double xh = (c.pixel.x() - k.cx) / k.fx;
    const double yh = (c.pixel.y() - k.cy) / k.fy;
    Eigen::Matrix<double, 4, 1> X;
    X << c.nocs_point, 1.0;
    Eigen::Matrix<double, 12, 1> r1 = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 12, 1> r2 = Eigen::Matrix<double, 12, 1>::Zero();
    r1.segment<4>(0) = X;
    r1.segment<4>(8) = -xh * X;
    r2.segment<4>(4) = X;
    r2.segment<4>(8) = -yh * X;
    ata += r1 * r1.transpose() + r2 * r2.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(ata);
  const auto& evals = eig.eigenvalues();
  // A second near-zero eigenvalue means the null space is not unique
  // (coplanar or otherwise degenerate input).
  const double scale_ref = std::max(evals(11), 1e-300);
  if (evals(1) < 1e-10 * scale_ref) {
    throw DegenerateConfiguration(
        "solve_pnp: rank-deficient linear system (degenerate or coplanar "
        "points) and no initial pose");
  }
  Eigen::Matrix<double, 12, 1> p = eig.eigenvectors().col(0);

  Eigen::Matrix<double, 3, 4> P;
  P.row(0) = p.segment<4>(0).transpose();
  P.row(1) = p.segment<4>(4).transpose();
  P.row(2) = p.segment<4>(8).transpose();

  // fix the overall sign so points end up in front of the camera
  size_t positive = 0;
  for (const auto& c : corrs) {
    Eigen::Matrix<double, 4, 1> X;
    X << c.nocs_point, 1.0;
    if (P.row(2) * X > 0.0) ++positive;
  }
  if (positive * 2 < n) P = -P;

  const Eigen::Matrix3d m = P.leftCols<3>();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  const double s = svd.singularValues().mean();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DegenerateConfiguration("solve_pnp: linear stage collapsed");
  }

  PoseSE3 pose;
  pose.rotation = r;
  pose.translation = P.col(3) / s;
  return pose;
}

// Pose from a (near-)planar point set via plane-to-image homography:
// PCA plane fit, homography DLT on normalized pixels, decomposition with
// orthogonalization. Resolves the sign by in-front count, then reprojection.
PoseSE3 planar_init(const std::vector<Correspondence>& corrs,
                    const CameraIntrinsics& k) {
  const size_t n = corrs.size();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& c : corrs) centroid += c.nocs_point;
  centroid /= static_cast<double>(n);

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& c : corrs) {
    const Eigen::Vector3d d = c.nocs_point - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> pca(scatter);
  const Eigen::Vector3d e1 = pca.eigenvectors().col(2);
  const Eigen::Vector3d e2 = pca.eigenvectors().col(1);

  Eigen::Matrix<double, 9, 9> ata = Eigen::Matrix<double, 9, 9>::Zero();
  for (const auto& c : corrs) {
    const Eigen::Vector3d d = c.nocs_point - centroid;
    const double u = d.dot(e1);
    const double v = d.dot(e2);
    const double xh = (c.pixel.x() - k.cx) / k.fx;
    const double yh = (c.pixel.y() - k.cy) / k.fy;
    Eigen::Matrix<double, 9, 1> r1, r2;
    r1 << u, v, 1.0, 0.0, 0.0, 0.0, -xh * u, -xh * v, -xh;
    r2 << 0.0, 0.0, 0.0, u, v, 1.0, -yh * u, -yh * v, -yh;
    ata += r1 * r1.transpose() + r2 * r2.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(ata);
  if (eig.eigenvalues()(1) < 1e-10 * std::max(eig.eigenvalues()(8), 1e-300)) {
    throw DegenerateConfiguration("planar_init: collinear points");
  }
  Eigen::Matrix3d h;
  h.row(0) = eig.eigenvectors().col(0).segment<3>(0).transpose();
  h.row(1) = eig.eigenvectors().col(0).segment<3>(3).transpose();
  h.row(2) = eig.eigenvectors().col(0).segment<3>(6).transpose();

  PoseSE3 best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    const Eigen::Matrix3d hs = sign * h;
    const double lambda = 2.0 / (hs.col(0).norm() + hs.col(1).norm());
    Eigen::Matrix3d m;
    m.col(0) = lambda * hs.col(0);
    m.col(1) = lambda * hs.col(1);
    m.col(2) = m.col(0).cross(m.col(1));
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(
        m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r_plane = svd.matrixU() * svd.matrixV().transpose();
    if (r_plane.determinant() < 0.0) {
      Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
      flip(2, 2) = -1.0;
      r_plane = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    const Eigen::Vector3d t_plane = lambda * hs.col(2);

    // compose with the plane frame: x_cam = R_plane * B^T (q - centroid) + t
    Eigen::Matrix3d basis;
    basis.col(0) = e1;
    basis.col(1) = e2;
    basis.col(2) = e1.cross(e2);
    PoseSE3 pose;
    pose.rotation = r_plane * basis.transpose();
    pose.translation = t_plane - pose.rotation * centroid;

    size_t in_front = 0;
    double cost = 0.0;
    for (const auto& c : corrs) {
      if (pose.apply(c.nocs_point).z() > 0.0) ++in_front;
      cost += std::min(sq_error(c, k, pose), 1e12);
    }
    if (in_front * 2 > n && cost < best_cost) {
      best_cost = cost;
      best = pose;
    }
  }
  if (!std::isfinite(best_cost)) {
    throw DegenerateConfiguration("planar_init: no valid decomposition");
  }
  return best;
}

// One Levenberg-Marquardt run over the local parameterization.
// Returns the refined pose; reports convergence through *converged.
PoseSE3 lm_refine(const std::vector<Correspondence>& corrs,
                  const CameraIntrinsics& k, const PoseSE3& init,
                  const LmConfig& cfg, bool* converged) {
  PoseSE3 pose = init;
  double cost = total_cost(corrs, k, pose);
  double damping = cfg.initial_damping;
  *converged = false;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& c : corrs) {
      const Eigen::Vector3d p = pose.apply(c.nocs_point);
      if (p.z() <= 0.0) continue;
      const double iz = 1.0 / p.z();
      const Eigen::Vector2d proj(k.fx * p.x() * iz + k.cx,
                                 k.fy * p.y() * iz + k.cy);
      const Eigen::Vector2d r = proj - c.pixel;

      Eigen::Matrix<double, 2, 3> dproj;
      dproj << k.fx * iz, 0.0, -k.fx * p.x() * iz * iz,
               0.0, k.fy * iz, -k.fy * p.y() * iz * iz;
      // local step: p' = exp([w]x)(R q) + t + v, so dp/dw = -[p - t]x, dp/dv = I
      const Eigen::Vector3d rq = p - pose.translation;
      Eigen::Matrix3d neg_skew;
      neg_skew << 0.0, rq.z(), -rq.y(),
                  -rq.z(), 0.0, rq.x(),
                  rq.y(), -rq.x(), 0.0;
      Eigen::Matrix<double, 2, 6> jac;
      jac.leftCols<3>() = dproj * neg_skew;
      jac.rightCols<3>() = dproj;

      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * r;
    }

    // gradient of sum ||r||^2 is 2 J^T r
    if ((2.0 * jtr).norm() < cfg.gradient_tolerance) {
      *converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Eigen::Matrix<double, 6, 6> h = jtj;
      for (int d = 0; d < 6; ++d) {
        h(d, d) += damping * std::max(jtj(d, d), 1e-12);
      }
      const Eigen::Matrix<double, 6, 1> delta = h.ldlt().solve(-jtr);
      const PoseSE3 trial = se3_local_step(pose, delta);
      const double trial_cost = total_cost(corrs, k, trial);
      if (trial_cost < cost) {
        pose = trial;
        cost = trial_cost;
        damping = std::max(damping * cfg.damping_down, 1e-12);
        stepped = true;
        break;
      }
      damping = std::min(damping * cfg.damping_up, 1e12);
    }
    if (!stepped) {
      // damping saturated without progress; gradient check next pass decides
      Eigen::Matrix<double, 6, 1> g = 2.0 * jtr;
      *converged = g.norm() < cfg.gradient_tolerance;
      break;
    }
  }
  return pose;
}

std::vector<bool> classify_inliers(const std::vector<Correspondence>& corrs,
                                   const CameraIntrinsics& k,
                                   const PoseSE3& pose, double threshold_px) {
  std::vector<bool> inl(corrs.size(), false);
  const double t2 = threshold_px * threshold_px;
  for (size_t i = 0; i < corrs.size(); ++i) {
    inl[i] = sq_error(corrs[i], k, pose) < t2;
  }
  return inl;
}

}  // namespace

std::vector<Correspondence> extract_correspondences(const NocsMap& map,
                                                    int stride) {
  std::vector<Correspondence> corrs;
  if (stride < 1) stride = 1;
  for (int y = 0; y < map.height; y += stride) {
    for (int x = 0; x < map.width; x += stride) {
      if (!map.is_valid(x, y)) continue;
      corrs.push_back({{x + 0.5, y + 0.5}, map.coord(x, y)});
    }
  }
  return corrs;
}

double rms_reprojection_error(const std::vector<Correspondence>& corrs,
                              const CameraIntrinsics& k, const PoseSE3& pose,
                              const std::vector<bool>& subset) {
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < corrs.size(); ++i) {
    if (!subset.empty() && !subset[i]) continue;
    const double e = sq_error(corrs[i], k, pose);
    if (std::isfinite(e)) sum += e;
    ++n;
  }
  return n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

PnpResult solve_pnp(const std::vector<Correspondence>& corrs,
                    const CameraIntrinsics& k,
                    const std::optional<PoseSE3>& init, const LmConfig& lm) {
  if (corrs.size() < 6) {
    throw DegenerateConfiguration("solve_pnp: need at least 6 correspondences, got " +
                                  std::to_string(corrs.size()));
  }
  const PoseSE3 start = init ? *init : dlt_init(corrs, k);

  PnpResult result;
  result.pose = lm_refine(corrs, k, start, lm, &result.converged);
  result.inliers.assign(corrs.size(), true);
  result.rms_reprojection_error = rms_reprojection_error(corrs, k, result.pose);
  return result;
}

PnpResult ransac_pnp(const std::vector<Correspondence>& corrs,
                     const CameraIntrinsics& k, const RansacConfig& config,
                     const LmConfig& lm) {
  if (corrs.size() < 6) {
    throw DegenerateConfiguration("ransac_pnp: need at least 6 correspondences, got " +
                                  std::to_string(corrs.size()));
  }
  const double threshold =
      config.inlier_threshold_px * k.width / config.reference_width;
  const size_t n = corrs.size();
  Rng rng(config.seed);

  // Hypothesis evaluation uses a capped LM schedule; minimal problems
  // converge in a handful of iterations.
  LmConfig hyp_lm = lm;
  hyp_lm.max_iterations = std::min(lm.max_iterations, 30);

  size_t best_count = 0;
  double best_rms = std::numeric_limits<double>::infinity();
  PoseSE3 best_pose;
  bool found = false;

  std::vector<Correspondence> sample(6);
  for (int it = 0; it < config.iterations; ++it) {
    size_t idx[6];
    for (int j = 0; j < 6; ++j) {
      bool fresh;
      do {
        idx[j] = rng.uniform_index(n);
        fresh = true;
        for (int l = 0; l < j; ++l) fresh = fresh && idx[l] != idx[j];
      } while (!fresh);
      sample[static_cast<size_t>(j)] = corrs[idx[j]];
    }

    PoseSE3 hyp;
    try {
      PoseSE3 start;
      try {
        start = dlt_init(sample, k);
      } catch (const DegenerateConfiguration&) {
        // coplanar minimal sample (a single visible face); the homography
        // route still yields a usable hypothesis
        start = planar_init(sample, k);
      }
      bool conv = false;
      hyp = lm_refine(sample, k, start, hyp_lm, &conv);
    } catch (const DegenerateConfiguration&) {
      continue;
    }

    size_t count = 0;
    double sum = 0.0;
    const double t2 = threshold * threshold;
    for (const auto& c : corrs) {
      const double e = sq_error(c, k, hyp);
      if (e < t2) {
        ++count;
        sum += e;
      }
    }
    if (count < 6) continue;
    const double rms = std::sqrt(sum / static_cast<double>(count));
    if (count > best_count || (count == best_count && rms < best_rms)) {
      best_count = count;
      best_rms = rms;
      best_pose = hyp;
      found = true;
    }
  }

  const double ratio =
      static_cast<double>(best_count) / static_cast<double>(n);
  if (!found || ratio < config.min_inlier_ratio) {
    throw InsufficientInliers(
        "ransac_pnp: best hypothesis inlier ratio " + std::to_string(ratio) +
        " below minimum " + std::to_string(config.min_inlier_ratio));
  }

  // final solve on the consensus set, then re-classify under the final pose
  const std::vector<bool> consensus =
      classify_inliers(corrs, k, best_pose, threshold);
  std::vector<Correspondence> inlier_corrs;
  inlier_corrs.reserve(best_count);
  for (size_t i = 0; i < n; ++i) {
    if (consensus[i]) inlier_corrs.push_back(corrs[i]);
  }

  PnpResult result;
  bool conv = false;
  result.pose = lm_refine(inlier_corrs, k, best_pose, lm, &conv);
  result.converged = conv;
  result.inliers = classify_inliers(corrs, k, result.pose, threshold);
  result.rms_reprojection_error =
      rms_reprojection_error(corrs, k, result.pose, result.inliers);
  return result;
}

std::vector<PnpOutcome> poses_from_nocs(const std::vector<NocsMap>& maps,
                                        const std::vector<CameraIntrinsics>& k,
                                        const SolveConfig& config) {
  if (maps.size() != k.size()) {
    throw LengthMismatch("poses_from_nocs: " + std::to_string(maps.size()) +
                         " maps vs " + std::to_string(k.size()) +
                         " intrinsics");
  }
  if (maps.empty() || maps.size() > 6) {
    throw InvalidSpec("poses_from_nocs: expected 1 to 6 views, got " +
                      std::to_string(maps.size()));
  }

  std::vector<PnpOutcome> out(maps.size());
  for (size_t i = 0; i < maps.size(); ++i) {
    try {
      int stride = config.stride;
      if (stride <= 0) {
        stride = maps[i].valid_count() >
                         static_cast<size_t>(config.auto_stride_above)
                     ? 2
                     : 1;
      }
      const auto corrs = extract_correspondences(maps[i], stride);
      out[i].result = ransac_pnp(corrs, k[i], config.ransac, config.lm);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

}  // namespace nocspose

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// JSON and CSV serialization for poses, candidate pose sets, and metric
// reports. Pose objects carry a required "convention": "opencv" field and a
// row-major rotation. All output is byte-deterministic (sorted keys,
// shortest-round-trip numbers).

#ifndef NOCSPOSE_JSON_IO_HPP
#define NOCSPOSE_JSON_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include "nocspose/evalkit.hpp"
#include "nocspose/geometry.hpp"

namespace nocspose {

std::string pose_to_json_string(const PoseSE3& pose);
PoseSE3 pose_from_json_string(const std::string& text);

/// {"poses": [pose, ...]}
void write_pose_set(const std::string& path, const std::vector<PoseSE3>& poses);
std::vector<PoseSE3> read_pose_set(const std::string& path);

/// Candidate pose sets; a view slot is empty when that view failed to solve,
/// with the reason in `errors` at the same position.
struct CandidateSet {
  std::vector<std::optional<PoseSE3>> poses;
  std::vector<std::string> errors;  // empty string where solved
};

/// {"candidates": [[pose|null, ...], ...], "errors": [[""|reason, ...], ...]}
void write_candidates(const std::string& path,
                      const std::vector<CandidateSet>& candidates);
std::vector<CandidateSet> read_candidates(const std::string& path);

/// {"acc_at_15", "acc_at_30", "median_rot_err_deg", "median_trans_err",
///  "pair_count"}
void write_pose_metrics_json(const std::string& path,
                             const PoseMetricsReport& report);

/// CSV: view_i,view_j,rotation_error_deg,translation_error
void write_pose_pairs_csv(const std::string& path,
                          const PoseMetricsReport& report);

struct MeshMetrics {
  double fscore_pct = 0.0;
  double psnr_mean_db = 0.0;
  std::vector<double> per_view_psnr_db;
  SimilarityTransform alignment;
};

/// {"alignment": {...}, "fscore_pct", "psnr_mean_db", "psnr_per_view_db"}
void write_mesh_metrics_json(const std::string& path, const MeshMetrics& m);

}  // namespace nocspose

#endif  // NOCSPOSE_JSON_IO_HPP

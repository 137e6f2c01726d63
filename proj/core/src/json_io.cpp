// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/json_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "nocspose/errors.hpp"

namespace nocspose {

using nlohmann::json;

namespace {

json pose_to_json(const PoseSE3& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2)});
  }
  return json{{"rotation", rot},
              {"translation",
               {pose.translation.x(), pose.translation.y(), pose.translation.z()}},
              {"convention", "opencv"}};
}

PoseSE3 pose_from_json(const json& j) {
  if (!j.contains("convention") || j.at("convention") != "opencv") {
    throw IoError("pose JSON must declare \"convention\": \"opencv\"");
  }
  PoseSE3 pose;
  const auto& rot = j.at("rotation");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pose.rotation(r, c) = rot.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
    }
  }
  const auto& t = j.at("translation");
  for (int c = 0; c < 3; ++c) {
    pose.translation(c) = t.at(static_cast<size_t>(c)).get<double>();
  }
  return pose;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidSpec("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path);
  out << j.dump(2) << "\n";
}

}  // namespace

std::string pose_to_json_string(const PoseSE3& pose) {
  return pose_to_json(pose).dump(2);
}

PoseSE3 pose_from_json_string(const std::string& text) {
  try {
    return pose_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed pose JSON: ") + e.what());
  }
}

void write_pose_set(const std::string& path,
                    const std::vector<PoseSE3>& poses) {
  json arr = json::array();
  for (const auto& p : poses) arr.push_back(pose_to_json(p));
  dump_json(path, json{{"poses", arr}});
}

std::vector<PoseSE3> read_pose_set(const std::string& path) {
  const json j = load_json(path);
  std::vector<PoseSE3> poses;
  try {
    for (const auto& p : j.at("poses")) poses.push_back(pose_from_json(p));
  } catch (const json::exception& e) {
    throw InvalidSpec("pose set schema mismatch in " + path + ": " + e.what());
  }
  return poses;
}

void write_candidates(const std::string& path,
                      const std::vector<CandidateSet>& candidates) {
  json cands = json::array();
  json errors = json::array();
  for (const auto& c : candidates) {
    json poses = json::array();
    json errs = json::array();
    for (size_t v = 0; v < c.poses.size(); ++v) {
      poses.push_back(c.poses[v] ? pose_to_json(*c.poses[v]) : json());
      errs.push_back(v < c.errors.size() ? c.errors[v] : "");
    }
    cands.push_back(poses);
    errors.push_back(errs);
  }
  dump_json(path, json{{"candidates", cands}, {"errors", errors}});
}

std::vector<CandidateSet> read_candidates(const std::string& path) {
  const json j = load_json(path);
  std::vector<CandidateSet> out;
  if (!j.contains("candidates") || !j.at("candidates").is_array()) {
    throw InvalidSpec("candidates schema mismatch in " + path);
  }
  const json errors = j.value("errors", json::array());
  size_t ci = 0;
  for (const auto& cand : j.at("candidates")) {
    CandidateSet set;
    size_t vi = 0;
    for (const auto& p : cand) {
      if (p.is_null()) {
        set.poses.emplace_back(std::nullopt);
      } else {
        set.poses.emplace_back(pose_from_json(p));
      }
      std::string err;
      if (ci < errors.size() && vi < errors.at(ci).size()) {
        err = errors.at(ci).at(vi).get<std::string>();
      }
      set.errors.push_back(err);
      ++vi;
    }
    out.push_back(std::move(set));
    ++ci;
  }
  return out;
}

void write_pose_metrics_json(const std::string& path,
                             const PoseMetricsReport& report) {
  dump_json(path, json{{"median_rot_err_deg", report.median_rotation_error_deg},
                       {"acc_at_15", report.acc_at_15},
                       {"acc_at_30", report.acc_at_30},
                       {"median_trans_err", report.median_translation_error},
                       {"pair_count", report.pair_count}});
}

void write_pose_pairs_csv(const std::string& path,
                          const PoseMetricsReport& report) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open " + path);
  std::fprintf(f, "view_i,view_j,rotation_error_deg,translation_error\n");
  for (const auto& p : report.pairs) {
    std::fprintf(f, "%d,%d,%.9g,%.9g\n", p.view_i, p.view_j,
                 p.rotation_error_deg, p.translation_error);
  }
  std::fclose(f);
}

void write_mesh_metrics_json(const std::string& path, const MeshMetrics& m) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({m.alignment.rotation(r, 0), m.alignment.rotation(r, 1),
                   m.alignment.rotation(r, 2)});
  }
  dump_json(path,
            json{{"fscore_pct", m.fscore_pct},
                 {"psnr_mean_db", m.psnr_mean_db},
                 {"psnr_per_view_db", m.per_view_psnr_db},
                 {"alignment",
                  {{"scale", m.alignment.scale},
                   {"rotation", rot},
                   {"translation",
                    {m.alignment.translation.x(), m.alignment.translation.y(),
                     m.alignment.translation.z()}}}}});
}

}  // namespace nocspose

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "nocspose/episode_io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nocspose/errors.hpp"
#include "nocspose/image_io.hpp"
#include "nocspose/mesh_io.hpp"

namespace nocspose {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json pose_json(const PoseSE3& p) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({p.rotation(r, 0), p.rotation(r, 1), p.rotation(r, 2)});
  }
  return json{{"rotation", rot},
              {"translation",
               {p.translation.x(), p.translation.y(), p.translation.z()}},
              {"convention", "opencv"}};
}

PoseSE3 pose_from(const json& j) {
  PoseSE3 p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      p.rotation(r, c) =
          j.at("rotation").at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
    }
  }
  for (int c = 0; c < 3; ++c) {
    p.translation(c) = j.at("translation").at(static_cast<size_t>(c)).get<double>();
  }
  return p;
}

std::string view_file(int i, const char* kind) {
  return "view_" + std::to_string(i) + "_" + kind + ".png";
}

}  // namespace

void write_episode_dir(const std::string& dir, const Episode& episode) {
  fs::create_directories(dir);
  const fs::path base(dir);

  json views = json::array();
  for (size_t i = 0; i < episode.views.size(); ++i) {
    const EpisodeView& v = episode.views[i];
    const int idx = static_cast<int>(i);
    write_png8((base / view_file(idx, "rgb")).string(), v.rgb);
    write_png8((base / view_file(idx, "mask")).string(), v.mask);
    write_nocs_png((base / view_file(idx, "nocs")).string(), v.nocs);

    views.push_back(
        {{"index", idx},
         {"intrinsics",
          {{"fx", v.intrinsics.fx},
           {"fy", v.intrinsics.fy},
           {"cx", v.intrinsics.cx},
           {"cy", v.intrinsics.cy},
           {"width", v.intrinsics.width},
           {"height", v.intrinsics.height}}},
         {"pose", pose_json(v.gt_pose)},
         {"fov_deg", v.fov_deg},
         {"elevation_deg", v.spherical.elevation_deg},
         {"azimuth_deg", v.spherical.azimuth_deg},
         {"radius", v.spherical.radius},
         {"rgb", view_file(idx, "rgb")},
         {"mask", view_file(idx, "mask")},
         {"nocs", view_file(idx, "nocs")}});
  }

  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({episode.nocs_frame.rotation(r, 0),
                   episode.nocs_frame.rotation(r, 1),
                   episode.nocs_frame.rotation(r, 2)});
  }
  const json doc{{"episode_format", 1},
                 {"seed", episode.seed},
                 {"phi0_deg", episode.phi0_deg},
                 {"n_views", episode.views.size()},
                 {"nocs_frame",
                  {{"scale", episode.nocs_frame.scale},
                   {"rotation", rot},
                   {"offset",
                    {episode.nocs_frame.offset.x(), episode.nocs_frame.offset.y(),
                     episode.nocs_frame.offset.z()}}}},
                 {"mesh", "mesh.obj"},
                 {"views", views}};

  if (!episode.nocs_mesh.empty()) {
    write_obj((base / "mesh.obj").string(), episode.nocs_mesh);
  }
  std::ofstream out(base / "episode.json", std::ios::binary);
  if (!out) throw IoError("cannot write episode.json in " + dir);
  out << doc.dump(2) << "\n";
}

Episode read_episode_dir(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream in(base / "episode.json");
  if (!in) throw IoError("missing episode.json in " + dir);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidSpec("malformed episode.json in " + dir + ": " + e.what());
  }

  Episode ep;
  try {
  ep.seed = doc.value("seed", 0ull);
  ep.phi0_deg = doc.value("phi0_deg", 0.0);
  const json& nf = doc.at("nocs_frame");
  ep.nocs_frame.scale = nf.at("scale").get<double>();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      ep.nocs_frame.rotation(r, c) =
          nf.at("rotation").at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>();
    }
  }
  for (int c = 0; c < 3; ++c) {
    ep.nocs_frame.offset(c) = nf.at("offset").at(static_cast<size_t>(c)).get<double>();
  }

  for (const auto& v : doc.at("views")) {
    EpisodeView view;
    const json& k = v.at("intrinsics");
    view.intrinsics.fx = k.at("fx").get<double>();
    view.intrinsics.fy = k.at("fy").get<double>();
    view.intrinsics.cx = k.at("cx").get<double>();
    view.intrinsics.cy = k.at("cy").get<double>();
    view.intrinsics.width = k.at("width").get<int>();
    view.intrinsics.height = k.at("height").get<int>();
    view.gt_pose = pose_from(v.at("pose"));
    view.fov_deg = v.value("fov_deg", 0.0);
    view.spherical.elevation_deg = v.value("elevation_deg", 0.0);
    view.spherical.azimuth_deg = v.value("azimuth_deg", 0.0);
    view.spherical.radius = v.value("radius", 0.0);
    view.spherical.target = nocs_cube_center();
    view.rgb = read_png8((base / v.at("rgb").get<std::string>()).string());
    view.mask = read_png8((base / v.at("mask").get<std::string>()).string());
    view.nocs =
        read_nocs_png((base / v.at("nocs").get<std::string>()).string());
    ep.views.push_back(std::move(view));
  }
  } catch (const json::exception& e) {
    throw InvalidSpec("episode.json schema mismatch in " + dir + ": " +
                      e.what());
  }

  const std::string mesh_name = doc.value("mesh", std::string("mesh.obj"));
  if (fs::exists(base / mesh_name)) {
    ep.nocs_mesh = read_obj((base / mesh_name).string());
    ep.nocs_mesh.vertex_nocs = ep.nocs_mesh.vertices;
  }
  return ep;
}

void write_manifest(const std::string& dir,
                    const std::vector<std::string>& episode_names) {
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest.json in " + dir);
  out << json{{"episodes", episode_names}}.dump(2) << "\n";
}

std::vector<std::string> read_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw IoError("missing manifest.json in " + dir);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidSpec("malformed manifest.json in " + dir + ": " + e.what());
  }
  return doc.at("episodes").get<std::vector<std::string>>();
}

}  // namespace nocspose

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "nocspose/episode_io.hpp"
#include "nocspose/errors.hpp"
#include "nocspose/evalkit.hpp"
#include "nocspose/image.hpp"
#include "nocspose/json_io.hpp"
#include "nocspose/mesh_io.hpp"
#include "nocspose/posesolve.hpp"
#include "nocspose/random.hpp"
#include "nocspose/refine.hpp"
#include "nocspose/synth.hpp"

namespace nocspose::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

CameraSamplerConfig sampler_from(const RunConfig& cfg) {
  CameraSamplerConfig s;
  s.fov_mean_deg = cfg.fov_mean_deg;
  s.fov_std_deg = cfg.fov_std_deg;
  s.elevation_min_deg = cfg.elevation_min_deg;
  s.elevation_max_deg = cfg.elevation_max_deg;
  s.radius_min = cfg.radius_min;
  s.radius_max = cfg.radius_max;
  s.principal_point_jitter_std_px = cfg.pp_jitter_std_px;
  s.image_width = cfg.image_size;
  s.image_height = cfg.image_size;
  return s;
}

SolveConfig solve_config_from(const RunConfig& cfg) {
  SolveConfig s;
  s.ransac.iterations = cfg.ransac_iterations;
  s.ransac.inlier_threshold_px = cfg.ransac_inlier_threshold_px;
  s.ransac.min_inlier_ratio = cfg.ransac_min_inlier_ratio;
  s.lm.max_iterations = cfg.lm_max_iters;
  s.stride = cfg.pnp_stride;
  return s;
}

RefineConfig refine_config_from(const RunConfig& cfg) {
  RefineConfig r;
  r.max_iters = cfg.refine_max_iters;
  r.step_tolerance = cfg.refine_step_tolerance;
  r.fd_epsilon = cfg.fd_epsilon;
  r.supersample = cfg.supersample;
  return r;
}

json load_json_file(const std::string& path) {
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

void dump_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::string parent_dir_of(const std::string& path) {
  const fs::path p = fs::path(path).parent_path();
  return p.empty() ? std::string(".") : p.string();
}

int report(const Error& e) {
  std::fprintf(stderr, "error: %s\n", e.what());
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  return kExitValidation;
}

struct SceneEntry {
  std::string name;
  SceneSpec spec;
  int n_views = 4;
  std::uint64_t seed = 0;
};

std::vector<SceneEntry> parse_scene_specs(const json& doc,
                                          const RunConfig& cfg) {
  if (!doc.contains("scenes") || !doc.at("scenes").is_array() ||
      doc.at("scenes").empty()) {
    throw InvalidSpec("scene spec needs a non-empty \"scenes\" array");
  }
  const int default_views = doc.value("n_views", 4);
  std::vector<SceneEntry> scenes;
  size_t index = 0;
  for (const auto& s : doc.at("scenes")) {
    SceneEntry entry;
    char fallback[32];
    std::snprintf(fallback, sizeof fallback, "episode_%03zu", index);
    entry.name = s.value("name", std::string(fallback));
    entry.spec.kind = primitive_kind_from_string(s.value("kind", std::string("box")));
    entry.spec.pattern =
        color_pattern_from_string(s.value("pattern", std::string("gradient")));
    if (s.contains("dimensions")) {
      entry.spec.dimensions = s.at("dimensions").get<std::vector<double>>();
    }
    entry.n_views = s.value("n_views", default_views);
    if (entry.n_views < 1 || entry.n_views > 6) {
      throw InvalidSpec("scene '" + entry.name + "': n_views " +
                        std::to_string(entry.n_views) +
                        " outside the supported range [1, 6]");
    }
    entry.seed = s.contains("seed") ? s.at("seed").get<std::uint64_t>()
                                    : mix_seed(cfg.seed, index + 1);
    scenes.push_back(std::move(entry));
    ++index;
  }
  return scenes;
}

// Episode views resampled to the refinement resolution.
std::vector<RefineView> refine_views_from(const Episode& ep,
                                          const RunConfig& cfg) {
  std::vector<RefineView> views;
  for (const auto& v : ep.views) {
    RefineView rv;
    if (cfg.refine_resolution > 0 &&
        cfg.refine_resolution != v.intrinsics.width) {
      const double s =
          static_cast<double>(cfg.refine_resolution) / v.intrinsics.width;
      const int h = static_cast<int>(std::lround(v.intrinsics.height * s));
      rv.rgb = resize_area(v.rgb, cfg.refine_resolution, h);
      rv.mask = resize_area(v.mask, cfg.refine_resolution, h);
      rv.intrinsics = v.intrinsics.scaled_to_width(cfg.refine_resolution);
    } else {
      rv.rgb = v.rgb;
      rv.mask = v.mask;
      rv.intrinsics = v.intrinsics;
    }
    views.push_back(std::move(rv));
  }
  return views;
}

int solve_into(const RunConfig& cfg, const Episode& ep,
               const std::string& out_path) {
  const SolveConfig solve_cfg = solve_config_from(cfg);
  std::vector<CandidateSet> candidates;
  size_t solved_views = 0;

  for (int c = 0; c < std::max(1, cfg.n_init); ++c) {
    const std::uint64_t cand_seed =
        mix_seed(cfg.seed, 0x5eedull + static_cast<std::uint64_t>(c));
    std::vector<NocsMap> maps;
    std::vector<CameraIntrinsics> intr;
    for (size_t v = 0; v < ep.views.size(); ++v) {
      NoiseSpec noise;
      noise.gaussian_sigma = cfg.corrupt_sigma;
      noise.outlier_fraction = cfg.corrupt_outlier_fraction;
      noise.boundary_erosion_px = cfg.corrupt_erosion_px;
      noise.seed = mix_seed(cand_seed, v);
      maps.push_back(corrupt_nocs(ep.views[v].nocs, noise));
      intr.push_back(ep.views[v].intrinsics);
    }

    const auto outcomes = poses_from_nocs(maps, intr, solve_cfg);
    CandidateSet set;
    for (const auto& o : outcomes) {
      if (o.ok()) {
        set.poses.emplace_back(o.result->pose);
        set.errors.emplace_back();
        ++solved_views;
      } else {
        set.poses.emplace_back(std::nullopt);
        set.errors.push_back(o.error);
      }
    }
    candidates.push_back(std::move(set));
  }

  write_candidates(out_path, candidates);
  write_effective_config(cfg, parent_dir_of(out_path));
  if (solved_views == 0) {
    std::fprintf(stderr, "error: every view of every candidate failed\n");
    return kExitPipelineFailure;
  }
  return kExitOk;
}

struct RefineOutput {
  json doc;
  std::vector<PoseSE3> poses;
  bool ok = false;
};

RefineOutput refine_into(const RunConfig& cfg, const Episode& ep,
                         const std::vector<CandidateSet>& candidates,
                         const TriangleMesh& mesh) {
  if (candidates.empty()) {
    throw InvalidSpec("candidates file contains no candidates");
  }
  const std::vector<RefineView> views = refine_views_from(ep, cfg);

  std::vector<PoseSet> usable;
  std::vector<size_t> usable_index;
  for (size_t c = 0; c < candidates.size(); ++c) {
    if (candidates[c].poses.size() != views.size()) continue;
    PoseSet set;
    bool complete = true;
    for (const auto& p : candidates[c].poses) {
      if (!p) {
        complete = false;
        break;
      }
      set.push_back(*p);
    }
    if (complete) {
      usable.push_back(std::move(set));
      usable_index.push_back(c);
    }
  }

  RefineOutput out;
  if (usable.empty()) {
    out.doc = json{{"chosen_index", nullptr},
                   {"error", "no candidate provides a pose for every view"}};
    return out;
  }

  RenderLossWeights weights{cfg.lambda_mask, cfg.mu_rgb};
  ExpertSelection sel;
  try {
    sel = select_expert(usable, mesh, views, weights, refine_config_from(cfg));
  } catch (const MeshNotVisible& e) {
    out.doc = json{{"chosen_index", nullptr}, {"error", e.what()}};
    return out;
  }

  json per_candidate = json::array();
  for (size_t u = 0; u < usable.size(); ++u) {
    json initial = json::array();
    json final_ = json::array();
    json iters = json::array();
    for (const auto& r : sel.per_view[u]) {
      initial.push_back(std::isfinite(r.initial_loss) ? json(r.initial_loss)
                                                      : json());
      final_.push_back(std::isfinite(r.final_loss) ? json(r.final_loss)
                                                   : json());
      iters.push_back(r.iterations);
    }
    per_candidate.push_back(
        {{"candidate", usable_index[u]},
         {"total_loss", std::isfinite(sel.total_losses[u])
                            ? json(sel.total_losses[u])
                            : json()},
         {"initial_loss", initial},
         {"final_loss", final_},
         {"iterations", iters}});
  }

  json poses = json::array();
  for (const auto& p : sel.refined) {
    poses.push_back(json::parse(pose_to_json_string(p)));
  }
  out.doc = json{{"chosen_index", usable_index[sel.index]},
                 {"poses", poses},
                 {"candidates", per_candidate}};
  out.poses = sel.refined;
  out.ok = true;
  return out;
}

std::string csv_sibling(const std::string& json_path) {
  fs::path p(json_path);
  p.replace_extension(".csv");
  return p.string();
}

}  // namespace

int run_generate(const RunConfig& cfg, const std::string& spec_path,
                 const std::string& out_dir) {
  try {
    const json doc = load_json_file(spec_path);
    const auto scenes = parse_scene_specs(doc, cfg);

    fs::create_directories(out_dir);
    std::vector<std::string> names;
    for (const auto& scene : scenes) {
      const TriangleMesh mesh = make_primitive_scene(scene.spec, scene.seed);
      CameraSamplerConfig sampler = sampler_from(cfg);
      const Episode ep = make_episode(mesh, scene.n_views, sampler, scene.seed);
      write_episode_dir((fs::path(out_dir) / scene.name).string(), ep);
      names.push_back(scene.name);
    }
    write_manifest(out_dir, names);
    write_effective_config(cfg, out_dir);
    std::printf("generated %zu episode(s) in %s\n", names.size(),
                out_dir.c_str());
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  }
}

int run_solve(const RunConfig& cfg, const std::string& episode_dir,
              const std::string& out_path) {
  try {
    const Episode ep = read_episode_dir(episode_dir);
    return solve_into(cfg, ep, out_path);
  } catch (const Error& e) {
    return report(e);
  }
}

int run_refine(const RunConfig& cfg, const std::string& episode_dir,
               const std::string& candidates_path, const std::string& mesh_path,
               const std::string& out_path) {
  try {
    const Episode ep = read_episode_dir(episode_dir);
    const auto candidates = read_candidates(candidates_path);
    TriangleMesh mesh = read_obj(mesh_path);
    mesh.vertex_nocs = mesh.vertices;

    RefineOutput out = refine_into(cfg, ep, candidates, mesh);
    dump_json_file(out_path, out.doc);
    write_effective_config(cfg, parent_dir_of(out_path));
    if (!out.ok) {
      std::fprintf(stderr, "error: %s\n",
                   out.doc.value("error", std::string("refinement failed")).c_str());
      return kExitPipelineFailure;
    }
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  }
}

int run_eval_poses(const RunConfig& cfg, const std::string& pred_poses_path,
                   const std::string& gt_episode_dir,
                   const std::string& out_path) {
  try {
    const std::vector<PoseSE3> pred = read_pose_set(pred_poses_path);
    const Episode ep = read_episode_dir(gt_episode_dir);
    std::vector<PoseSE3> gt;
    for (const auto& v : ep.views) gt.push_back(v.gt_pose);

    const PoseMetricsReport report_data = pose_metrics(pred, gt);
    write_pose_metrics_json(out_path, report_data);
    write_pose_pairs_csv(csv_sibling(out_path), report_data);
    write_effective_config(cfg, parent_dir_of(out_path));
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  }
}

int run_eval_meshes(const RunConfig& cfg, const std::string& pred_mesh_path,
                    const std::string& gt_mesh_path,
                    const std::string& out_path) {
  try {
    TriangleMesh pred = read_obj(pred_mesh_path);
    TriangleMesh gt = read_obj(gt_mesh_path);

    AlignConfig align_cfg;
    align_cfg.sample_points = cfg.eval_samples;
    align_cfg.icp.inlier_distance = cfg.fscore_threshold;
    const AlignResult alignment = align_meshes(pred, gt, cfg.seed, align_cfg);

    // move pred into the gt frame, then put both into the unit cube using
    // the gt normalization so the F-score threshold is in unit-box units
    for (auto& v : pred.vertices) v = alignment.transform.apply(v);
    TriangleMesh gt_cube = gt;
    const NocsFrame frame = normalize_to_nocs(gt_cube);
    gt_cube = bake_nocs_frame(gt_cube);
    TriangleMesh pred_cube = pred;
    for (auto& v : pred_cube.vertices) v = frame.apply(v);

    MeshMetrics metrics;
    metrics.alignment = alignment.transform;
    metrics.fscore_pct = fscore(pred_cube, gt_cube, cfg.fscore_threshold,
                                cfg.eval_samples, cfg.seed);
    ViewProtocolConfig vp;
    vp.elevation_deg = cfg.eval_elevation_deg;
    vp.radius = cfg.eval_radius;
    vp.supersample = cfg.supersample;
    const ViewProtocolResult views = eval_views_protocol(pred_cube, gt_cube, vp);
    metrics.psnr_mean_db = views.mean_psnr_db;
    metrics.per_view_psnr_db = views.per_view_psnr_db;

    write_mesh_metrics_json(out_path, metrics);
    write_effective_config(cfg, parent_dir_of(out_path));
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  }
}

int run_bench(const RunConfig& cfg, const std::string& spec_path,
              const std::string& work_dir) {
  try {
    const fs::path base(work_dir);
    const std::string episodes_dir = (base / "episodes").string();
    const int gen_rc = run_generate(cfg, spec_path, episodes_dir);
    if (gen_rc != kExitOk) return gen_rc;

    fs::create_directories(base / "solve");
    fs::create_directories(base / "refine");
    fs::create_directories(base / "eval");

    struct Row {
      std::string name;
      size_t n_views = 0;
      json chosen;
      PoseMetricsReport metrics;
      bool ok = false;
    };
    std::vector<Row> rows;

    for (const auto& name : read_manifest(episodes_dir)) {
      Row row;
      row.name = name;
      const std::string ep_dir = (fs::path(episodes_dir) / name).string();
      const Episode ep = read_episode_dir(ep_dir);
      row.n_views = ep.views.size();

      const std::string cand_path = (base / "solve" / (name + ".json")).string();
      const int solve_rc = solve_into(cfg, ep, cand_path);
      if (solve_rc != kExitOk) {
        rows.push_back(std::move(row));
        continue;
      }

      const auto candidates = read_candidates(cand_path);
      RefineOutput refined = refine_into(cfg, ep, candidates, ep.nocs_mesh);
      const std::string refine_path =
          (base / "refine" / (name + ".json")).string();
      dump_json_file(refine_path, refined.doc);
      if (!refined.ok) {
        rows.push_back(std::move(row));
        continue;
      }
      row.chosen = refined.doc.at("chosen_index");

      if (ep.views.size() >= 2) {
        std::vector<PoseSE3> gt;
        for (const auto& v : ep.views) gt.push_back(v.gt_pose);
        row.metrics = pose_metrics(refined.poses, gt);
        const std::string eval_path =
            (base / "eval" / (name + ".json")).string();
        write_pose_metrics_json(eval_path, row.metrics);
        write_pose_pairs_csv(csv_sibling(eval_path), row.metrics);
        row.ok = true;
      }
      rows.push_back(std::move(row));
    }

    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.name < b.name; });
    const std::string summary = (base / "summary.csv").string();
    std::FILE* f = std::fopen(summary.c_str(), "wb");
    if (!f) throw IoError("cannot write " + summary);
    std::fprintf(f,
                 "episode,n_views,chosen_candidate,median_rot_err_deg,"
                 "acc_at_15,acc_at_30,median_trans_err,pair_count\n");
    for (const auto& row : rows) {
      if (row.ok) {
        std::fprintf(f, "%s,%zu,%s,%.9g,%.9g,%.9g,%.9g,%d\n", row.name.c_str(),
                     row.n_views, row.chosen.dump().c_str(),
                     row.metrics.median_rotation_error_deg, row.metrics.acc_at_15,
                     row.metrics.acc_at_30, row.metrics.median_translation_error,
                     row.metrics.pair_count);
      } else {
        std::fprintf(f, "%s,%zu,,,,,,\n", row.name.c_str(), row.n_views);
      }
    }
    std::fclose(f);
    write_effective_config(cfg, work_dir);

    const bool any_ok =
        std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.ok; });
    if (!any_ok) {
      std::fprintf(stderr, "error: no episode completed the pipeline\n");
      return kExitPipelineFailure;
    }
    std::printf("bench summary written to %s\n", summary.c_str());
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  }
}

}  // namespace nocspose::cli

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <map>
#include <optional>
#include <string>

#include "commands.hpp"
#include "nocspose/config.hpp"
#include "nocspose/errors.hpp"

namespace {

using nocspose::RunConfig;

struct ConfigCli {
  std::string config_file;
  std::map<std::string, std::string> overrides;

  // Defaults, then config file, then NOCSPOSE_* environment, then flags.
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) {
      nocspose::apply_config_file(cfg, config_file);
    }
    nocspose::apply_config_env(cfg);
    for (const auto& [key, value] : overrides) {
      nocspose::config_set(cfg, key, value);
    }
    return cfg;
  }
};

void add_config_flags(CLI::App* cmd, ConfigCli& state) {
  cmd->add_option("--config", state.config_file,
                  "key = value configuration file");
  for (const auto& key : nocspose::config_keys()) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&state, key](const std::string& value) { state.overrides[key] = value; },
        "config key " + key);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nocspose: camera pose estimation from normalized-object-coordinate "
      "maps, with rendering-loss refinement and an evaluation toolkit"};
  app.require_subcommand(1);

  ConfigCli state;

  std::string spec_path, out_dir, episode_dir, out_path;
  std::string candidates_path, mesh_path;
  std::string pred_poses, gt_episode, pred_mesh, gt_mesh;

  CLI::App* generate =
      app.add_subcommand("generate", "render synthetic episodes from a scene spec");
  generate->add_option("--spec", spec_path, "scene spec JSON")->required();
  generate->add_option("--out", out_dir, "output directory")->required();
  add_config_flags(generate, state);

  CLI::App* solve =
      app.add_subcommand("solve", "solve candidate pose sets from NOCS maps");
  solve->add_option("--episode", episode_dir, "episode directory")->required();
  solve->add_option("--out", out_path, "candidates JSON path")->required();
  add_config_flags(solve, state);

  CLI::App* refine = app.add_subcommand(
      "refine", "refine candidates against a mesh and select the best");
  refine->add_option("--episode", episode_dir, "episode directory")->required();
  refine->add_option("--candidates", candidates_path, "candidates JSON")
      ->required();
  refine->add_option("--mesh", mesh_path, "OBJ mesh in the NOCS frame")
      ->required();
  refine->add_option("--out", out_path, "refined pose set JSON")->required();
  add_config_flags(refine, state);

  CLI::App* eval =
      app.add_subcommand("eval", "pose metrics or mesh metrics reports");
  eval->add_option("--pred-poses", pred_poses, "predicted pose set JSON");
  eval->add_option("--gt-episode", gt_episode, "episode with ground truth");
  eval->add_option("--pred-mesh", pred_mesh, "predicted OBJ mesh");
  eval->add_option("--gt-mesh", gt_mesh, "ground truth OBJ mesh");
  eval->add_option("--out", out_path, "metrics JSON path")->required();
  add_config_flags(eval, state);

  CLI::App* bench = app.add_subcommand(
      "bench", "generate + solve + refine + eval over a scene suite");
  bench->add_option("--spec", spec_path, "scene spec JSON")->required();
  bench->add_option("--workdir", out_dir, "working directory")->required();
  add_config_flags(bench, state);

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    cfg = state.resolve();
  } catch (const nocspose::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return dynamic_cast<const nocspose::IoError*>(&e) != nullptr
               ? nocspose::cli::kExitIo
               : nocspose::cli::kExitValidation;
  }

  if (generate->parsed()) {
    return nocspose::cli::run_generate(cfg, spec_path, out_dir);
  }
  if (solve->parsed()) {
    return nocspose::cli::run_solve(cfg, episode_dir, out_path);
  }
  if (refine->parsed()) {
    return nocspose::cli::run_refine(cfg, episode_dir, candidates_path,
                                     mesh_path, out_path);
  }
  if (eval->parsed()) {
    const bool pose_mode = !pred_poses.empty() && !gt_episode.empty();
    const bool mesh_mode = !pred_mesh.empty() && !gt_mesh.empty();
    if (pose_mode == mesh_mode) {
      std::fprintf(stderr,
                   "error: eval needs either --pred-poses with --gt-episode "
                   "or --pred-mesh with --gt-mesh\n");
      return nocspose::cli::kExitValidation;
    }
    return pose_mode ? nocspose::cli::run_eval_poses(cfg, pred_poses,
                                                     gt_episode, out_path)
                     : nocspose::cli::run_eval_meshes(cfg, pred_mesh, gt_mesh,
                                                      out_path);
  }
  return nocspose::cli::run_bench(cfg, spec_path, out_dir);
}

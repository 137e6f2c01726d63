// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Subcommand implementations behind the CLI. Exit-code contract:
//   0 success, 2 validation error, 3 I/O error, 4 total pipeline failure.

#ifndef NOCSPOSE_TOOLS_COMMANDS_HPP
#define NOCSPOSE_TOOLS_COMMANDS_HPP

#include <string>

#include "nocspose/config.hpp"

namespace nocspose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitPipelineFailure = 4;

int run_generate(const RunConfig& cfg, const std::string& spec_path,
                 const std::string& out_dir);

int run_solve(const RunConfig& cfg, const std::string& episode_dir,
              const std::string& out_path);

int run_refine(const RunConfig& cfg, const std::string& episode_dir,
               const std::string& candidates_path, const std::string& mesh_path,
               const std::string& out_path);

int run_eval_poses(const RunConfig& cfg, const std::string& pred_poses_path,
                   const std::string& gt_episode_dir,
                   const std::string& out_path);

int run_eval_meshes(const RunConfig& cfg, const std::string& pred_mesh_path,
                    const std::string& gt_mesh_path,
                    const std::string& out_path);

int run_bench(const RunConfig& cfg, const std::string& spec_path,
              const std::string& work_dir);

}  // namespace nocspose::cli

#endif  // NOCSPOSE_TOOLS_COMMANDS_HPP

// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration shared by the CLI commands. Precedence, lowest to
// highest: built-in defaults, config file, NOCSPOSE_* environment variables,
// command-line flags. The effective configuration is echoed into every
// output directory.

#ifndef NOCSPOSE_CONFIG_HPP
#define NOCSPOSE_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nocspose {

struct RunConfig {
  // solving
  int ransac_iterations = 512;
  double ransac_inlier_threshold_px = 2.0;  // at a 512-wide reference image
  double ransac_min_inlier_ratio = 0.25;
  int lm_max_iters = 100;
  int pnp_stride = 0;  // 0 = auto

  // refinement
  double lambda_mask = 1.0;
  double mu_rgb = 1.0;
  int refine_max_iters = 100;
  double refine_step_tolerance = 1e-5;
  double fd_epsilon = 1e-3;
  int refine_resolution = 256;
  int n_init = 1;

  // synthetic cameras
  int image_size = 256;
  double fov_mean_deg = 36.0;
  double fov_std_deg = 9.0;
  double elevation_min_deg = -10.0;
  double elevation_max_deg = 50.0;
  double radius_min = 1.8;
  double radius_max = 3.2;
  double pp_jitter_std_px = 2.0;
  int supersample = 4;
  double target_ring_radius = 2.5;
  double ring_azimuth_offset_deg = 0.0;

  // corruption applied per solve candidate
  double corrupt_sigma = 0.0;
  double corrupt_outlier_fraction = 0.0;
  int corrupt_erosion_px = 0;

  // evaluation
  int eval_samples = 100000;
  double fscore_threshold = 0.05;
  double eval_elevation_deg = 15.0;
  double eval_radius = 2.5;

  std::uint64_t seed = 1;
};

/// Kebab-case keys, one per RunConfig field, sorted.
std::vector<std::string> config_keys();

/// Sets one field by kebab-case key; throws InvalidSpec on unknown keys or
/// unparsable values.
void config_set(RunConfig& cfg, const std::string& key,
                const std::string& value);
std::string config_get(const RunConfig& cfg, const std::string& key);

/// Parses "key = value" lines ('#' comments, blank lines ignored).
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Applies NOCSPOSE_<KEY> variables (kebab-case key upper-cased, '-' -> '_').
void apply_config_env(RunConfig& cfg);

/// Sorted "key = value" lines reproducing the configuration.
std::string echo_config(const RunConfig& cfg);

/// Writes echo_config to <dir>/effective_config.txt.
void write_effective_config(const RunConfig& cfg, const std::string& dir);

}  // namespace nocspose

#endif  // NOCSPOSE_CONFIG_HPP

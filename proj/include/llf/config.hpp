#pragma once

#include "llf/types.hpp"

#include <string>
#include <vector>

namespace llf {

// Label-engine knobs. The defaults mirror the shipped configuration:
// nms_iou 0.01, fusion_iou 0.01, dbscan_overlap 0.5 and the six-member
// epsilon ladder.
struct EngineParams {
  double nms_iou = 0.01;
  double fusion_iou = 0.01;
  double dbscan_overlap = 0.5;
  std::vector<float> dbscan_epsilons = {1.2488f, 0.8136f, 0.6952f,
                                        0.594f,  0.4353f, 0.3221f};
  int dbscan_min_pts = 5;
  int min_points = 1;  // minimum Lidar support per unprojected mask
  double ground_inlier_dist = 0.2;
  int ground_max_iters = 200;
  std::uint64_t ground_seed = 1;
  bool nms_by_score = false;
  // Replace-with-clusters refinement on/off (off reproduces the raw
  // unprojection baseline).
  bool refine = true;
};

struct DatasetPaths {
  std::string clouds_dir;
  std::string masks_dir;
  std::string calib_file;
  // Image size for text-format calibration files (which carry none).
  int image_width = 0;
  int image_height = 0;
};

struct PipelineConfig {
  DatasetPaths dataset;
  EngineParams engine;
  std::string output_dir;
  int threads = 0;  // 0 = hardware concurrency; LLF_THREADS overrides
  bool keep_going = true;
  std::vector<std::string> scans;  // empty: discover *.bin under clouds_dir
};

PipelineConfig load_config(const std::string& path);

// FNV-1a over the canonical serialization of the semantically relevant
// fields (dataset + engine). Execution knobs — threads, keep_going,
// output_dir, the scan selection — do not participate: they cannot change
// any produced label.
std::uint64_t config_hash(const PipelineConfig& config);

// Effective worker count: LLF_THREADS env var wins, then config.threads,
// then hardware concurrency.
int effective_threads(const PipelineConfig& config);

}  // namespace llf

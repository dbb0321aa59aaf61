#pragma once

#include "llf/config.hpp"
#include "llf/types.hpp"

#include <string>
#include <vector>

namespace llf {

struct ScanResult {
  std::string scan_id;
  bool ok = false;
  int segments = 0;
  std::string error;
};

struct PipelineSummary {
  std::uint64_t config_hash = 0;
  std::vector<ScanResult> scans;  // ordered by scan id
  int failures = 0;
};

// Full label engine over one scan: flatten each camera's masks, unproject,
// fuse across cameras in ascending camera id order, refine against the
// DBSCAN ensemble, and assign instance ids 1..K in segment order. Returns
// the labeling (semantic channel all void — pseudo-labels are
// class-agnostic) plus the per-segment tokens.
struct ScanLabelResult {
  PanopticLabeling labeling;
  std::vector<Token> tokens;          // one per instance id, 1-based order
  std::vector<std::uint16_t> instance_ids;
};

ScanLabelResult label_scan(const PointCloud& cloud,
                           const std::vector<CameraModel>& cameras,
                           const std::vector<std::string>& mask_prefixes,
                           const EngineParams& params);

// Batch driver: per-scan work is dispatched to a worker pool (size from
// effective_threads); workers share only the immutable config and
// calibration. Writes "<output>/labels/<scan>.label",
// "<output>/tokens/<scan>.bin(.json)" and a manifest.json recording the
// config hash and per-scan segment counts. Reruns are byte-identical.
PipelineSummary run_pipeline(const PipelineConfig& config);

// Token table serialization used by the pipeline and the classify/query
// subcommands: float32 rows plus instance ids in the JSON header.
void write_segment_tokens(const std::vector<Token>& tokens,
                          const std::vector<std::uint16_t>& instance_ids,
                          const std::string& path);
struct SegmentTokenTable {
  Eigen::MatrixXf tokens;
  std::vector<std::uint16_t> instance_ids;
};
SegmentTokenTable read_segment_tokens(const std::string& path);

}  // namespace llf

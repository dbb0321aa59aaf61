#include "llf/pipeline.hpp"

#include "llf/flatten.hpp"
#include "llf/io.hpp"
#include "llf/refine.hpp"
#include "llf/unproject.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace llf {

namespace fs = std::filesystem;
using nlohmann::json;

ScanLabelResult label_scan(const PointCloud& cloud,
                           const std::vector<CameraModel>& cameras,
                           const std::vector<std::string>& mask_prefixes,
                           const EngineParams& params) {
  const std::vector<bool> ground = remove_ground(
      cloud, params.ground_inlier_dist, params.ground_max_iters,
      params.ground_seed);
  ClusterPool pool;
  if (params.refine)
    pool = build_cluster_ensemble(cloud, ground, params.dbscan_epsilons,
                                  params.dbscan_min_pts);

  // Fixed fold order: ascending camera id.
  std::vector<std::pair<const CameraModel*, std::string>> work;
  for (const std::string& prefix : mask_prefixes) {
    const json sidecar = [&] {
      std::ifstream in(prefix + ".json");
      if (!in) throw DataError("cannot open " + prefix + ".json");
      json j;
      in >> j;
      return j;
    }();
    const int camera_id = sidecar.at("camera_id").get<int>();
    const CameraModel* cam = nullptr;
    for (const CameraModel& c : cameras)
      if (c.camera_id == camera_id) cam = &c;
    if (cam == nullptr)
      throw DataError(prefix + ": no calibration for camera " +
                      std::to_string(camera_id));
    work.emplace_back(cam, prefix);
  }
  std::sort(work.begin(), work.end(), [](const auto& a, const auto& b) {
    return a.first->camera_id < b.first->camera_id;
  });

  std::vector<LidarSegment> fused;
  for (const auto& [cam, prefix] : work) {
    const ImageMaskSet raw = read_mask_set(prefix);
    const ImageMaskSet flat = flatten_masks(
        raw, params.nms_iou,
        params.nms_by_score ? SuppressionOrder::kByScore
                            : SuppressionOrder::kByArea);
    std::vector<LidarSegment> segments =
        unproject_masks(cloud, *cam, flat, params.min_points);
    fused = fuse_views(std::move(fused), segments, params.fusion_iou,
                       cloud.size());
  }

  if (params.refine)
    fused = replace_with_clusters(std::move(fused), pool, params.dbscan_overlap);

  ScanLabelResult result;
  result.labeling.resize(static_cast<std::size_t>(cloud.size()));
  std::uint32_t next_id = 1;
  for (const LidarSegment& seg : fused) {
    if (seg.point_indices.empty()) continue;
    if (next_id > 0xFFFF)
      throw DataError("scan '" + cloud.scan_id +
                      "' produced more than 65535 instances");
    for (PointIndex p : seg.point_indices)
      result.labeling.instance[static_cast<std::size_t>(p)] =
          static_cast<std::uint16_t>(next_id);
    result.tokens.push_back(seg.token);
    result.instance_ids.push_back(static_cast<std::uint16_t>(next_id));
    ++next_id;
  }
  return result;
}

void write_segment_tokens(const std::vector<Token>& tokens,
                          const std::vector<std::uint16_t>& instance_ids,
                          const std::string& path) {
  if (tokens.size() != instance_ids.size())
    throw DataError("token/id count mismatch");
  Eigen::Index dim = 0;
  for (const Token& t : tokens) dim = std::max(dim, t.size());
  Eigen::MatrixXf rows(static_cast<Eigen::Index>(tokens.size()), dim);
  rows.setZero();
  for (std::size_t i = 0; i < tokens.size(); ++i)
    rows.row(static_cast<Eigen::Index>(i)).head(tokens[i].size()) =
        tokens[i].cast<float>().transpose();
  write_token_blob(rows, path);

  // Extend the blob header with the instance ids.
  json header;
  {
    std::ifstream in(path + ".json");
    in >> header;
  }
  header["instance_ids"] = instance_ids;
  std::ofstream out(path + ".json", std::ios::trunc);
  out << header.dump(2) << "\n";
}

SegmentTokenTable read_segment_tokens(const std::string& path) {
  SegmentTokenTable table;
  table.tokens = read_token_blob(path);
  json header;
  {
    std::ifstream in(path + ".json");
    if (!in) throw DataError("cannot open " + path + ".json");
    in >> header;
  }
  table.instance_ids =
      header.at("instance_ids").get<std::vector<std::uint16_t>>();
  if (table.instance_ids.size() != static_cast<std::size_t>(table.tokens.rows()))
    throw FormatError(path + ": instance id count does not match rows");
  return table;
}

namespace {

std::vector<std::string> discover_scans(const PipelineConfig& config) {
  if (!config.scans.empty()) {
    std::vector<std::string> scans = config.scans;
    std::sort(scans.begin(), scans.end());
    return scans;
  }
  std::vector<std::string> scans;
  if (!fs::is_directory(config.dataset.clouds_dir))
    throw ConfigError("clouds directory " + config.dataset.clouds_dir +
                      " does not exist");
  for (const auto& entry : fs::directory_iterator(config.dataset.clouds_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".bin")
      scans.push_back(entry.path().stem().string());
  std::sort(scans.begin(), scans.end());
  return scans;
}

std::vector<std::string> mask_prefixes_for(const PipelineConfig& config,
                                           const std::string& scan_id) {
  const fs::path dir = fs::path(config.dataset.masks_dir) / scan_id;
  std::vector<std::string> prefixes;
  if (!fs::is_directory(dir)) return prefixes;  // all-void labeling
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path p = entry.path();
    if (p.extension() != ".json") continue;
    const std::string stem = p.stem().string();
    if (stem.find(".tokens") != std::string::npos) continue;  // blob headers
    prefixes.push_back((dir / stem).string());
  }
  std::sort(prefixes.begin(), prefixes.end());
  return prefixes;
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& config) {
  const std::vector<std::string> scans = discover_scans(config);
  const std::vector<CameraModel> cameras =
      load_calibration(config.dataset.calib_file, config.dataset.image_width,
                       config.dataset.image_height);

  fs::create_directories(fs::path(config.output_dir) / "labels");
  fs::create_directories(fs::path(config.output_dir) / "tokens");

  PipelineSummary summary;
  summary.config_hash = config_hash(config);
  summary.scans.resize(scans.size());

  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> abort{false};
  const int workers =
      std::max(1, std::min<int>(effective_threads(config),
                                static_cast<int>(scans.size())));

  const auto process = [&](std::size_t s) {
    ScanResult& result = summary.scans[s];
    result.scan_id = scans[s];
    try {
      const std::string cloud_path =
          (fs::path(config.dataset.clouds_dir) / (scans[s] + ".bin")).string();
      PointCloud cloud = load_point_cloud(cloud_path);
      cloud.scan_id = scans[s];

      const ScanLabelResult labels = label_scan(
          cloud, cameras, mask_prefixes_for(config, scans[s]), config.engine);

      write_labels(labels.labeling,
                   (fs::path(config.output_dir) / "labels" /
                    (scans[s] + ".label")).string());
      write_segment_tokens(labels.tokens, labels.instance_ids,
                           (fs::path(config.output_dir) / "tokens" /
                            (scans[s] + ".bin")).string());
      result.ok = true;
      result.segments = static_cast<int>(labels.instance_ids.size());
    } catch (const std::exception& e) {
      result.error = e.what();
      if (!config.keep_going) abort = true;
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (!abort) {
        const std::size_t s = cursor.fetch_add(1);
        if (s >= scans.size()) break;
        process(s);
      }
    });
  for (std::thread& t : pool) t.join();

  for (const ScanResult& r : summary.scans)
    if (!r.ok) ++summary.failures;

  // Deterministic manifest: no timestamps, scans in id order.
  json manifest;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(summary.config_hash));
  manifest["config_hash"] = hash_hex;
  manifest["failures"] = summary.failures;
  manifest["scans"] = json::array();
  for (const ScanResult& r : summary.scans) {
    json scan;
    scan["id"] = r.scan_id;
    scan["ok"] = r.ok;
    scan["segments"] = r.segments;
    if (!r.ok) scan["error"] = r.error;
    manifest["scans"].push_back(scan);
  }
  std::ofstream out(fs::path(config.output_dir) / "manifest.json",
                    std::ios::trunc);
  if (!out) throw DataError("cannot write manifest under " + config.output_dir);
  out << manifest.dump(2) << "\n";
  return summary;
}

}  // namespace llf

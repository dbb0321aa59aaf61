#include "llf/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <thread>

namespace llf {

namespace {
using nlohmann::json;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }

  PipelineConfig config;
  try {
    const json& d = j.at("dataset");
    config.dataset.clouds_dir = d.at("clouds").get<std::string>();
    config.dataset.masks_dir = d.at("masks").get<std::string>();
    config.dataset.calib_file = d.at("calib").get<std::string>();
    config.dataset.image_width = d.value("image_width", 0);
    config.dataset.image_height = d.value("image_height", 0);
    config.output_dir = j.at("output").get<std::string>();

    if (j.contains("engine")) {
      const json& e = j["engine"];
      EngineParams& p = config.engine;
      p.nms_iou = e.value("nms_iou", p.nms_iou);
      p.fusion_iou = e.value("fusion_iou", p.fusion_iou);
      p.dbscan_overlap = e.value("dbscan_overlap", p.dbscan_overlap);
      p.dbscan_epsilons = e.value("dbscan_epsilons", p.dbscan_epsilons);
      p.dbscan_min_pts = e.value("dbscan_min_pts", p.dbscan_min_pts);
      p.min_points = e.value("min_points", p.min_points);
      p.ground_inlier_dist = e.value("ground_inlier_dist", p.ground_inlier_dist);
      p.ground_max_iters = e.value("ground_max_iters", p.ground_max_iters);
      p.ground_seed = e.value("ground_seed", p.ground_seed);
      p.nms_by_score = e.value("nms_by_score", p.nms_by_score);
      p.refine = e.value("refine", p.refine);
    }
    config.threads = j.value("threads", 0);
    config.keep_going = j.value("keep_going", true);
    config.scans = j.value("scans", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  if (!(config.engine.nms_iou > 0.0 && config.engine.nms_iou <= 1.0))
    throw ConfigError("nms_iou must lie in (0, 1]");
  if (config.engine.dbscan_epsilons.empty())
    throw ConfigError("dbscan_epsilons must be nonempty");
  for (float eps : config.engine.dbscan_epsilons)
    if (!(eps > 0.0f)) throw ConfigError("dbscan epsilons must be positive");
  if (config.engine.dbscan_min_pts < 1)
    throw ConfigError("dbscan_min_pts must be >= 1");
  return config;
}

std::uint64_t config_hash(const PipelineConfig& config) {
  json j;
  j["dataset"]["clouds"] = config.dataset.clouds_dir;
  j["dataset"]["masks"] = config.dataset.masks_dir;
  j["dataset"]["calib"] = config.dataset.calib_file;
  j["dataset"]["image_width"] = config.dataset.image_width;
  j["dataset"]["image_height"] = config.dataset.image_height;
  const EngineParams& p = config.engine;
  j["engine"]["nms_iou"] = p.nms_iou;
  j["engine"]["fusion_iou"] = p.fusion_iou;
  j["engine"]["dbscan_overlap"] = p.dbscan_overlap;
  j["engine"]["dbscan_epsilons"] = p.dbscan_epsilons;
  j["engine"]["dbscan_min_pts"] = p.dbscan_min_pts;
  j["engine"]["min_points"] = p.min_points;
  j["engine"]["ground_inlier_dist"] = p.ground_inlier_dist;
  j["engine"]["ground_max_iters"] = p.ground_max_iters;
  j["engine"]["ground_seed"] = p.ground_seed;
  j["engine"]["nms_by_score"] = p.nms_by_score;
  j["engine"]["refine"] = p.refine;

  const std::string canon = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int effective_threads(const PipelineConfig& config) {
  if (const char* env = std::getenv("LLF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (config.threads > 0) return config.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace llf

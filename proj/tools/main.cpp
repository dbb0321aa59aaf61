// llf — batch toolkit for lifting image instance masks into Lidar panoptic
// pseudo-labels, zero-shot classification of segment tokens, and panoptic
// evaluation. Subcommands are thin wrappers over the library.
#include "llf/augment.hpp"
#include "llf/config.hpp"
#include "llf/evaluate.hpp"
#include "llf/flatten.hpp"
#include "llf/geometry.hpp"
#include "llf/io.hpp"
#include "llf/pipeline.hpp"
#include "llf/refine.hpp"
#include "llf/stats.hpp"
#include "llf/unproject.hpp"
#include "llf/zeroshot.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace fs = std::filesystem;
using namespace llf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << text;
}

std::vector<CameraModel> load_cams(const std::string& calib, int width,
                                   int height) {
  if (calib.empty()) throw ConfigError("--calib is required here");
  return load_calibration(calib, width, height);
}

// Pairs of (pred, gt) label files: directories are matched by file name,
// single files are paired directly.
std::vector<std::pair<std::string, std::string>> label_pairs(
    const std::string& pred, const std::string& gt) {
  if (!fs::is_directory(pred)) return {{pred, gt}};
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(pred))
    if (entry.is_regular_file() && entry.path().extension() == ".label")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  for (const std::string& name : names)
    pairs.emplace_back((fs::path(pred) / name).string(),
                       (fs::path(gt) / name).string());
  if (pairs.empty()) throw DataError("no .label files under " + pred);
  return pairs;
}

std::vector<LidarSegment> segments_from_labels(const PanopticLabeling& labels,
                                               const SegmentTokenTable* tokens) {
  std::map<std::uint16_t, LidarSegment> by_id;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels.instance[i] == 0) continue;
    by_id[labels.instance[i]].point_indices.push_back(
        static_cast<PointIndex>(i));
  }
  std::vector<LidarSegment> segments;
  for (auto& [id, seg] : by_id) {
    if (tokens != nullptr) {
      bool found = false;
      for (std::size_t r = 0; r < tokens->instance_ids.size(); ++r)
        if (tokens->instance_ids[r] == id) {
          seg.token = tokens->tokens.row(static_cast<Eigen::Index>(r))
                          .transpose()
                          .cast<double>();
          found = true;
          break;
        }
      if (!found)
        throw DataError("no token row for instance " + std::to_string(id));
    }
    segments.push_back(std::move(seg));
  }
  return segments;
}

int run(int argc, char** argv) {
  CLI::App app{"lidar label factory: mask lifting, zero-shot classification "
               "and panoptic evaluation"};
  app.require_subcommand(1);

  // --- flatten-masks ---
  auto* flatten_cmd = app.add_subcommand(
      "flatten-masks", "suppress an overlapping mask set into a disjoint one");
  std::string fl_in, fl_out;
  double fl_nms_iou = 0.01;
  bool fl_by_score = false;
  flatten_cmd->add_option("--in", fl_in, "input container prefix")->required();
  flatten_cmd->add_option("--out", fl_out, "output container prefix")->required();
  flatten_cmd->add_option("--nms-iou", fl_nms_iou, "suppression IoU threshold");
  flatten_cmd->add_flag("--by-score", fl_by_score,
                        "order by score instead of area (ablation variant)");
  flatten_cmd->callback([&] {
    const ImageMaskSet raw = read_mask_set(fl_in);
    const ImageMaskSet flat =
        flatten_masks(raw, fl_nms_iou,
                      fl_by_score ? SuppressionOrder::kByScore
                                  : SuppressionOrder::kByArea);
    if (fs::path(fl_out).has_parent_path())
      fs::create_directories(fs::path(fl_out).parent_path());
    write_mask_set(flat, fl_out);
    std::cout << raw.masks.size() << " masks -> " << flat.masks.size()
              << " after flattening\n";
  });

  // --- unproject ---
  auto* unproject_cmd = app.add_subcommand(
      "unproject", "lift flattened masks into fused Lidar segments");
  std::string up_cloud, up_calib, up_out_labels, up_out_tokens;
  std::vector<std::string> up_masks;
  int up_min_points = 1, up_width = 0, up_height = 0;
  double up_fusion_iou = 0.01;
  unproject_cmd->add_option("--cloud", up_cloud, ".bin scan")->required();
  unproject_cmd->add_option("--calib", up_calib, "calibration file")->required();
  unproject_cmd->add_option("--masks", up_masks, "flattened container prefixes")
      ->required();
  unproject_cmd->add_option("--min-points", up_min_points,
                            "minimum Lidar points per mask");
  unproject_cmd->add_option("--fusion-iou", up_fusion_iou,
                            "cross-camera merge threshold");
  unproject_cmd->add_option("--image-width", up_width, "for text calibration");
  unproject_cmd->add_option("--image-height", up_height, "for text calibration");
  unproject_cmd->add_option("--out-labels", up_out_labels, "output .label")
      ->required();
  unproject_cmd->add_option("--out-tokens", up_out_tokens,
                            "output token table (.bin)");
  unproject_cmd->callback([&] {
    PointCloud cloud = load_point_cloud(up_cloud);
    const auto cams = load_cams(up_calib, up_width, up_height);

    // Ascending camera id fold, mirroring the batch pipeline.
    std::vector<std::pair<int, std::string>> ordered;
    for (const std::string& prefix : up_masks) {
      const ImageMaskSet set = read_mask_set(prefix);
      ordered.emplace_back(set.camera_id, prefix);
    }
    std::sort(ordered.begin(), ordered.end());

    std::vector<LidarSegment> fused;
    for (const auto& [camera_id, prefix] : ordered) {
      const CameraModel* cam = nullptr;
      for (const CameraModel& c : cams)
        if (c.camera_id == camera_id) cam = &c;
      if (cam == nullptr)
        throw DataError("no calibration for camera " +
                        std::to_string(camera_id));
      const auto segments =
          unproject_masks(cloud, *cam, read_mask_set(prefix), up_min_points);
      fused = fuse_views(std::move(fused), segments, up_fusion_iou,
                         cloud.size());
    }

    PanopticLabeling labels;
    labels.resize(static_cast<std::size_t>(cloud.size()));
    std::vector<Token> tokens;
    std::vector<std::uint16_t> ids;
    std::uint32_t next = 1;
    for (const LidarSegment& seg : fused) {
      if (next > 0xFFFF) throw DataError("more than 65535 segments");
      for (PointIndex p : seg.point_indices)
        labels.instance[static_cast<std::size_t>(p)] =
            static_cast<std::uint16_t>(next);
      tokens.push_back(seg.token);
      ids.push_back(static_cast<std::uint16_t>(next));
      ++next;
    }
    write_labels(labels, up_out_labels);
    if (!up_out_tokens.empty()) write_segment_tokens(tokens, ids, up_out_tokens);
    std::cout << fused.size() << " segments\n";
  });

  // --- refine ---
  auto* refine_cmd = app.add_subcommand(
      "refine", "ground removal + DBSCAN ensemble refinement of segments");
  std::string rf_cloud, rf_labels, rf_out, rf_strategy = "replace";
  EngineParams rf_params;
  refine_cmd->add_option("--cloud", rf_cloud, ".bin scan")->required();
  refine_cmd->add_option("--labels", rf_labels, "input .label (instances)")
      ->required();
  refine_cmd->add_option("--out-labels", rf_out, "output .label")->required();
  refine_cmd->add_option("--strategy", rf_strategy, "replace|filter")
      ->check(CLI::IsMember({"replace", "filter"}));
  refine_cmd->add_option("--overlap", rf_params.dbscan_overlap,
                         "cluster IoU threshold");
  refine_cmd->add_option("--epsilons", rf_params.dbscan_epsilons,
                         "DBSCAN density thresholds");
  refine_cmd->add_option("--min-pts", rf_params.dbscan_min_pts,
                         "DBSCAN core threshold");
  refine_cmd->add_option("--ground-inlier-dist", rf_params.ground_inlier_dist,
                         "RANSAC inlier distance [m]");
  refine_cmd->add_option("--ground-iters", rf_params.ground_max_iters,
                         "RANSAC iterations");
  refine_cmd->add_option("--ground-seed", rf_params.ground_seed, "RANSAC seed");
  refine_cmd->callback([&] {
    PointCloud cloud = load_point_cloud(rf_cloud);
    const PanopticLabeling labels = read_labels(rf_labels);
    if (labels.size() != static_cast<std::size_t>(cloud.size()))
      throw DataError("label/scan length mismatch");
    std::vector<LidarSegment> segments = segments_from_labels(labels, nullptr);

    const auto ground =
        remove_ground(cloud, rf_params.ground_inlier_dist,
                      rf_params.ground_max_iters, rf_params.ground_seed);
    const ClusterPool pool = build_cluster_ensemble(
        cloud, ground, rf_params.dbscan_epsilons, rf_params.dbscan_min_pts);
    segments = rf_strategy == "replace"
                   ? replace_with_clusters(std::move(segments), pool,
                                           rf_params.dbscan_overlap)
                   : filter_by_clusters(segments, pool,
                                        rf_params.dbscan_overlap);

    PanopticLabeling out;
    out.resize(labels.size());
    std::uint32_t next = 1;
    for (const LidarSegment& seg : segments) {
      if (seg.point_indices.empty()) continue;
      for (PointIndex p : seg.point_indices) {
        out.semantic[static_cast<std::size_t>(p)] =
            labels.semantic[static_cast<std::size_t>(p)];
        out.instance[static_cast<std::size_t>(p)] =
            static_cast<std::uint16_t>(next);
      }
      ++next;
    }
    write_labels(out, rf_out);
    std::cout << segments.size() << " segments ("
              << pool.clusters.size() << " pool clusters)\n";
  });

  // --- pseudo-label ---
  auto* pseudo_cmd = app.add_subcommand(
      "pseudo-label", "full label engine over a dataset (config driven)");
  std::string pl_config;
  std::vector<std::string> pl_scans;
  bool pl_fail_fast = false;
  int pl_threads = 0;
  pseudo_cmd->add_option("--config", pl_config, "pipeline config JSON")
      ->required();
  pseudo_cmd->add_option("--scans", pl_scans, "restrict to these scan ids");
  pseudo_cmd->add_flag("--fail-fast", pl_fail_fast,
                       "abort on the first per-scan error");
  pseudo_cmd->add_option("--threads", pl_threads, "worker count override");
  pseudo_cmd->callback([&] {
    PipelineConfig config = load_config(pl_config);
    if (!pl_scans.empty()) config.scans = pl_scans;
    if (pl_fail_fast) config.keep_going = false;
    if (pl_threads > 0) config.threads = pl_threads;
    const PipelineSummary summary = run_pipeline(config);
    for (const ScanResult& r : summary.scans)
      if (r.ok)
        std::cout << r.scan_id << ": " << r.segments << " segments\n";
      else
        std::cerr << r.scan_id << ": ERROR " << r.error << "\n";
    if (summary.failures > 0) {
      std::cerr << summary.failures << " of " << summary.scans.size()
                << " scans failed\n";
      std::exit(config.keep_going ? kExitPartial : kExitData);
    }
  });

  // --- classify ---
  auto* classify_cmd = app.add_subcommand(
      "classify", "zero-shot classification of segment tokens");
  std::string cl_labels, cl_tokens, cl_vocab, cl_embeddings, cl_out, cl_scores;
  classify_cmd->add_option("--labels", cl_labels, "input .label")->required();
  classify_cmd->add_option("--tokens", cl_tokens, "segment token table")
      ->required();
  classify_cmd->add_option("--vocab", cl_vocab, "vocabulary JSON")->required();
  classify_cmd->add_option("--embeddings", cl_embeddings,
                           "prompt embedding blob (manifest order)")
      ->required();
  classify_cmd->add_option("--out", cl_out, "output .label")->required();
  classify_cmd->add_option("--scores", cl_scores, "optional score report JSON");
  classify_cmd->callback([&] {
    const PanopticLabeling labels = read_labels(cl_labels);
    const SegmentTokenTable table = read_segment_tokens(cl_tokens);
    Vocabulary vocab = load_vocabulary(cl_vocab);
    load_prompt_embeddings(vocab, read_token_blob(cl_embeddings));

    std::map<std::uint16_t, std::uint16_t> class_of;
    nlohmann::json scores = nlohmann::json::array();
    for (std::size_t r = 0; r < table.instance_ids.size(); ++r) {
      const Token token = table.tokens.row(static_cast<Eigen::Index>(r))
                              .transpose()
                              .cast<double>();
      const ClassScores s = classify_token(token, vocab);
      class_of[table.instance_ids[r]] = s.argmax_id;
      if (!cl_scores.empty()) {
        nlohmann::json entry;
        entry["instance"] = table.instance_ids[r];
        entry["class"] = s.argmax_id;
        const Eigen::VectorXd probs = s.softmax(kDisplaySoftmaxTemperature);
        for (std::size_t c = 0; c < s.class_ids.size(); ++c) {
          entry["cosine"][std::to_string(s.class_ids[c])] =
              s.scores(static_cast<Eigen::Index>(c));
          entry["prob"][std::to_string(s.class_ids[c])] =
              probs(static_cast<Eigen::Index>(c));
        }
        scores.push_back(entry);
      }
    }

    PanopticLabeling out = labels;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto it = class_of.find(out.instance[i]);
      if (it != class_of.end()) out.semantic[i] = it->second;
    }
    write_labels(out, cl_out);
    if (!cl_scores.empty()) write_text(cl_scores, scores.dump(2) + "\n");
    std::cout << class_of.size() << " segments classified\n";
  });

  // --- query ---
  auto* query_cmd = app.add_subcommand(
      "query", "select segments matching a free-text prompt embedding");
  std::string q_labels, q_tokens, q_embeddings, q_out;
  query_cmd->add_option("--labels", q_labels, "input .label")->required();
  query_cmd->add_option("--tokens", q_tokens, "segment token table")->required();
  query_cmd
      ->add_option("--embeddings", q_embeddings,
                   "2-row blob: query embedding then the \"other\" embedding")
      ->required();
  query_cmd->add_option("--out", q_out,
                        "optional .label keeping only selected segments");
  query_cmd->callback([&] {
    const PanopticLabeling labels = read_labels(q_labels);
    const SegmentTokenTable table = read_segment_tokens(q_tokens);
    const Eigen::MatrixXf blob = read_token_blob(q_embeddings);
    if (blob.rows() != 2)
      throw DataError("query blob must have exactly 2 rows (query, other)");

    std::vector<LidarSegment> segments;
    for (std::size_t r = 0; r < table.instance_ids.size(); ++r) {
      LidarSegment seg;
      seg.token = table.tokens.row(static_cast<Eigen::Index>(r))
                      .transpose()
                      .cast<double>();
      segments.push_back(std::move(seg));
    }
    const auto selected =
        prompt_query(segments, blob.row(0).transpose().cast<double>(),
                     blob.row(1).transpose().cast<double>());
    std::set<std::uint16_t> keep;
    for (std::size_t s : selected) {
      keep.insert(table.instance_ids[s]);
      std::cout << table.instance_ids[s] << "\n";
    }
    if (!q_out.empty()) {
      PanopticLabeling out = labels;
      for (std::size_t i = 0; i < out.size(); ++i)
        if (!keep.count(out.instance[i])) {
          out.semantic[i] = 0;
          out.instance[i] = 0;
        }
      write_labels(out, q_out);
    }
  });

  // --- evaluate ---
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "panoptic quality of predictions against ground truth");
  std::string ev_pred, ev_gt, ev_vocab, ev_super_vocab, ev_clouds, ev_calib;
  std::string ev_report;
  bool ev_oracle = false, ev_merge = false, ev_frustum = false,
       ev_super = false;
  int ev_width = 0, ev_height = 0;
  eval_cmd->add_option("--pred", ev_pred, ".label file or directory")
      ->required();
  eval_cmd->add_option("--gt", ev_gt, ".label file or directory")->required();
  eval_cmd->add_option("--vocab", ev_vocab, "vocabulary JSON")->required();
  eval_cmd->add_flag("--oracle", ev_oracle,
                     "assign majority GT classes to predicted segments");
  eval_cmd->add_flag("--merge-stuff", ev_merge,
                     "collapse predicted stuff instances per class");
  eval_cmd->add_flag("--frustum", ev_frustum,
                     "evaluate only points visible in some camera");
  eval_cmd->add_flag("--super-classes", ev_super,
                     "map both sides to super classes before evaluating");
  eval_cmd->add_option("--super-vocab", ev_super_vocab,
                       "super-class vocabulary JSON (with --super-classes)");
  eval_cmd->add_option("--clouds", ev_clouds, "scan directory (for --frustum)");
  eval_cmd->add_option("--calib", ev_calib, "calibration (for --frustum)");
  eval_cmd->add_option("--image-width", ev_width, "for text calibration");
  eval_cmd->add_option("--image-height", ev_height, "for text calibration");
  eval_cmd->add_option("--report", ev_report, "write the JSON report here");
  eval_cmd->callback([&] {
    Vocabulary vocab = load_vocabulary(ev_vocab);
    Vocabulary super;
    if (ev_super) {
      if (ev_super_vocab.empty())
        throw ConfigError("--super-classes requires --super-vocab");
      super = load_vocabulary(ev_super_vocab);
    }
    std::vector<CameraModel> cams;
    if (ev_frustum) {
      if (ev_clouds.empty())
        throw ConfigError("--frustum requires --clouds and --calib");
      cams = load_cams(ev_calib, ev_width, ev_height);
    }

    const Vocabulary& eval_vocab = ev_super ? super : vocab;
    PQAccumulator acc(eval_vocab);
    for (const auto& [pred_path, gt_path] : label_pairs(ev_pred, ev_gt)) {
      PanopticLabeling pred = read_labels(pred_path);
      PanopticLabeling gt = read_labels(gt_path);
      if (ev_oracle) pred = apply_semantic_oracle(pred, gt);
      if (ev_super) {
        pred = map_to_super_classes(pred, vocab);
        gt = map_to_super_classes(gt, vocab);
      }
      if (ev_merge) pred = merge_stuff(pred, eval_vocab);

      EvalOptions options;
      std::vector<bool> mask;
      if (ev_frustum) {
        const fs::path scan = fs::path(ev_clouds) /
                              (fs::path(pred_path).stem().string() + ".bin");
        const PointCloud cloud = load_point_cloud(scan.string());
        mask = frustum_filter(cloud, cams);
        options.eval_mask = &mask;
      }
      acc.add_scan(pred, gt, options);
    }
    const PQReport report = acc.finalize();
    std::cout << report_to_table(report);
    if (!ev_report.empty()) write_text(ev_report, report_to_json(report));
  });

  // --- stats ---
  auto* stats_cmd =
      app.add_subcommand("stats", "pseudo-label corpus statistics");
  std::string st_clouds, st_labels, st_vocab, st_calib, st_report;
  bool st_frustum = false;
  int st_width = 0, st_height = 0;
  stats_cmd->add_option("--clouds", st_clouds, "scan directory")->required();
  stats_cmd->add_option("--labels", st_labels, "label directory")->required();
  stats_cmd->add_option("--vocab", st_vocab, "vocabulary JSON")->required();
  stats_cmd->add_flag("--frustum", st_frustum, "restrict to camera frustums");
  stats_cmd->add_option("--calib", st_calib, "calibration (for --frustum)");
  stats_cmd->add_option("--image-width", st_width, "for text calibration");
  stats_cmd->add_option("--image-height", st_height, "for text calibration");
  stats_cmd->add_option("--report", st_report, "write the JSON report here");
  stats_cmd->callback([&] {
    const Vocabulary vocab = load_vocabulary(st_vocab);
    std::vector<CameraModel> cams;
    if (st_frustum) cams = load_cams(st_calib, st_width, st_height);

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(st_clouds))
      if (entry.is_regular_file() && entry.path().extension() == ".bin")
        names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw DataError("no .bin scans under " + st_clouds);

    LabelStatsAccumulator acc(vocab);
    for (const std::string& name : names) {
      PointCloud cloud =
          load_point_cloud((fs::path(st_clouds) / (name + ".bin")).string());
      cloud.scan_id = name;
      const PanopticLabeling labels =
          read_labels((fs::path(st_labels) / (name + ".label")).string());
      if (st_frustum) {
        const std::vector<bool> mask = frustum_filter(cloud, cams);
        acc.add_scan(cloud, labels, &mask);
      } else {
        acc.add_scan(cloud, labels);
      }
    }
    const LabelStatsReport report = acc.finalize();
    std::cout << stats_to_table(report);
    if (!st_report.empty()) write_text(st_report, stats_to_json(report, vocab));
  });

  // --- augment ---
  auto* augment_cmd = app.add_subcommand(
      "augment", "training-data preparation for partially labeled scans");
  std::string au_mode, au_cloud, au_labels, au_cloud_b, au_labels_b;
  std::string au_out_cloud, au_out_labels;
  double au_jitter = 5.0;
  std::uint64_t au_seed = 0;
  std::vector<double> au_rot_z = {0.0, 0.0}, au_scale = {1.0, 1.0},
                      au_translate = {0.0, 0.0};
  std::vector<std::string> au_flip;
  augment_cmd->add_option("--mode", au_mode, "crop|franken|mix|spatial")
      ->required()
      ->check(CLI::IsMember({"crop", "franken", "mix", "spatial"}));
  augment_cmd->add_option("--cloud", au_cloud, ".bin scan")->required();
  augment_cmd->add_option("--labels", au_labels, ".label file")->required();
  augment_cmd->add_option("--cloud-b", au_cloud_b, "second scan (mix)");
  augment_cmd->add_option("--labels-b", au_labels_b, "second labels (mix)");
  augment_cmd->add_option("--out-cloud", au_out_cloud, "output .bin")
      ->required();
  augment_cmd->add_option("--out-labels", au_out_labels, "output .label")
      ->required();
  augment_cmd->add_option("--jitter-deg", au_jitter, "franken jitter");
  augment_cmd->add_option("--seed", au_seed, "rng seed");
  augment_cmd->add_option("--rot-z", au_rot_z, "rotation range [rad]")
      ->expected(2);
  augment_cmd->add_option("--scale", au_scale, "scale range")->expected(2);
  augment_cmd->add_option("--translate", au_translate, "translation range [m]")
      ->expected(2);
  augment_cmd->add_option("--flip", au_flip, "axes to (maybe) flip: x y z");
  augment_cmd->callback([&] {
    PointCloud cloud = load_point_cloud(au_cloud);
    PanopticLabeling labels = read_labels(au_labels);

    PointCloud out_cloud;
    PanopticLabeling out_labels;
    if (au_mode == "crop") {
      CropResult r = crop_unlabeled(cloud, labels);
      out_cloud = std::move(r.cloud);
      out_labels = std::move(r.labeling);
    } else if (au_mode == "franken") {
      FrankenParams params;
      params.jitter_deg = au_jitter;
      params.seed = au_seed;
      LabeledCloud r = franken_frustum(cloud, labels, params);
      out_cloud = std::move(r.cloud);
      out_labels = std::move(r.labeling);
    } else if (au_mode == "mix") {
      if (au_cloud_b.empty() || au_labels_b.empty())
        throw ConfigError("--mode mix requires --cloud-b and --labels-b");
      const PointCloud cloud_b = load_point_cloud(au_cloud_b);
      const PanopticLabeling labels_b = read_labels(au_labels_b);
      LabeledCloud r = mix_scans(cloud, labels, cloud_b, labels_b, au_seed);
      out_cloud = std::move(r.cloud);
      out_labels = std::move(r.labeling);
    } else {
      SpatialAugmentParams params;
      params.rot_z_range = {au_rot_z[0], au_rot_z[1]};
      params.scale_range = {au_scale[0], au_scale[1]};
      params.translate_range = {au_translate[0], au_translate[1]};
      for (const std::string& axis : au_flip) {
        if (axis == "x")
          params.flip_axes[0] = true;
        else if (axis == "y")
          params.flip_axes[1] = true;
        else if (axis == "z")
          params.flip_axes[2] = true;
        else
          throw ConfigError("unknown flip axis " + axis);
      }
      params.seed = au_seed;
      out_cloud = spatial_augment(cloud, params);
      out_labels = labels;
    }
    save_point_cloud(out_cloud, au_out_cloud);
    write_labels(out_labels, au_out_labels);
    std::cout << out_cloud.size() << " points written\n";
  });

  // --- export-ply ---
  auto* ply_cmd =
      app.add_subcommand("export-ply", "colored point cloud export");
  std::string py_cloud, py_labels, py_out, py_channel = "instance";
  bool py_binary = false;
  ply_cmd->add_option("--cloud", py_cloud, ".bin scan")->required();
  ply_cmd->add_option("--labels", py_labels, ".label file")->required();
  ply_cmd->add_option("--out", py_out, "output .ply")->required();
  ply_cmd->add_option("--channel", py_channel, "instance|semantic")
      ->check(CLI::IsMember({"instance", "semantic"}));
  ply_cmd->add_flag("--binary", py_binary, "binary little-endian PLY");
  ply_cmd->callback([&] {
    const PointCloud cloud = load_point_cloud(py_cloud);
    const PanopticLabeling labels = read_labels(py_labels);
    export_ply(cloud, labels, py_out,
               py_channel == "semantic" ? PlyColorChannel::kSemantic
                                        : PlyColorChannel::kInstance,
               py_binary);
    std::cout << cloud.size() << " vertices written\n";
  });

  // --- prompt-manifest ---
  auto* manifest_cmd = app.add_subcommand(
      "prompt-manifest", "exact strings to feed the external text encoder");
  std::string pm_vocab, pm_out;
  manifest_cmd->add_option("--vocab", pm_vocab, "vocabulary JSON")->required();
  manifest_cmd->add_option("--out", pm_out, "output text file")->required();
  manifest_cmd->callback([&] {
    const Vocabulary vocab = load_vocabulary(pm_vocab);
    const auto manifest = build_prompt_manifest(vocab);
    std::string text;
    for (const std::string& line : manifest) text += line + "\n";
    write_text(pm_out, text);
    std::cout << manifest.size() << " prompt strings\n";
  });

  CLI11_PARSE(app, argc, argv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

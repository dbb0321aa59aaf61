// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 3 drives the real CLI binary end to end; everything
// else runs against the library with independent brute-force references.
#include "llf/augment.hpp"
#include "llf/evaluate.hpp"
#include "llf/flatten.hpp"
#include "llf/io.hpp"
#include "llf/pipeline.hpp"
#include "llf/refine.hpp"
#include "llf/stats.hpp"
#include "llf/unproject.hpp"
#include "llf/zeroshot.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace llf;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
            << name << (detail.empty() ? "" : " (" + detail + ")") << "\n";
  if (!pass) ++failures;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f s", s);
  return buf;
}

PanopticLabeling random_labeling(std::mt19937_64& rng, int n, int classes,
                                 int instances) {
  std::uniform_int_distribution<int> sem(0, classes);
  std::uniform_int_distribution<int> inst(0, instances);
  PanopticLabeling l;
  l.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    l.semantic[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(sem(rng));
    l.instance[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(inst(rng));
  }
  return l;
}

// --- criterion 1: PQ oracle equivalence --------------------------------

void criterion_pq_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  const Vocabulary vocab = testsupport::make_test_vocabulary(5, 3);
  std::uniform_int_distribution<int> npts(1, 500);

  double max_delta = 0.0;
  bool ok = true;
  for (int scan = 0; scan < 200 && ok; ++scan) {
    const int n = npts(rng);
    const PanopticLabeling gt = random_labeling(rng, n, 5, 8);
    const PanopticLabeling pred = random_labeling(rng, n, 5, 8);
    const PQReport got = evaluate_panoptic(pred, gt, vocab);
    const auto expected = oracle::brute_force_pq(pred, gt, vocab);
    for (const PQClassReport& c : got.classes) {
      const auto it = expected.find(c.class_id);
      const oracle::BruteClassResult ref =
          it == expected.end() ? oracle::BruteClassResult{} : it->second;
      const double delta =
          std::max({std::abs(c.pq - ref.pq), std::abs(c.sq - ref.sq),
                    std::abs(c.rq - ref.rq)});
      max_delta = std::max(max_delta, delta);
      if (delta > 1e-9 || c.stats.tp != ref.tp || c.stats.fp != ref.fp ||
          c.stats.fn != ref.fn) {
        ok = false;
        break;
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "200 random scans, max |delta| " << max_delta << ", "
         << format_seconds(elapsed) << " < 10 s";
  report(1, "PQ matches the brute-force reference", ok && elapsed < 10.0,
         detail.str());
}

// --- criterion 2: DBSCAN oracle equivalence ----------------------------

void criterion_dbscan_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> npts(1, 200);
  std::uniform_real_distribution<float> noise(-10.0f, 10.0f);
  std::normal_distribution<float> local(0.0f, 0.4f);
  const std::vector<float> epsilons = {1.2488f, 0.8136f, 0.6952f,
                                       0.594f,  0.4353f, 0.3221f};
  bool ok = true;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const int n = npts(rng);
    Eigen::Matrix<float, Eigen::Dynamic, 3> coords(n, 3);
    std::uniform_real_distribution<float> center(-7.0f, 7.0f);
    const float cx = center(rng), cy = center(rng), cz = center(rng) * 0.1f;
    for (int i = 0; i < n; ++i) {
      if (i % 4 == 0) {
        coords(i, 0) = noise(rng);
        coords(i, 1) = noise(rng);
        coords(i, 2) = noise(rng) * 0.2f;
      } else {
        coords(i, 0) = cx + local(rng);
        coords(i, 1) = cy + local(rng);
        coords(i, 2) = cz + local(rng) * 0.5f;
      }
    }
    for (float eps : epsilons) {
      for (int min_pts : {1, 2, 5, 10}) {
        const auto got = dbscan(coords, eps, min_pts);
        const auto expected = oracle::brute_dbscan(coords, eps, min_pts);
        if (got.size() != expected.size()) {
          ok = false;
          break;
        }
        for (std::size_t c = 0; c < got.size(); ++c) {
          const std::vector<int> as_int(got[c].begin(), got[c].end());
          if (as_int != expected[c]) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (!ok) break;
    }
  }
  const double elapsed = seconds_since(start);
  report(2, "DBSCAN matches the quadratic reachability reference",
         ok && elapsed < 30.0,
         "100 clouds x 6 epsilons x 4 min_pts, exact, " +
             format_seconds(elapsed) + " < 30 s");
}

// --- criterion 3: synthetic end-to-end through the CLI -----------------

void criterion_end_to_end(const std::string& cli) {
  const auto start = Clock::now();
  const fs::path root = fs::temp_directory_path() / "llf_acceptance_scene";
  fs::remove_all(root);
  const testsupport::SyntheticScene scene = testsupport::build_synthetic_scene();
  testsupport::write_scene_assets(scene, root.string());

  {
    std::ofstream cfg(root / "config.json");
    cfg << "{\n"
        << "  \"dataset\": {\"clouds\": \"" << (root / "clouds").string()
        << "\", \"masks\": \"" << (root / "masks").string()
        << "\", \"calib\": \"" << (root / "calib.json").string() << "\"},\n"
        << "  \"output\": \"" << (root / "out").string() << "\",\n"
        << "  \"threads\": 2\n"
        << "}\n";
  }

  const std::string vocab = std::string(LLF_DATA_DIR) + "/vocab_semantic_kitti.json";
  const std::string log = (root / "cli.log").string();
  const std::string cmd_label =
      cli + " pseudo-label --config " + (root / "config.json").string() +
      " >> " + log + " 2>&1";
  const std::string cmd_eval =
      cli + " evaluate --pred " + (root / "out" / "labels" / "scene0.label").string() +
      " --gt " + (root / "gt" / "scene0.label").string() + " --vocab " + vocab +
      " --oracle --merge-stuff --report " + (root / "report.json").string() +
      " >> " + log + " 2>&1";

  bool ok = std::system(cmd_label.c_str()) == 0;
  ok = ok && std::system(cmd_eval.c_str()) == 0;
  double pq = -1.0;
  if (ok) {
    std::ifstream in(root / "report.json");
    nlohmann::json j;
    in >> j;
    pq = j.at("pq").get<double>();
    ok = pq == 100.0;  // exact
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "pseudo-label + evaluate --oracle --merge-stuff, PQ " << pq
         << ", " << format_seconds(elapsed) << " < 5 s";
  report(3, "synthetic scene reaches PQ 100.0 through the CLI",
         ok && elapsed < 5.0, detail.str());
}

// --- criterion 4: refinement recovery ----------------------------------

void criterion_refinement_recovery() {
  const testsupport::SyntheticScene scene = testsupport::build_synthetic_scene();

  // Clean unprojection: one segment per planted entity (entity 0 is road).
  std::vector<LidarSegment> segments =
      unproject_masks(scene.cloud, scene.camera, scene.masks, 1);
  bool ok = segments.size() == scene.entity_points.size();

  // Boundary bleed: 10% of each segment's points transfer to the adjacent
  // object (road bleeds into box 1, box i into box i+1, box 5 into box 1).
  std::vector<std::vector<PointIndex>> corrupted(segments.size());
  std::vector<std::vector<PointIndex>> moved_in(segments.size());
  if (ok) {
    const auto centroid = [&](std::size_t e) {
      Eigen::Vector3f c = Eigen::Vector3f::Zero();
      for (PointIndex p : scene.entity_points[e])
        c += scene.cloud.position(p);
      return Eigen::Vector3f(c / static_cast<float>(scene.entity_points[e].size()));
    };
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const std::size_t target = s == 0 ? 1 : (s % 5) + 1;
      const Eigen::Vector3f t = centroid(target);
      std::vector<PointIndex> pts = segments[s].point_indices;
      std::sort(pts.begin(), pts.end(), [&](PointIndex a, PointIndex b) {
        return (scene.cloud.position(a) - t).squaredNorm() <
               (scene.cloud.position(b) - t).squaredNorm();
      });
      const std::size_t n_move = pts.size() / 10;
      for (std::size_t i = 0; i < pts.size(); ++i)
        (i < n_move ? moved_in[target] : corrupted[s]).push_back(pts[i]);
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
      corrupted[s].insert(corrupted[s].end(), moved_in[s].begin(),
                          moved_in[s].end());
      std::sort(corrupted[s].begin(), corrupted[s].end());
      segments[s].point_indices = corrupted[s];
    }
  }

  // Raw (corrupted) IoU against the planted point sets must fall below 0.95.
  double worst_raw = 1.0;
  if (ok)
    for (std::size_t s = 0; s < segments.size(); ++s) {
      const double iou =
          point_set_iou(segments[s].point_indices, scene.entity_points[s]);
      worst_raw = std::min(worst_raw, iou);
      if (iou >= 0.95) ok = false;
    }

  // Refine against the ensemble at the default overlap threshold.
  const std::vector<Token> tokens_before = [&] {
    std::vector<Token> t;
    for (const LidarSegment& seg : segments) t.push_back(seg.token);
    return t;
  }();
  const std::vector<PointIndex> road_before =
      ok ? segments[0].point_indices : std::vector<PointIndex>{};

  double worst_refined = 1.0;
  if (ok) {
    const auto ground = remove_ground(scene.cloud, 0.2, 200, 1);
    const ClusterPool pool = build_cluster_ensemble(
        scene.cloud, ground,
        {1.2488f, 0.8136f, 0.6952f, 0.594f, 0.4353f, 0.3221f}, 5);
    segments = replace_with_clusters(std::move(segments), pool, 0.5);

    ok = segments.size() == scene.entity_points.size();
    for (std::size_t s = 1; ok && s < segments.size(); ++s) {
      const double iou =
          point_set_iou(segments[s].point_indices, scene.entity_points[s]);
      worst_refined = std::min(worst_refined, iou);
      if (iou < 0.99 || !segments[s].provenance.refined) ok = false;
    }
    // The road segment is never replaced: the ensemble excludes ground.
    if (ok && (segments[0].provenance.refined ||
               segments[0].point_indices != road_before))
      ok = false;
    for (std::size_t s = 0; ok && s < segments.size(); ++s)
      if (!(segments[s].token.array() == tokens_before[s].array()).all())
        ok = false;
  }

  std::ostringstream detail;
  detail << "corrupted IoU <= " << worst_raw << " < 0.95, refined IoU >= "
         << worst_refined << " >= 0.99, road retained";
  report(4, "cluster replacement recovers corrupted segments", ok,
         detail.str());
}

// --- criterion 5: flattening properties --------------------------------

void criterion_flatten_properties() {
  const auto start = Clock::now();
  std::mt19937_64 rng(321);
  std::uniform_int_distribution<int> count(1, 12);
  std::uniform_int_distribution<int> coord(0, 63);
  std::uniform_int_distribution<int> extent(1, 28);
  bool ok = true;

  for (int trial = 0; trial < 1000 && ok; ++trial) {
    ImageMaskSet raw;
    raw.camera_id = 0;
    raw.width = 64;
    raw.height = 48;
    const int n = count(rng);
    for (int m = 0; m < n; ++m) {
      const int x0 = coord(rng) % 50;
      const int y0 = coord(rng) % 34;
      const int w = std::min(extent(rng), 64 - x0);
      const int h = std::min(extent(rng) / 2 + 1, 48 - y0);
      std::vector<std::uint32_t> px;
      for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x)
          px.push_back(static_cast<std::uint32_t>(y * 64 + x));
      ImageMask mask;
      mask.id = m + 1;
      mask.rle = RleMask::from_pixels(std::move(px));
      mask.area = mask.rle.area();
      mask.token = Token::Ones(2);
      raw.masks.push_back(std::move(mask));
    }

    const ImageMaskSet flat = flatten_masks(raw, 0.01);

    // Exhaustive pairwise disjointness on decoded pixels.
    std::set<std::uint32_t> seen;
    for (const ImageMask& m : flat.masks)
      for (std::uint32_t p : m.rle.pixels())
        if (!seen.insert(p).second) ok = false;

    // Largest input mask survives.
    std::uint64_t max_area = 0;
    int max_id = 0;
    for (const ImageMask& m : raw.masks)
      if (m.area > max_area || (m.area == max_area && m.id < max_id)) {
        max_area = m.area;
        max_id = m.id;
      }
    bool largest = false;
    for (const ImageMask& m : flat.masks)
      if (m.id == max_id) largest = true;
    if (!largest) ok = false;

    // Idempotence.
    const ImageMaskSet twice = flatten_masks(flat, 0.01);
    if (twice.masks.size() != flat.masks.size()) ok = false;
    for (std::size_t m = 0; ok && m < flat.masks.size(); ++m)
      if (twice.masks[m].id != flat.masks[m].id ||
          !(twice.masks[m].rle == flat.masks[m].rle))
        ok = false;
  }
  const double elapsed = seconds_since(start);
  report(5, "flattening is disjoint, idempotent, largest mask survives",
         ok && elapsed < 10.0,
         "1000 random hierarchies, " + format_seconds(elapsed) + " < 10 s");
}

// --- criterion 6: zero-shot matching -----------------------------------

void criterion_zero_shot() {
  Vocabulary vocab =
      load_vocabulary(std::string(LLF_DATA_DIR) + "/vocab_semantic_kitti.json");
  bool ok = vocab.classes.size() == 19;

  // Orthonormal synthetic embeddings: basis vector per (class, prompt),
  // repeated across templates.
  const std::size_t prompts = vocab.prompt_count();
  const Eigen::Index dim = 64;
  Eigen::MatrixXf blob(
      static_cast<Eigen::Index>(prompts * vocab.templates.size()), dim);
  blob.setZero();
  Eigen::Index row = 0;
  for (std::size_t p = 0; p < prompts; ++p)
    for (std::size_t t = 0; t < vocab.templates.size(); ++t, ++row)
      blob(row, static_cast<Eigen::Index>(p)) = 1.0f;
  load_prompt_embeddings(vocab, blob);

  // Noiseless tokens (each prompt embedding) classify to their class.
  int correct = 0, total = 0;
  Eigen::Index prompt_row = 0;
  for (const VocabularyClass& c : vocab.classes)
    for (std::size_t p = 0; p < c.prompts.size(); ++p, ++prompt_row) {
      const Token token =
          vocab.prompt_embeddings.row(prompt_row).transpose();
      ++total;
      if (classify_token(token, vocab).argmax_id == c.class_id) ++correct;
    }
  if (correct != total) ok = false;

  // Argmax invariance under token scaling.
  std::mt19937_64 rng(99);
  int invariant = 0;
  for (int i = 0; i < 10000; ++i) {
    const Token t = testsupport::random_token(rng, static_cast<int>(dim));
    const std::uint16_t base = classify_token(t, vocab).argmax_id;
    if (classify_token(Token(0.1 * t), vocab).argmax_id == base &&
        classify_token(Token(100.0 * t), vocab).argmax_id == base)
      ++invariant;
  }
  if (invariant != 10000) ok = false;

  std::ostringstream detail;
  detail << correct << "/" << total << " noiseless tokens correct, "
         << invariant << "/10000 scale-invariant argmaxes";
  report(6, "zero-shot matching on the 19-class vocabulary", ok, detail.str());
}

// --- criterion 7: format round-trips ------------------------------------

void criterion_round_trips() {
  const fs::path root = fs::temp_directory_path() / "llf_acceptance_fmt";
  fs::remove_all(root);
  fs::create_directories(root);

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> word(0, 0xFFFF);
  PanopticLabeling labels;
  labels.semantic.reserve(1000000);
  labels.instance.reserve(1000000);
  for (int i = 0; i < 1000000; ++i) {
    labels.semantic.push_back(static_cast<std::uint16_t>(word(rng)));
    labels.instance.push_back(static_cast<std::uint16_t>(word(rng)));
  }
  const std::string path = (root / "million.label").string();
  write_labels(labels, path);
  const PanopticLabeling back = read_labels(path);
  write_labels(back, (root / "million2.label").string());
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(in), {});
  };
  bool ok = slurp(root / "million.label") == slurp(root / "million2.label") &&
            back.semantic == labels.semantic &&
            back.instance == labels.instance;

  // Mask container: disjoint (PNG id-map) and overlapping (inline runs).
  for (const bool overlapping : {false, true}) {
    ImageMaskSet set;
    set.camera_id = 1;
    set.width = 96;
    set.height = 64;
    for (int m = 0; m < 5; ++m) {
      ImageMask mask;
      mask.id = m + 1;
      std::vector<std::uint32_t> px;
      const int base = overlapping ? m * 40 : m * 96 * 8;
      for (int i = 0; i < 60; ++i)
        px.push_back(static_cast<std::uint32_t>(base + i));
      mask.rle = RleMask::from_pixels(std::move(px));
      mask.area = mask.rle.area();
      mask.token = testsupport::random_token(rng, 16);
      mask.score = 0.1 * m;
      set.masks.push_back(std::move(mask));
    }
    const std::string prefix =
        (root / (overlapping ? "raw" : "flat")).string();
    write_mask_set(set, prefix);
    const ImageMaskSet loaded = read_mask_set(prefix);
    if (loaded.masks.size() != set.masks.size()) ok = false;
    for (std::size_t m = 0; ok && m < set.masks.size(); ++m) {
      if (loaded.masks[m].id != set.masks[m].id) ok = false;
      if (!(loaded.masks[m].rle == set.masks[m].rle)) ok = false;
      if (loaded.masks[m].area != set.masks[m].area) ok = false;
      if (!(loaded.masks[m].token.array() == set.masks[m].token.array()).all())
        ok = false;
    }
  }
  report(7, "label and mask-container round-trips are lossless", ok,
         "1e6 random label words bit-exact; id-map and inline-run containers");
}

// --- criterion 8: statistics --------------------------------------------

void criterion_statistics() {
  const Vocabulary vocab = testsupport::make_test_vocabulary(2, 1);
  LabelStatsAccumulator acc(vocab);
  for (int s = 0; s < 10; ++s) {
    PointCloud cloud;
    cloud.points.resize(80, 4);
    cloud.points.setZero();
    PanopticLabeling l;
    l.resize(80);
    for (int i = 0; i < 30; ++i) {
      l.semantic[static_cast<std::size_t>(i)] = 1;
      l.instance[static_cast<std::size_t>(i)] =
          static_cast<std::uint16_t>(1 + i / 10);
    }
    acc.add_scan(cloud, l);
  }
  const LabelStatsReport r = acc.finalize();
  const bool ok = r.coverage() == 0.375 && r.total_instances == 30 &&
                  r.max_instances == 3 && r.mean_instances() == 3.0;
  std::ostringstream detail;
  detail << "coverage " << r.coverage() << " (exact), total "
         << r.total_instances << ", max " << r.max_instances << ", mean "
         << r.mean_instances();
  report(8, "constructed corpus statistics are exact", ok, detail.str());
}

// --- criterion 9: documented non-reproducibility ------------------------

void criterion_integration_recipe() {
  // Dataset-scale quantities (mask funnel counts, corpus coverage, benchmark
  // PQ) need externally generated masks/tokens and full datasets; the README
  // documents the integration recipe gated on user-supplied assets.
  const fs::path readme = fs::path(LLF_DATA_DIR).parent_path() / "README.md";
  std::ifstream in(readme);
  bool ok = static_cast<bool>(in);
  if (ok) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    ok = text.find("Full-dataset runs") != std::string::npos;
  }
  report(9, "dataset-scale numbers documented as integration-only", ok,
         "README integration recipe present; not desk-reproducible by design");
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  if (cli.empty()) {
    // Default: the CLI binary sits next to this one.
    cli = (fs::path(argv[0]).parent_path() / "llf").string();
  }

  criterion_pq_oracle();
  criterion_dbscan_oracle();
  criterion_end_to_end(cli);
  criterion_refinement_recovery();
  criterion_flatten_properties();
  criterion_zero_shot();
  criterion_round_trips();
  criterion_statistics();
  criterion_integration_recipe();

  if (failures > 0)
    std::cout << failures << " criterion(s) failed\n";
  else
    std::cout << "all criteria passed\n";
  return failures;
}

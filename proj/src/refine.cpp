#include "llf/refine.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <iostream>
#include <random>
#include <unordered_map>

namespace llf {

std::vector<bool> remove_ground(const PointCloud& cloud, double inlier_dist,
                                int max_iters, std::uint64_t seed) {
  const Eigen::Index n = cloud.size();
  std::vector<bool> ground(static_cast<std::size_t>(n), false);
  if (n < 3) return ground;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);

  Eigen::Vector3d best_normal = Eigen::Vector3d::Zero();
  double best_offset = 0.0;
  Eigen::Index best_inliers = -1;

  for (int it = 0; it < max_iters; ++it) {
    const Eigen::Index i0 = pick(rng);
    const Eigen::Index i1 = pick(rng);
    const Eigen::Index i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    const Eigen::Vector3d p0 = cloud.position(i0).cast<double>();
    const Eigen::Vector3d p1 = cloud.position(i1).cast<double>();
    const Eigen::Vector3d p2 = cloud.position(i2).cast<double>();
    Eigen::Vector3d normal = (p1 - p0).cross(p2 - p0);
    const double len = normal.norm();
    if (len < 1e-12) continue;  // collinear sample
    normal /= len;
    const double offset = -normal.dot(p0);

    Eigen::Index inliers = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d =
          normal.dot(cloud.position(i).cast<double>()) + offset;
      if (std::abs(d) <= inlier_dist) ++inliers;
    }
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best_normal = normal;
      best_offset = offset;
    }
  }

  if (best_inliers < 0) {
    std::cerr << "llf: warning: ground fit degenerate on scan '"
              << cloud.scan_id << "', no ground flagged\n";
    return ground;
  }

  if (best_normal.z() < 0.0) {
    best_normal = -best_normal;
    best_offset = -best_offset;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Vector3d p = cloud.position(i).cast<double>();
    const double d = best_normal.dot(p) + best_offset;
    if (std::abs(d) <= inlier_dist && best_normal.dot(p) <= 0.0)
      ground[static_cast<std::size_t>(i)] = true;
  }
  return ground;
}

namespace {

struct CellKey {
  std::int32_t x, y, z;
  bool operator==(const CellKey& o) const {
    return x == o.x && y == o.y && z == o.z;
  }
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint32_t>(k.x);
    h = h * 0x100000001b3ULL ^ static_cast<std::uint32_t>(k.y);
    h = h * 0x100000001b3ULL ^ static_cast<std::uint32_t>(k.z);
    return static_cast<std::size_t>(h);
  }
};

// Distance test in double with a fixed summation order so the voxel-grid
// path and the quadratic reference agree bit for bit at the eps boundary.
using CoordsRef = Eigen::Ref<const Eigen::Matrix<float, Eigen::Dynamic, 3>>;

inline bool within_eps(const CoordsRef& c, Eigen::Index a, Eigen::Index b,
                       double eps_sq) {
  const double dx = static_cast<double>(c(a, 0)) - c(b, 0);
  const double dy = static_cast<double>(c(a, 1)) - c(b, 1);
  const double dz = static_cast<double>(c(a, 2)) - c(b, 2);
  return (dx * dx + dy * dy) + dz * dz <= eps_sq;
}

class VoxelGrid {
 public:
  VoxelGrid(const CoordsRef& coords, float eps)
      // Slack keeps eps-neighbors within one cell of each other despite
      // floating-point division at cell boundaries.
      : coords_(coords), cell_(static_cast<double>(eps) * 1.001) {
    cells_.reserve(static_cast<std::size_t>(coords.rows()));
    for (Eigen::Index i = 0; i < coords.rows(); ++i)
      cells_[key_of(i)].push_back(static_cast<PointIndex>(i));
  }

  // Indices within eps of point i (inclusive, i itself included), ascending.
  std::vector<PointIndex> neighbors(Eigen::Index i, double eps_sq) const {
    const CellKey c = key_of(i);
    std::vector<PointIndex> out;
    for (std::int32_t dx = -1; dx <= 1; ++dx)
      for (std::int32_t dy = -1; dy <= 1; ++dy)
        for (std::int32_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (PointIndex j : it->second)
            if (within_eps(coords_, i, j, eps_sq)) out.push_back(j);
        }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  CellKey key_of(Eigen::Index i) const {
    return {static_cast<std::int32_t>(std::floor(coords_(i, 0) / cell_)),
            static_cast<std::int32_t>(std::floor(coords_(i, 1) / cell_)),
            static_cast<std::int32_t>(std::floor(coords_(i, 2) / cell_))};
  }

  const CoordsRef& coords_;
  double cell_;
  std::unordered_map<CellKey, std::vector<PointIndex>, CellHash> cells_;
};

}  // namespace

std::vector<std::vector<PointIndex>> dbscan(
    const Eigen::Ref<const Eigen::Matrix<float, Eigen::Dynamic, 3>>& coords,
    float eps, int min_pts) {
  if (!(eps > 0.0f)) throw ConfigError("dbscan eps must be positive");
  if (min_pts < 1) throw ConfigError("dbscan min_pts must be >= 1");
  const Eigen::Index n = coords.rows();

  constexpr std::int32_t kUnvisited = -1;
  constexpr std::int32_t kNoise = -2;
  std::vector<std::int32_t> label(static_cast<std::size_t>(n), kUnvisited);
  if (n == 0) return {};

  const double eps_sq = static_cast<double>(eps) * static_cast<double>(eps);
  const VoxelGrid grid(coords, eps);
  std::vector<std::vector<PointIndex>> clusters;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (label[static_cast<std::size_t>(i)] != kUnvisited) continue;
    std::vector<PointIndex> seed = grid.neighbors(i, eps_sq);
    if (seed.size() < static_cast<std::size_t>(min_pts)) {
      label[static_cast<std::size_t>(i)] = kNoise;
      continue;
    }
    const std::int32_t cid = static_cast<std::int32_t>(clusters.size());
    clusters.emplace_back();
    label[static_cast<std::size_t>(i)] = cid;
    clusters.back().push_back(static_cast<PointIndex>(i));

    std::deque<PointIndex> queue(seed.begin(), seed.end());
    while (!queue.empty()) {
      const PointIndex q = queue.front();
      queue.pop_front();
      std::int32_t& lq = label[static_cast<std::size_t>(q)];
      if (lq == cid) continue;
      if (lq >= 0) continue;  // already claimed by an earlier cluster
      const bool was_noise = lq == kNoise;
      lq = cid;
      clusters.back().push_back(q);
      if (was_noise) continue;  // border point: claimed, not expanded
      const std::vector<PointIndex> nb = grid.neighbors(q, eps_sq);
      if (nb.size() >= static_cast<std::size_t>(min_pts))
        queue.insert(queue.end(), nb.begin(), nb.end());
    }
  }

  for (auto& c : clusters) std::sort(c.begin(), c.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

ClusterPool build_cluster_ensemble(const PointCloud& cloud,
                                   const std::vector<bool>& ground_mask,
                                   const std::vector<float>& epsilons,
                                   int min_pts) {
  if (epsilons.empty()) throw ConfigError("epsilon list must be nonempty");
  if (ground_mask.size() != static_cast<std::size_t>(cloud.size()))
    throw DataError("ground mask length does not match scan");

  std::vector<PointIndex> subset;
  for (Eigen::Index i = 0; i < cloud.size(); ++i)
    if (!ground_mask[static_cast<std::size_t>(i)])
      subset.push_back(static_cast<PointIndex>(i));

  Eigen::Matrix<float, Eigen::Dynamic, 3> coords(
      static_cast<Eigen::Index>(subset.size()), 3);
  for (std::size_t r = 0; r < subset.size(); ++r)
    coords.row(static_cast<Eigen::Index>(r)) =
        cloud.points.row(subset[r]).head<3>();

  // Per-epsilon runs are independent; join in epsilon order so the pool is
  // deterministic.
  std::vector<std::future<std::vector<std::vector<PointIndex>>>> runs;
  runs.reserve(epsilons.size());
  for (float eps : epsilons)
    runs.push_back(std::async(std::launch::async, [&coords, eps, min_pts] {
      return dbscan(coords, eps, min_pts);
    }));

  ClusterPool pool;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
  const auto set_hash = [](const std::vector<PointIndex>& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (PointIndex p : v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(p));
      h *= 0x100000001b3ULL;
    }
    return h;
  };

  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    for (auto& local : runs[e].get()) {
      ClusterPool::Cluster cluster;
      cluster.epsilon = epsilons[e];
      cluster.point_indices.reserve(local.size());
      for (PointIndex r : local)
        cluster.point_indices.push_back(subset[static_cast<std::size_t>(r)]);
      auto& bucket = buckets[set_hash(cluster.point_indices)];
      bool dup = false;
      for (std::size_t pos : bucket)
        if (pool.clusters[pos].point_indices == cluster.point_indices) {
          dup = true;
          break;
        }
      if (dup) continue;
      bucket.push_back(pool.clusters.size());
      pool.clusters.push_back(std::move(cluster));
    }
  }
  return pool;
}

namespace {

// Best pool cluster per segment by point-set IoU (ties to the earlier pool
// entry). Returns (pool index, iou); pool index == clusters.size() when the
// pool is empty.
std::pair<std::size_t, double> best_cluster(const LidarSegment& seg,
                                            const ClusterPool& pool) {
  std::size_t best = pool.clusters.size();
  double best_iou = -1.0;
  for (std::size_t c = 0; c < pool.clusters.size(); ++c) {
    const double iou =
        point_set_iou(seg.point_indices, pool.clusters[c].point_indices);
    if (iou > best_iou) {
      best_iou = iou;
      best = c;
    }
  }
  return {best, best_iou};
}

}  // namespace

std::vector<LidarSegment> replace_with_clusters(
    std::vector<LidarSegment> segments, const ClusterPool& pool,
    double overlap) {
  for (LidarSegment& seg : segments) {
    const auto [c, iou] = best_cluster(seg, pool);
    if (c < pool.clusters.size() && iou >= overlap) {
      seg.point_indices = pool.clusters[c].point_indices;
      seg.provenance.refined = true;
    }
  }
  // Segment count is preserved; a segment fully ceded to a larger one stays
  // in the list with an empty point set.
  return resolve_disjoint(std::move(segments), /*drop_empty=*/false);
}

std::vector<LidarSegment> filter_by_clusters(
    const std::vector<LidarSegment>& segments, const ClusterPool& pool,
    double overlap) {
  std::vector<LidarSegment> kept;
  for (const LidarSegment& seg : segments) {
    const auto [c, iou] = best_cluster(seg, pool);
    if (c < pool.clusters.size() && iou >= overlap) kept.push_back(seg);
  }
  return kept;
}

}  // namespace llf

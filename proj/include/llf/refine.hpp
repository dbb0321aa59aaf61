#pragma once

#include "llf/segment.hpp"
#include "llf/types.hpp"

#include <vector>

namespace llf {

// RANSAC plane fit over the full scan. A point is flagged ground when it
// lies within inlier_dist of the best plane and at or below the sensor
// origin along the upward-oriented plane normal. Deterministic for a fixed
// seed. Fewer than 3 points, or a degenerate (collinear) cloud, flags
// nothing and emits a warning on stderr.
std::vector<bool> remove_ground(const PointCloud& cloud, double inlier_dist,
                                int max_iters, std::uint64_t seed);

// Standard DBSCAN over 3D coordinates with Euclidean distance. A core point
// has at least min_pts neighbors within eps (inclusive, itself counted).
// Clusters are the connected components of density reachability; border
// points join the first claiming cluster under ascending-index expansion;
// noise is excluded. Returned clusters are ordered by minimal member index
// and each cluster's indices are ascending. Neighbor queries run on a
// uniform voxel grid of cell size eps (27-cell stencil).
std::vector<std::vector<PointIndex>> dbscan(
    const Eigen::Ref<const Eigen::Matrix<float, Eigen::Dynamic, 3>>& coords,
    float eps, int min_pts);

struct ClusterPool {
  struct Cluster {
    std::vector<PointIndex> point_indices;  // scan-space, sorted
    float epsilon = 0.0f;                   // ensemble member that produced it
  };
  std::vector<Cluster> clusters;
};

// Union of DBSCAN runs over all epsilons on the non-ground points, mapped
// back to scan indices. Clusters with identical point sets are kept once
// (first epsilon wins).
ClusterPool build_cluster_ensemble(const PointCloud& cloud,
                                   const std::vector<bool>& ground_mask,
                                   const std::vector<float>& epsilons,
                                   int min_pts);

// Replaces each segment's point set by its best-matching pool cluster when
// the point-set IoU reaches `overlap`; otherwise the segment stays as-is.
// IoU is computed over raw scan index sets, so ground points count toward
// the segment side only. Tokens and segment count are preserved; a final
// disjointness pass assigns contested points to the larger segment.
std::vector<LidarSegment> replace_with_clusters(
    std::vector<LidarSegment> segments, const ClusterPool& pool,
    double overlap);

// Baseline strategy: keep a segment iff its best pool IoU reaches `overlap`.
std::vector<LidarSegment> filter_by_clusters(
    const std::vector<LidarSegment>& segments, const ClusterPool& pool,
    double overlap);

}  // namespace llf

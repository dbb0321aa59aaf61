#pragma once

#include "llf/types.hpp"

#include <vector>

namespace llf {

// Point-index set helpers. All inputs are sorted unique index vectors.

std::size_t index_intersection_size(const std::vector<PointIndex>& a,
                                    const std::vector<PointIndex>& b);

std::vector<PointIndex> index_union(const std::vector<PointIndex>& a,
                                    const std::vector<PointIndex>& b);

// |a ∩ b| / |a ∪ b|; 0 when both empty.
double point_set_iou(const std::vector<PointIndex>& a,
                     const std::vector<PointIndex>& b);

// Re-establishes pairwise disjointness: every point claimed by several
// segments stays only in the one with the larger original point count
// (ties go to the earlier list position). Segments left empty are removed
// unless drop_empty is false.
std::vector<LidarSegment> resolve_disjoint(std::vector<LidarSegment> segments,
                                           bool drop_empty = true);

// Throws DataError if any index falls outside [0, cloud_size).
void check_segment_bounds(const std::vector<LidarSegment>& segments,
                          Eigen::Index cloud_size);

}  // namespace llf

#pragma once

#include "llf/mask_set.hpp"
#include "llf/segment.hpp"
#include "llf/types.hpp"

namespace llf {

// Lifts a flattened (disjoint) mask set into Lidar segments: every point
// with a valid projection landing inside mask i joins segment i. Segments
// with fewer than min_points points are dropped. Each segment inherits its
// mask token and provenance. Throws DataError when the mask set's camera id
// does not match the camera model.
std::vector<LidarSegment> unproject_masks(const PointCloud& cloud,
                                          const CameraModel& cam,
                                          const ImageMaskSet& masks,
                                          int min_points);

// Cross-camera fusion fold. Each incoming segment merges into the
// accumulated segment of maximal point-set IoU when that IoU reaches
// fusion_iou, otherwise it is inserted as new. A merge unions the point
// sets and replaces the token by the view-count-weighted running mean,
// renormalized to unit length. The result is re-resolved to disjointness
// (contested points go to the larger segment). Call once per camera in
// ascending camera id order; fusion is a fixed-order fold.
std::vector<LidarSegment> fuse_views(std::vector<LidarSegment> accumulated,
                                     const std::vector<LidarSegment>& incoming,
                                     double fusion_iou,
                                     Eigen::Index cloud_size);

}  // namespace llf

#include "llf/unproject.hpp"

#include "llf/geometry.hpp"

#include <algorithm>

namespace llf {

std::vector<LidarSegment> unproject_masks(const PointCloud& cloud,
                                          const CameraModel& cam,
                                          const ImageMaskSet& masks,
                                          int min_points) {
  if (masks.camera_id != cam.camera_id)
    throw DataError("mask set belongs to camera " +
                    std::to_string(masks.camera_id) + ", not camera " +
                    std::to_string(cam.camera_id));
  if (masks.width != cam.width || masks.height != cam.height)
    throw DataError("mask set size " + std::to_string(masks.width) + "x" +
                    std::to_string(masks.height) + " does not match camera " +
                    std::to_string(cam.camera_id));
  masks.validate();

  // Pixel -> mask position lookup; flattened masks are disjoint, so each
  // pixel has at most one owner.
  const std::size_t pixel_count =
      static_cast<std::size_t>(masks.width) * static_cast<std::size_t>(masks.height);
  std::vector<std::int32_t> lookup(pixel_count, -1);
  for (std::size_t m = 0; m < masks.masks.size(); ++m)
    for (const Run& r : masks.masks[m].rle.runs())
      std::fill(lookup.begin() + r.start, lookup.begin() + r.start + r.length,
                static_cast<std::int32_t>(m));

  const auto projections = project_points(cloud, cam);
  std::vector<std::vector<PointIndex>> members(masks.masks.size());
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const PixelProjection& p = projections[static_cast<std::size_t>(i)];
    if (!p.valid) continue;
    const std::int32_t m = lookup[pixel_index(p, masks.width)];
    if (m >= 0) members[static_cast<std::size_t>(m)].push_back(
        static_cast<PointIndex>(i));
  }

  std::vector<LidarSegment> segments;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m].size() < static_cast<std::size_t>(std::max(min_points, 1)))
      continue;
    LidarSegment seg;
    seg.point_indices = std::move(members[m]);  // already ascending
    seg.token = masks.masks[m].token;
    seg.provenance.cameras = {cam.camera_id};
    seg.provenance.mask_ids = {masks.masks[m].id};
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<LidarSegment> fuse_views(std::vector<LidarSegment> accumulated,
                                     const std::vector<LidarSegment>& incoming,
                                     double fusion_iou,
                                     Eigen::Index cloud_size) {
  check_segment_bounds(accumulated, cloud_size);
  check_segment_bounds(incoming, cloud_size);

  for (const LidarSegment& inc : incoming) {
    double best_iou = 0.0;
    std::size_t best = accumulated.size();
    for (std::size_t a = 0; a < accumulated.size(); ++a) {
      const double iou =
          point_set_iou(accumulated[a].point_indices, inc.point_indices);
      if (iou > best_iou) {
        best_iou = iou;
        best = a;
      }
    }
    if (best < accumulated.size() && best_iou >= fusion_iou) {
      LidarSegment& acc = accumulated[best];
      const int n_acc = std::max(acc.provenance.views(), 1);
      const int n_inc = std::max(inc.provenance.views(), 1);
      if (acc.token.size() != inc.token.size())
        throw DataError("token dimensions differ across views: " +
                        std::to_string(acc.token.size()) + " vs " +
                        std::to_string(inc.token.size()));
      Token mean = (static_cast<double>(n_acc) * acc.token +
                    static_cast<double>(n_inc) * inc.token) /
                   static_cast<double>(n_acc + n_inc);
      const double norm = mean.norm();
      if (norm > 0.0) mean /= norm;
      acc.token = std::move(mean);
      acc.point_indices = index_union(acc.point_indices, inc.point_indices);
      acc.provenance.cameras.insert(acc.provenance.cameras.end(),
                                    inc.provenance.cameras.begin(),
                                    inc.provenance.cameras.end());
      acc.provenance.mask_ids.insert(acc.provenance.mask_ids.end(),
                                     inc.provenance.mask_ids.begin(),
                                     inc.provenance.mask_ids.end());
      acc.provenance.refined |= inc.provenance.refined;
    } else {
      accumulated.push_back(inc);
    }
  }
  return resolve_disjoint(std::move(accumulated));
}

}  // namespace llf

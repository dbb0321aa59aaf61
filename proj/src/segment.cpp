#include "llf/segment.hpp"

#include <algorithm>
#include <unordered_map>

namespace llf {

std::size_t index_intersection_size(const std::vector<PointIndex>& a,
                                    const std::vector<PointIndex>& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib)
      ++ia;
    else if (*ib < *ia)
      ++ib;
    else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

std::vector<PointIndex> index_union(const std::vector<PointIndex>& a,
                                    const std::vector<PointIndex>& b) {
  std::vector<PointIndex> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

double point_set_iou(const std::vector<PointIndex>& a,
                     const std::vector<PointIndex>& b) {
  const std::size_t inter = index_intersection_size(a, b);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<LidarSegment> resolve_disjoint(std::vector<LidarSegment> segments,
                                           bool drop_empty) {
  // Owner per point: (original size, list position) decides contested points.
  std::unordered_map<PointIndex, std::size_t> owner;
  const auto wins = [&](std::size_t challenger, std::size_t holder) {
    const std::size_t a = segments[challenger].point_indices.size();
    const std::size_t b = segments[holder].point_indices.size();
    if (a != b) return a > b;
    return challenger < holder;
  };
  for (std::size_t s = 0; s < segments.size(); ++s)
    for (PointIndex p : segments[s].point_indices) {
      auto [it, inserted] = owner.emplace(p, s);
      if (!inserted && wins(s, it->second)) it->second = s;
    }
  std::vector<LidarSegment> out;
  out.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    LidarSegment& seg = segments[s];
    std::vector<PointIndex> kept;
    kept.reserve(seg.point_indices.size());
    for (PointIndex p : seg.point_indices)
      if (owner[p] == s) kept.push_back(p);
    if (kept.empty() && drop_empty) continue;
    seg.point_indices = std::move(kept);
    out.push_back(std::move(seg));
  }
  return out;
}

void check_segment_bounds(const std::vector<LidarSegment>& segments,
                          Eigen::Index cloud_size) {
  for (const LidarSegment& seg : segments)
    for (PointIndex p : seg.point_indices)
      if (p < 0 || p >= cloud_size)
        throw DataError("segment point index " + std::to_string(p) +
                        " outside scan of " + std::to_string(cloud_size) +
                        " points");
}

}  // namespace llf

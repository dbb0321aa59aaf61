#pragma once

#include "llf/types.hpp"

#include <vector>

namespace llf {

// Minimum camera-frame depth for a point to be considered in front of the
// camera.
inline constexpr double kDepthEpsilon = 1e-6;

struct PixelProjection {
  bool valid = false;
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // camera-frame depth in meters
};

// Perspective projection of every point: pixel = P * T * (x, y, z, 1) after
// perspective division. A point is valid iff its camera-frame depth exceeds
// kDepthEpsilon and floor(u) in [0, W), floor(v) in [0, H). Pixel binning is
// floor-based.
std::vector<PixelProjection> project_points(const PointCloud& cloud,
                                            const CameraModel& cam);

// Row-major pixel index of a valid projection.
inline std::uint32_t pixel_index(const PixelProjection& p, int width) {
  return static_cast<std::uint32_t>(std::floor(p.v)) *
             static_cast<std::uint32_t>(width) +
         static_cast<std::uint32_t>(std::floor(p.u));
}

// True for points visible in at least one camera.
std::vector<bool> frustum_filter(const PointCloud& cloud,
                                 const std::vector<CameraModel>& cameras);

}  // namespace llf

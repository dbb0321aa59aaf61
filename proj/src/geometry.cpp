#include "llf/geometry.hpp"

#include <cmath>

namespace llf {

std::vector<PixelProjection> project_points(const PointCloud& cloud,
                                            const CameraModel& cam) {
  cam.validate();
  const Matrix34d full = cam.projection * cam.lidar_to_cam;
  const Eigen::Matrix<double, 1, 4> depth_row = cam.lidar_to_cam.row(2);

  std::vector<PixelProjection> out(static_cast<std::size_t>(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    Eigen::Vector4d p;
    p << cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2), 1.0;
    const double depth = depth_row.dot(p);
    PixelProjection& proj = out[static_cast<std::size_t>(i)];
    proj.depth = depth;
    if (!(depth > kDepthEpsilon)) continue;
    const Eigen::Vector3d h = full * p;
    if (h.z() <= 0.0) continue;
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    const double col = std::floor(u);
    const double row = std::floor(v);
    if (col < 0.0 || col >= cam.width || row < 0.0 || row >= cam.height)
      continue;
    proj.valid = true;
    proj.u = u;
    proj.v = v;
  }
  return out;
}

std::vector<bool> frustum_filter(const PointCloud& cloud,
                                 const std::vector<CameraModel>& cameras) {
  std::vector<bool> keep(static_cast<std::size_t>(cloud.size()), false);
  for (const CameraModel& cam : cameras) {
    const auto proj = project_points(cloud, cam);
    for (std::size_t i = 0; i < proj.size(); ++i)
      if (proj[i].valid) keep[i] = true;
  }
  return keep;
}

}  // namespace llf

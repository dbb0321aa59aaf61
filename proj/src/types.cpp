#include "llf/types.hpp"

#include <cmath>
#include <unordered_map>

namespace llf {

void CameraModel::validate() const {
  if (width <= 0 || height <= 0)
    throw DataError("camera " + std::to_string(camera_id) +
                    ": image size must be positive");
  const Eigen::Matrix3d r = lidar_to_cam.topLeftCorner<3, 3>();
  const double err = (r * r.transpose() - Eigen::Matrix3d::Identity())
                         .cwiseAbs()
                         .maxCoeff();
  if (!(err <= 1e-6))
    throw DataError("camera " + std::to_string(camera_id) +
                    ": lidar_to_cam rotation not orthonormal (deviation " +
                    std::to_string(err) + ")");
  if (!lidar_to_cam.allFinite() || !projection.allFinite())
    throw DataError("camera " + std::to_string(camera_id) +
                    ": non-finite calibration entries");
}

void PanopticLabeling::validate() const {
  if (semantic.size() != instance.size())
    throw DataError("labeling channels misaligned: " +
                    std::to_string(semantic.size()) + " vs " +
                    std::to_string(instance.size()));
  std::unordered_map<std::uint16_t, std::uint16_t> owner;
  for (std::size_t i = 0; i < instance.size(); ++i) {
    if (instance[i] == 0) continue;
    auto [it, inserted] = owner.emplace(instance[i], semantic[i]);
    if (!inserted && it->second != semantic[i])
      throw DataError("instance " + std::to_string(instance[i]) +
                      " spans semantic ids " + std::to_string(it->second) +
                      " and " + std::to_string(semantic[i]));
  }
}

}  // namespace llf

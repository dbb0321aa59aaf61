#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace llf {

// Error taxonomy maps onto CLI exit codes: ConfigError -> 1, DataError -> 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed on-disk content. Messages should name the offending byte offset
// where one exists.
struct FormatError : DataError {
  using DataError::DataError;
};

using Matrix34d = Eigen::Matrix<double, 3, 4>;
// One point per row: x, y, z [m], intensity.
using PointMatrix = Eigen::Matrix<float, Eigen::Dynamic, 4>;
// Tokens are float32 on disk but double in memory: fused tokens must hold
// unit norm to 1e-9, which float32 storage cannot express.
using Token = Eigen::VectorXd;
using PointIndex = std::int32_t;

struct PointCloud {
  PointMatrix points;
  std::string scan_id;

  Eigen::Index size() const { return points.rows(); }
  auto positions() const { return points.leftCols<3>(); }
  Eigen::Vector3f position(Eigen::Index i) const {
    return points.row(i).head<3>().transpose();
  }
};

struct CameraModel {
  Matrix34d projection = Matrix34d::Zero();           // pixel units
  Eigen::Matrix4d lidar_to_cam = Eigen::Matrix4d::Identity();
  int width = 0;
  int height = 0;
  int camera_id = 0;

  // Throws DataError unless the rotation block is orthonormal within 1e-6
  // and the image size is positive.
  void validate() const;
};

struct SegmentProvenance {
  // One entry per contributing image mask; `cameras` and `mask_ids` are
  // parallel.
  std::vector<int> cameras;
  std::vector<int> mask_ids;
  bool refined = false;

  int views() const { return static_cast<int>(mask_ids.size()); }
};

struct LidarSegment {
  std::vector<PointIndex> point_indices;  // sorted, unique, < N of the scan
  Token token;
  SegmentProvenance provenance;

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(point_indices.size());
  }
};

// Per-point (semantic, instance) labels. 0 is void / no-instance in the
// respective channel.
struct PanopticLabeling {
  std::vector<std::uint16_t> semantic;
  std::vector<std::uint16_t> instance;

  std::size_t size() const { return semantic.size(); }
  void resize(std::size_t n) {
    semantic.assign(n, 0);
    instance.assign(n, 0);
  }
  bool labeled(std::size_t i) const {
    return semantic[i] != 0 || instance[i] != 0;
  }

  // Checks channel alignment and that every nonzero instance id carries a
  // single semantic id (class-pure instances). Throws DataError.
  void validate() const;
};

}  // namespace llf

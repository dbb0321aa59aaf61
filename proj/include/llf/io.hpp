#pragma once

#include "llf/mask_set.hpp"
#include "llf/types.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace llf {

// Lidar scan: 4 little-endian float32 per point (x, y, z, intensity).
PointCloud load_point_cloud(const std::string& path);
void save_point_cloud(const PointCloud& cloud, const std::string& path);

// Label file: one little-endian uint32 per point; low 16 bits semantic,
// high 16 bits instance. write ∘ read is bit-exact.
PanopticLabeling read_labels(const std::string& path);
void write_labels(const PanopticLabeling& labeling, const std::string& path);

inline std::uint32_t pack_label(std::uint16_t semantic, std::uint16_t instance) {
  return static_cast<std::uint32_t>(semantic) |
         (static_cast<std::uint32_t>(instance) << 16);
}

// KITTI-convention text calibration: rows "P<k>: <12 floats>" and
// "Tr: <12 floats>". The text format carries no image sizes, so they are
// supplied by the caller and shared by all cameras.
std::vector<CameraModel> load_calibration_kitti(const std::string& path,
                                                int width, int height);

// JSON alternative carrying per-camera projection (3x4 row-major),
// lidar_to_cam (4x4 row-major) and image sizes.
std::vector<CameraModel> load_calibration_json(const std::string& path);

// Dispatches on the ".json" extension.
std::vector<CameraModel> load_calibration(const std::string& path, int width,
                                          int height);

// Token blob: little-endian float32 rows plus a small JSON header
// ("<path>.json") carrying row count and dimension.
Eigen::MatrixXf read_token_blob(const std::string& path);
void write_token_blob(const Eigen::MatrixXf& rows, const std::string& path);

// Mask container: 16-bit PNG id-map (0 = background) named
// "<prefix>.png", sidecar "<prefix>.json" mapping mask_id to
// {area, token_row, score}, and the mask tokens in "<prefix>.tokens.bin".
ImageMaskSet read_mask_set(const std::string& prefix);
void write_mask_set(const ImageMaskSet& set, const std::string& prefix);

// 16-bit grayscale PNG helpers used by the mask container.
void write_png16(const std::string& path, const std::vector<std::uint16_t>& pixels,
                 int width, int height);
std::vector<std::uint16_t> read_png16(const std::string& path, int& width,
                                      int& height);

enum class PlyColorChannel { kInstance, kSemantic };

// Colored point cloud export; colors come from a fixed hash palette so the
// same ids always render the same. Byte-identical across reruns.
void export_ply(const PointCloud& cloud, const PanopticLabeling& labeling,
                const std::string& path,
                PlyColorChannel channel = PlyColorChannel::kInstance,
                bool binary = false);
void export_ply(const PointCloud& cloud,
                const std::vector<LidarSegment>& segments,
                const std::string& path, bool binary = false);

// Deterministic id -> RGB used by export_ply.
std::array<std::uint8_t, 3> palette_color(std::uint32_t id);

}  // namespace llf

#include "llf/augment.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace llf {

namespace {

void check_aligned(const PointCloud& cloud, const PanopticLabeling& labeling) {
  if (labeling.size() != static_cast<std::size_t>(cloud.size()))
    throw DataError("labeling length " + std::to_string(labeling.size()) +
                    " does not match cloud of " + std::to_string(cloud.size()) +
                    " points");
}

}  // namespace

CropResult crop_unlabeled(const PointCloud& cloud,
                          const PanopticLabeling& labeling) {
  check_aligned(cloud, labeling);
  CropResult result;
  for (std::size_t i = 0; i < labeling.size(); ++i)
    if (labeling.labeled(i))
      result.kept_indices.push_back(static_cast<PointIndex>(i));

  result.cloud.scan_id = cloud.scan_id;
  result.cloud.points.resize(static_cast<Eigen::Index>(result.kept_indices.size()), 4);
  result.labeling.semantic.reserve(result.kept_indices.size());
  result.labeling.instance.reserve(result.kept_indices.size());
  for (std::size_t n = 0; n < result.kept_indices.size(); ++n) {
    const std::size_t old = static_cast<std::size_t>(result.kept_indices[n]);
    result.cloud.points.row(static_cast<Eigen::Index>(n)) =
        cloud.points.row(static_cast<Eigen::Index>(old));
    result.labeling.semantic.push_back(labeling.semantic[old]);
    result.labeling.instance.push_back(labeling.instance[old]);
  }
  return result;
}

namespace {

// Circular extent of a set of azimuths: 2π minus the largest angular gap
// between neighbors (wrap included).
double circular_extent(std::vector<double> azimuths) {
  if (azimuths.empty()) return 0.0;
  if (azimuths.size() == 1) return 0.0;
  std::sort(azimuths.begin(), azimuths.end());
  double max_gap =
      azimuths.front() + 2.0 * std::numbers::pi - azimuths.back();
  for (std::size_t i = 1; i < azimuths.size(); ++i)
    max_gap = std::max(max_gap, azimuths[i] - azimuths[i - 1]);
  return 2.0 * std::numbers::pi - max_gap;
}

}  // namespace

LabeledCloud franken_frustum(const PointCloud& cloud,
                             const PanopticLabeling& labeling,
                             const FrankenParams& params) {
  check_aligned(cloud, labeling);
  const CropResult labeled = crop_unlabeled(cloud, labeling);
  if (labeled.kept_indices.empty())
    throw DataError("franken_frustum requires at least one labeled point");

  std::vector<double> azimuths;
  azimuths.reserve(labeled.kept_indices.size());
  for (Eigen::Index i = 0; i < labeled.cloud.size(); ++i)
    azimuths.push_back(
        std::atan2(static_cast<double>(labeled.cloud.points(i, 1)),
                   static_cast<double>(labeled.cloud.points(i, 0))));
  const double extent = circular_extent(std::move(azimuths));

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (extent >= kTwoPi) return {cloud, labeling};

  // A degenerate extent (all labeled points at one azimuth) would ask for an
  // unbounded replica count; one degree is the floor.
  constexpr double kMinExtent = std::numbers::pi / 180.0;
  const int replicas =
      static_cast<int>(std::floor(kTwoPi / std::max(extent, kMinExtent)));

  std::uint16_t max_instance = 0;
  for (std::uint16_t id : labeled.labeling.instance)
    max_instance = std::max(max_instance, id);
  if (static_cast<std::int64_t>(replicas) * max_instance > 0xFFFF)
    throw DataError("replicating would exceed 65535 instance ids (" +
                    std::to_string(replicas) + " replicas x " +
                    std::to_string(max_instance) + " instances)");

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> jitter(
      -params.jitter_deg * std::numbers::pi / 180.0,
      params.jitter_deg * std::numbers::pi / 180.0);

  const Eigen::Index n = labeled.cloud.size();
  LabeledCloud out;
  out.cloud.scan_id = cloud.scan_id;
  out.cloud.points.resize(n * replicas, 4);
  out.labeling.semantic.reserve(static_cast<std::size_t>(n) * replicas);
  out.labeling.instance.reserve(static_cast<std::size_t>(n) * replicas);

  for (int j = 0; j < replicas; ++j) {
    double angle = 0.0;
    if (j > 0) angle = j * extent + jitter(rng);
    const Eigen::Rotation2Dd rot(angle);
    const Eigen::Matrix2d r = rot.toRotationMatrix();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Vector2d xy =
          r * labeled.cloud.points.row(i).head<2>().transpose().cast<double>();
      Eigen::Index row = static_cast<Eigen::Index>(j) * n + i;
      out.cloud.points(row, 0) = static_cast<float>(xy.x());
      out.cloud.points(row, 1) = static_cast<float>(xy.y());
      out.cloud.points(row, 2) = labeled.cloud.points(i, 2);
      out.cloud.points(row, 3) = labeled.cloud.points(i, 3);
    }
    const std::uint32_t offset = static_cast<std::uint32_t>(j) * max_instance;
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      out.labeling.semantic.push_back(labeled.labeling.semantic[i]);
      const std::uint16_t inst = labeled.labeling.instance[i];
      out.labeling.instance.push_back(
          inst == 0 ? 0 : static_cast<std::uint16_t>(inst + offset));
    }
  }
  return out;
}

LabeledCloud mix_scans(const PointCloud& cloud_a,
                       const PanopticLabeling& labeling_a,
                       const PointCloud& cloud_b,
                       const PanopticLabeling& labeling_b,
                       std::uint64_t /*seed: mixing itself is deterministic*/) {
  check_aligned(cloud_a, labeling_a);
  check_aligned(cloud_b, labeling_b);

  std::uint16_t offset = 0;
  for (std::uint16_t id : labeling_a.instance) offset = std::max(offset, id);
  std::uint16_t max_b = 0;
  for (std::uint16_t id : labeling_b.instance) max_b = std::max(max_b, id);
  if (static_cast<std::uint32_t>(offset) + max_b > 0xFFFF)
    throw DataError("mixed scan would exceed 65535 instance ids");

  LabeledCloud out;
  out.cloud.scan_id = cloud_a.scan_id;
  out.cloud.points.resize(cloud_a.size() + cloud_b.size(), 4);
  out.cloud.points.topRows(cloud_a.size()) = cloud_a.points;
  out.cloud.points.bottomRows(cloud_b.size()) = cloud_b.points;

  out.labeling.semantic = labeling_a.semantic;
  out.labeling.instance = labeling_a.instance;
  out.labeling.semantic.insert(out.labeling.semantic.end(),
                               labeling_b.semantic.begin(),
                               labeling_b.semantic.end());
  for (std::uint16_t id : labeling_b.instance)
    out.labeling.instance.push_back(
        id == 0 ? 0 : static_cast<std::uint16_t>(id + offset));
  return out;
}

PointCloud spatial_augment(const PointCloud& cloud,
                           const SpatialAugmentParams& params) {
  if (!(params.scale_range[0] > 0.0) || !(params.scale_range[1] > 0.0))
    throw ConfigError("scale range must be positive");
  if (params.rot_z_range[0] > params.rot_z_range[1] ||
      params.scale_range[0] > params.scale_range[1] ||
      params.translate_range[0] > params.translate_range[1])
    throw ConfigError("augmentation ranges must be ordered (lo <= hi)");

  std::mt19937_64 rng(params.seed);
  const auto draw = [&rng](const std::array<double, 2>& range) {
    if (range[0] == range[1]) return range[0];
    return std::uniform_real_distribution<double>(range[0], range[1])(rng);
  };

  const double angle = draw(params.rot_z_range);
  std::array<bool, 3> flip = {false, false, false};
  std::bernoulli_distribution coin(0.5);
  for (int a = 0; a < 3; ++a)
    if (params.flip_axes[static_cast<std::size_t>(a)]) flip[static_cast<std::size_t>(a)] = coin(rng);
  const double scale = draw(params.scale_range);
  Eigen::Vector3d translation;
  for (int a = 0; a < 3; ++a) translation(a) = draw(params.translate_range);

  // Rotate about z, flip in the rotated frame, then scale.
  Eigen::Matrix3d transform =
      Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  for (int a = 0; a < 3; ++a)
    if (flip[static_cast<std::size_t>(a)]) transform.row(a) *= -1.0;
  transform = scale * transform;

  PointCloud out;
  out.scan_id = cloud.scan_id;
  out.points = cloud.points;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = cloud.position(i).cast<double>();
    const Eigen::Vector3d q = transform * p + translation;
    out.points(i, 0) = static_cast<float>(q.x());
    out.points(i, 1) = static_cast<float>(q.y());
    out.points(i, 2) = static_cast<float>(q.z());
  }
  return out;
}

}  // namespace llf

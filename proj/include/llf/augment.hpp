#pragma once

#include "llf/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace llf {

struct LabeledCloud {
  PointCloud cloud;
  PanopticLabeling labeling;
};

struct CropResult {
  PointCloud cloud;
  PanopticLabeling labeling;
  // kept_indices[new] = old index; the remap table back into the source.
  std::vector<PointIndex> kept_indices;
};

// Keeps points with nonzero semantic or nonzero instance label.
CropResult crop_unlabeled(const PointCloud& cloud,
                          const PanopticLabeling& labeling);

struct FrankenParams {
  double jitter_deg = 5.0;
  std::uint64_t seed = 0;
};

// Replicates the labeled frustum around the vertical axis: the circular
// azimuth extent θ of the labeled points yields r = floor(2π/θ) replicas,
// replica j rotated by j·θ plus uniform jitter within ±jitter_deg (the
// original is replica 0 and stays unrotated). Instance ids are offset per
// replica so replicas never share ids. Labeled regions spanning the full
// circle return the input unchanged.
LabeledCloud franken_frustum(const PointCloud& cloud,
                             const PanopticLabeling& labeling,
                             const FrankenParams& params);

// Concatenates two labeled clouds; b's instance ids are offset past a's
// maximum. Throws DataError when the combined ids would overflow 16 bits.
LabeledCloud mix_scans(const PointCloud& cloud_a,
                       const PanopticLabeling& labeling_a,
                       const PointCloud& cloud_b,
                       const PanopticLabeling& labeling_b, std::uint64_t seed);

struct SpatialAugmentParams {
  std::array<double, 2> rot_z_range = {0.0, 0.0};  // radians
  std::array<bool, 3> flip_axes = {false, false, false};
  std::array<double, 2> scale_range = {1.0, 1.0};
  std::array<double, 2> translate_range = {0.0, 0.0};  // meters, per axis
  std::uint64_t seed = 0;
};

// Rigid + scale transform on coordinates only (rotate about z, then flips,
// then scale, then translate); labels and intensity untouched. Deterministic
// for a fixed seed. Throws ConfigError for non-positive scales.
PointCloud spatial_augment(const PointCloud& cloud,
                           const SpatialAugmentParams& params);

}  // namespace llf

#pragma once

#include "llf/mask_set.hpp"

namespace llf {

enum class SuppressionOrder { kByArea, kByScore };

// Area-priority non-maximum suppression over a raw (possibly overlapping)
// mask hierarchy. Masks are visited by descending area (kByArea, the
// default) or descending score (kByScore, kept for the ablation variant);
// a mask survives iff its IoU against every already-kept mask stays below
// nms_iou. Surviving masks are then clipped to strict disjointness: each
// contested pixel goes to the kept mask with the larger input area, ties to
// the lower mask id. Tokens pass through unchanged; areas are recomputed
// from the clipped masks and empty masks are dropped.
ImageMaskSet flatten_masks(const ImageMaskSet& raw, double nms_iou,
                           SuppressionOrder order = SuppressionOrder::kByArea);

}  // namespace llf

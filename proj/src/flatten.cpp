#include "llf/flatten.hpp"

#include <algorithm>
#include <numeric>

namespace llf {

ImageMaskSet flatten_masks(const ImageMaskSet& raw, double nms_iou,
                           SuppressionOrder order) {
  if (!(nms_iou > 0.0 && nms_iou <= 1.0))
    throw ConfigError("nms_iou must lie in (0, 1], got " +
                      std::to_string(nms_iou));
  raw.validate();

  std::vector<std::size_t> visit(raw.masks.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});
  std::sort(visit.begin(), visit.end(), [&](std::size_t a, std::size_t b) {
    const ImageMask& ma = raw.masks[a];
    const ImageMask& mb = raw.masks[b];
    if (order == SuppressionOrder::kByScore && ma.score != mb.score)
      return ma.score > mb.score;
    if (ma.area != mb.area) return ma.area > mb.area;
    return ma.id < mb.id;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : visit) {
    bool keep = true;
    for (std::size_t k : kept)
      if (mask_iou(raw.masks[idx].rle, raw.masks[k].rle) >= nms_iou) {
        keep = false;
        break;
      }
    if (keep) kept.push_back(idx);
  }

  // Clip survivors to strict disjointness. Painting in ascending priority
  // lets the higher-priority mask (larger area, then lower id) overwrite
  // contested pixels last.
  std::vector<std::size_t> paint = kept;
  std::sort(paint.begin(), paint.end(), [&](std::size_t a, std::size_t b) {
    const ImageMask& ma = raw.masks[a];
    const ImageMask& mb = raw.masks[b];
    if (ma.area != mb.area) return ma.area < mb.area;
    return ma.id > mb.id;
  });
  const std::size_t pixel_count =
      static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height);
  std::vector<std::int32_t> idmap(pixel_count, -1);
  for (std::size_t idx : paint)
    for (const Run& r : raw.masks[idx].rle.runs())
      std::fill(idmap.begin() + r.start, idmap.begin() + r.start + r.length,
                static_cast<std::int32_t>(idx));

  ImageMaskSet out;
  out.camera_id = raw.camera_id;
  out.width = raw.width;
  out.height = raw.height;
  for (std::size_t idx : kept) {
    std::vector<std::uint32_t> pixels;
    for (const Run& r : raw.masks[idx].rle.runs())
      for (std::uint32_t p = r.start; p < r.start + r.length; ++p)
        if (idmap[p] == static_cast<std::int32_t>(idx)) pixels.push_back(p);
    if (pixels.empty()) continue;
    ImageMask m;
    m.id = raw.masks[idx].id;
    m.rle = RleMask::from_pixels(std::move(pixels));
    m.area = m.rle.area();
    m.token = raw.masks[idx].token;
    m.score = raw.masks[idx].score;
    out.masks.push_back(std::move(m));
  }
  std::sort(out.masks.begin(), out.masks.end(),
            [](const ImageMask& a, const ImageMask& b) {
              if (a.area != b.area) return a.area > b.area;
              return a.id < b.id;
            });
  return out;
}

}  // namespace llf

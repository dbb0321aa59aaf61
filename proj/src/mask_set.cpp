#include "llf/mask_set.hpp"

namespace llf {

void ImageMaskSet::validate() const {
  const std::uint64_t bound =
      static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
  for (const ImageMask& m : masks) {
    if (m.rle.pixel_end() > bound)
      throw DataError("mask " + std::to_string(m.id) + " exceeds image bounds (" +
                      std::to_string(m.rle.pixel_end()) + " > " +
                      std::to_string(bound) + ")");
    if (m.area != m.rle.area())
      throw DataError("mask " + std::to_string(m.id) + " area field " +
                      std::to_string(m.area) + " != decoded pixel count " +
                      std::to_string(m.rle.area()));
    if (m.id <= 0)
      throw DataError("mask ids must be positive, got " + std::to_string(m.id));
  }
}

}  // namespace llf

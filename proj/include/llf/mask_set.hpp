#pragma once

#include "llf/rle.hpp"
#include "llf/types.hpp"

#include <string>
#include <vector>

namespace llf {

struct ImageMask {
  int id = 0;  // nonzero; 0 is background in the id-map
  RleMask rle;
  std::uint64_t area = 0;
  Token token;
  // Optional objectness score; only consulted by score-ordered suppression.
  double score = 0.0;
};

// Masks over one camera image. Raw sets may overlap; flattened sets are
// pairwise disjoint.
struct ImageMaskSet {
  int camera_id = 0;
  int width = 0;
  int height = 0;
  std::vector<ImageMask> masks;

  // Throws DataError if any run exceeds width*height or an area field does
  // not match its decoded pixel count.
  void validate() const;
};

}  // namespace llf

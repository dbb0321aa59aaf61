#pragma once

#include <cstdint>
#include <vector>

namespace llf {

// Half-open run [start, start + length) over row-major pixel indices.
struct Run {
  std::uint32_t start = 0;
  std::uint32_t length = 0;
};

// Sorted, non-adjacent, non-overlapping runs describing a binary mask.
class RleMask {
 public:
  RleMask() = default;

  // Normalizes arbitrary runs: sorts, merges overlaps and adjacency.
  static RleMask from_runs(std::vector<Run> runs);
  // Pixels need not be sorted or unique.
  static RleMask from_pixels(std::vector<std::uint32_t> pixels);
  // Nonzero bytes are foreground.
  static RleMask from_bitmap(const std::uint8_t* data, std::size_t n);

  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }
  std::uint64_t area() const;
  // One past the highest covered pixel; 0 for an empty mask.
  std::uint32_t pixel_end() const;
  bool contains(std::uint32_t pixel) const;
  std::vector<std::uint32_t> pixels() const;

  bool operator==(const RleMask& other) const { return runs_ == other.runs_; }

 private:
  std::vector<Run> runs_;
};

inline bool operator==(const Run& a, const Run& b) {
  return a.start == b.start && a.length == b.length;
}

std::uint64_t intersection_area(const RleMask& a, const RleMask& b);

// |a ∩ b| / |a ∪ b|; 0 when both masks are empty.
double mask_iou(const RleMask& a, const RleMask& b);

}  // namespace llf

#include "llf/rle.hpp"

#include <algorithm>

namespace llf {

RleMask RleMask::from_runs(std::vector<Run> runs) {
  std::erase_if(runs, [](const Run& r) { return r.length == 0; });
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
    return a.start < b.start;
  });
  RleMask mask;
  for (const Run& r : runs) {
    if (!mask.runs_.empty()) {
      Run& last = mask.runs_.back();
      const std::uint64_t last_end =
          static_cast<std::uint64_t>(last.start) + last.length;
      if (r.start <= last_end) {
        const std::uint64_t end =
            std::max(last_end, static_cast<std::uint64_t>(r.start) + r.length);
        last.length = static_cast<std::uint32_t>(end - last.start);
        continue;
      }
    }
    mask.runs_.push_back(r);
  }
  return mask;
}

RleMask RleMask::from_pixels(std::vector<std::uint32_t> pixels) {
  std::sort(pixels.begin(), pixels.end());
  pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
  RleMask mask;
  for (std::uint32_t p : pixels) {
    if (!mask.runs_.empty() &&
        mask.runs_.back().start + mask.runs_.back().length == p) {
      ++mask.runs_.back().length;
    } else {
      mask.runs_.push_back({p, 1});
    }
  }
  return mask;
}

RleMask RleMask::from_bitmap(const std::uint8_t* data, std::size_t n) {
  RleMask mask;
  std::size_t i = 0;
  while (i < n) {
    while (i < n && data[i] == 0) ++i;
    if (i == n) break;
    const std::size_t start = i;
    while (i < n && data[i] != 0) ++i;
    mask.runs_.push_back({static_cast<std::uint32_t>(start),
                          static_cast<std::uint32_t>(i - start)});
  }
  return mask;
}

std::uint64_t RleMask::area() const {
  std::uint64_t a = 0;
  for (const Run& r : runs_) a += r.length;
  return a;
}

std::uint32_t RleMask::pixel_end() const {
  if (runs_.empty()) return 0;
  return runs_.back().start + runs_.back().length;
}

bool RleMask::contains(std::uint32_t pixel) const {
  auto it = std::upper_bound(
      runs_.begin(), runs_.end(), pixel,
      [](std::uint32_t p, const Run& r) { return p < r.start; });
  if (it == runs_.begin()) return false;
  --it;
  return pixel < it->start + it->length;
}

std::vector<std::uint32_t> RleMask::pixels() const {
  std::vector<std::uint32_t> out;
  out.reserve(static_cast<std::size_t>(area()));
  for (const Run& r : runs_)
    for (std::uint32_t i = 0; i < r.length; ++i) out.push_back(r.start + i);
  return out;
}

std::uint64_t intersection_area(const RleMask& a, const RleMask& b) {
  std::uint64_t inter = 0;
  auto ia = a.runs().begin();
  auto ib = b.runs().begin();
  while (ia != a.runs().end() && ib != b.runs().end()) {
    const std::uint64_t lo = std::max<std::uint64_t>(ia->start, ib->start);
    const std::uint64_t hi =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(ia->start) + ia->length,
                                static_cast<std::uint64_t>(ib->start) + ib->length);
    if (lo < hi) inter += hi - lo;
    const std::uint64_t end_a = static_cast<std::uint64_t>(ia->start) + ia->length;
    const std::uint64_t end_b = static_cast<std::uint64_t>(ib->start) + ib->length;
    if (end_a <= end_b)
      ++ia;
    else
      ++ib;
  }
  return inter;
}

double mask_iou(const RleMask& a, const RleMask& b) {
  const std::uint64_t inter = intersection_area(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace llf

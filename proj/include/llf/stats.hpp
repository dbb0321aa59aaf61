#pragma once

#include "llf/types.hpp"
#include "llf/zeroshot.hpp"

#include <map>
#include <string>
#include <vector>

namespace llf {

struct LabelStatsReport {
  int scans = 0;
  std::int64_t total_points = 0;
  std::int64_t labeled_points = 0;
  std::int64_t total_instances = 0;
  std::int64_t max_instances = 0;
  std::int64_t thing_instances = 0;
  std::int64_t stuff_instances = 0;
  // Instances whose semantic channel is void (class-agnostic labels).
  std::int64_t unclassified_instances = 0;
  std::map<std::uint16_t, std::int64_t> per_class_instances;

  double coverage() const {
    return total_points > 0
               ? static_cast<double>(labeled_points) / static_cast<double>(total_points)
               : 0.0;
  }
  double mean_instances() const {
    return scans > 0 ? static_cast<double>(total_instances) / scans : 0.0;
  }
  // #things / #stuff; 0 when no stuff instances were seen.
  double things_stuff_ratio() const {
    return stuff_instances > 0 ? static_cast<double>(thing_instances) /
                                     static_cast<double>(stuff_instances)
                               : 0.0;
  }
};

// Streaming reduction over (scan, labeling) pairs. An instance is a
// distinct (semantic, instance != 0) pair; a stuff class whose labeled
// points carry no instance ids still counts once per scan, matching the
// merged-stuff convention of dataset ground truth. The optional frustum
// mask restricts all counts to masked-in points.
class LabelStatsAccumulator {
 public:
  explicit LabelStatsAccumulator(const Vocabulary& vocab) : vocab_(&vocab) {}

  void add_scan(const PointCloud& cloud, const PanopticLabeling& labeling,
                const std::vector<bool>* frustum_mask = nullptr);
  LabelStatsReport finalize() const { return report_; }

 private:
  const Vocabulary* vocab_;
  LabelStatsReport report_;
};

std::string stats_to_json(const LabelStatsReport& report,
                          const Vocabulary& vocab);
std::string stats_to_table(const LabelStatsReport& report);

}  // namespace llf

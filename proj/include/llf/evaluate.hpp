#pragma once

#include "llf/types.hpp"
#include "llf/zeroshot.hpp"

#include <map>
#include <string>
#include <vector>

namespace llf {

// Panoptic evaluation protocol
// ----------------------------
// Segments are formed from (semantic, instance) pairs; stuff classes are
// collapsed to one segment per class per scan. A prediction matches a
// ground-truth segment of the same class at IoU > 0.5, where the IoU
// denominator excludes prediction points falling on void ground truth:
//   IoU = |p ∩ g| / (|p \ void| + |g| - |p ∩ g|).
// Matches at IoU > 0.5 are provably unique. Unmatched predictions whose
// masked points are majority-void do not count as false positives.
// PQ = Σ IoU / (TP + FP/2 + FN/2), SQ = Σ IoU / TP, RQ = TP / (TP+FP/2+FN/2).
// A class enters the aggregates when it is present in GT or prediction
// (TP+FP+FN > 0, or any non-void semantic overlap). PQ† replaces the PQ of
// stuff classes by their semantic IoU; mIoU uses the semantic channel alone.

struct ClassStats {
  double iou_sum = 0.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t sem_intersection = 0;
  std::int64_t sem_union = 0;
};

struct PQClassReport {
  std::uint16_t class_id = 0;
  std::string name;
  bool is_thing = false;
  ClassStats stats;
  double pq = 0.0;
  double sq = 0.0;
  double rq = 0.0;
  double sem_iou = 0.0;
  bool present = false;
};

struct PQReport {
  std::vector<PQClassReport> classes;  // ascending class id
  double pq = 0.0, pq_dagger = 0.0, rq = 0.0, sq = 0.0;
  double pq_things = 0.0, rq_things = 0.0, sq_things = 0.0;
  double pq_stuff = 0.0, rq_stuff = 0.0, sq_stuff = 0.0;
  double miou = 0.0;
  int classes_evaluated = 0;
  int things_evaluated = 0;
  int stuff_evaluated = 0;
  int scans = 0;
  // Records the protocol variants in force (PQ† definition, void handling).
  std::string notes;
};

struct EvalOptions {
  // Restricts every count to masked-in points when set.
  const std::vector<bool>* eval_mask = nullptr;
  bool ignore_void = true;
};

// Multi-scan reduction: per-scan (iou_sum, tp, fp, fn) and semantic counts
// are summed before any ratio is taken.
class PQAccumulator {
 public:
  explicit PQAccumulator(const Vocabulary& vocab) : vocab_(&vocab) {}

  void add_scan(const PanopticLabeling& pred, const PanopticLabeling& gt,
                const EvalOptions& options = {});
  PQReport finalize() const;

 private:
  const Vocabulary* vocab_;
  std::map<std::uint16_t, ClassStats> per_class_;
  int scans_ = 0;
};

// Single-scan convenience wrapper around PQAccumulator.
PQReport evaluate_panoptic(const PanopticLabeling& pred,
                           const PanopticLabeling& gt, const Vocabulary& vocab,
                           const EvalOptions& options = {});

// Majority vote of non-void GT classes over each segment's points; ties go
// to the lower class id, all-void segments map to void.
std::vector<std::uint16_t> semantic_oracle(
    const std::vector<LidarSegment>& segments, const PanopticLabeling& gt);

// Labeling-level oracle: every predicted (semantic, instance) segment is
// reassigned its majority GT class; retained segments receive fresh
// instance ids ordered by first point, all-void segments become void.
PanopticLabeling apply_semantic_oracle(const PanopticLabeling& pred,
                                       const PanopticLabeling& gt);

// Collapses all instances of each stuff class to a single instance id (the
// smallest nonzero id the class already uses); thing instances untouched.
PanopticLabeling merge_stuff(const PanopticLabeling& labeling,
                             const Vocabulary& vocab);

// JSON and aligned-table renderings of a report (values reported x100).
std::string report_to_json(const PQReport& report);
std::string report_to_table(const PQReport& report);

}  // namespace llf

#include "llf/evaluate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

namespace llf {

namespace {

constexpr const char* kProtocolNotes =
    "void GT points excluded from IoU denominators; unmatched predictions "
    "that are majority-void are not false positives; stuff classes form one "
    "segment per scan; PQ-dagger uses the literature variant (stuff PQ "
    "replaced by semantic IoU); class averages run over classes present in "
    "GT or prediction";

using SegKey = std::uint32_t;  // semantic << 16 | instance

inline SegKey seg_key(std::uint16_t sem, std::uint16_t inst) {
  return (static_cast<SegKey>(sem) << 16) | inst;
}
inline std::uint16_t key_class(SegKey k) {
  return static_cast<std::uint16_t>(k >> 16);
}

struct SegCounts {
  std::int64_t size = 0;
  std::int64_t void_overlap = 0;
  bool matched = false;
};

}  // namespace

void PQAccumulator::add_scan(const PanopticLabeling& pred,
                             const PanopticLabeling& gt,
                             const EvalOptions& options) {
  if (pred.size() != gt.size())
    throw DataError("prediction has " + std::to_string(pred.size()) +
                    " points, ground truth has " + std::to_string(gt.size()));
  if (options.eval_mask != nullptr && options.eval_mask->size() != gt.size())
    throw DataError("evaluation mask length mismatch");

  // Thing instances stay keyed by their id; stuff collapses to instance 0.
  const auto make_key = [&](std::uint16_t sem, std::uint16_t inst) -> SegKey {
    const VocabularyClass* c = vocab_->find(sem);
    if (c == nullptr)
      throw DataError("semantic id " + std::to_string(sem) +
                      " not in vocabulary \"" + vocab_->name + "\"");
    return seg_key(sem, c->is_thing ? inst : 0);
  };

  std::unordered_map<SegKey, SegCounts> pred_segs;
  std::unordered_map<SegKey, SegCounts> gt_segs;
  std::unordered_map<std::uint64_t, std::int64_t> intersections;
  std::unordered_map<std::uint16_t, std::int64_t> sem_gt;
  std::unordered_map<std::uint16_t, std::int64_t> sem_pred;
  std::unordered_map<std::uint16_t, std::int64_t> sem_inter;

  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (options.eval_mask != nullptr && !(*options.eval_mask)[i]) continue;
    const std::uint16_t ps = pred.semantic[i];
    const std::uint16_t gs = gt.semantic[i];
    const bool gt_void = gs == 0;

    SegKey pk = 0;
    const bool has_pred = ps != 0;
    if (has_pred) {
      pk = make_key(ps, pred.instance[i]);
      SegCounts& c = pred_segs[pk];
      ++c.size;
      if (gt_void && options.ignore_void) ++c.void_overlap;
    }
    if (!gt_void) {
      const SegKey gk = make_key(gs, gt.instance[i]);
      ++gt_segs[gk].size;
      if (has_pred)
        ++intersections[(static_cast<std::uint64_t>(pk) << 32) | gk];

      ++sem_gt[gs];
      if (has_pred) ++sem_pred[ps];
      if (ps == gs) ++sem_inter[gs];
    }
  }

  // Matching: IoU > 0.5 per same-class pair; uniqueness is guaranteed.
  for (const auto& [pair, inter] : intersections) {
    const SegKey pk = static_cast<SegKey>(pair >> 32);
    const SegKey gk = static_cast<SegKey>(pair & 0xFFFFFFFFu);
    if (key_class(pk) != key_class(gk)) continue;
    SegCounts& p = pred_segs[pk];
    SegCounts& g = gt_segs[gk];
    const double denom =
        static_cast<double>(p.size - p.void_overlap + g.size - inter);
    if (denom <= 0.0) continue;
    const double iou = static_cast<double>(inter) / denom;
    if (iou > 0.5) {
      p.matched = true;
      g.matched = true;
      ClassStats& stats = per_class_[key_class(pk)];
      ++stats.tp;
      stats.iou_sum += iou;
    }
  }
  for (const auto& [gk, g] : gt_segs)
    if (!g.matched) ++per_class_[key_class(gk)].fn;
  for (const auto& [pk, p] : pred_segs) {
    if (p.matched) continue;
    if (options.ignore_void && 2 * p.void_overlap > p.size) continue;
    ++per_class_[key_class(pk)].fp;
  }

  for (const auto& [c, count] : sem_gt) {
    ClassStats& stats = per_class_[c];
    stats.sem_union += count;
  }
  for (const auto& [c, count] : sem_pred) {
    ClassStats& stats = per_class_[c];
    stats.sem_union += count;
  }
  for (const auto& [c, count] : sem_inter) {
    ClassStats& stats = per_class_[c];
    stats.sem_intersection += count;
    stats.sem_union -= count;  // was added from both channels
  }
  ++scans_;
}

PQReport PQAccumulator::finalize() const {
  PQReport report;
  report.scans = scans_;
  report.notes = kProtocolNotes;

  double pq_sum = 0, rq_sum = 0, sq_sum = 0, dagger_sum = 0, miou_sum = 0;
  double pq_th = 0, rq_th = 0, sq_th = 0;
  double pq_st = 0, rq_st = 0, sq_st = 0;
  int present = 0, things = 0, stuff = 0, miou_classes = 0;

  for (const VocabularyClass& vc : vocab_->classes) {
    PQClassReport c;
    c.class_id = vc.class_id;
    c.name = vc.name;
    c.is_thing = vc.is_thing;
    const auto it = per_class_.find(vc.class_id);
    if (it != per_class_.end()) c.stats = it->second;
    const ClassStats& s = c.stats;

    const double denom =
        static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp + s.fn);
    c.pq = denom > 0.0 ? s.iou_sum / denom : 0.0;
    c.sq = s.tp > 0 ? s.iou_sum / static_cast<double>(s.tp) : 0.0;
    c.rq = denom > 0.0 ? static_cast<double>(s.tp) / denom : 0.0;
    c.sem_iou = s.sem_union > 0 ? static_cast<double>(s.sem_intersection) /
                                      static_cast<double>(s.sem_union)
                                : 0.0;
    c.present = (s.tp + s.fp + s.fn) > 0 || s.sem_union > 0;

    if (c.present) {
      ++present;
      pq_sum += c.pq;
      rq_sum += c.rq;
      sq_sum += c.sq;
      dagger_sum += vc.is_thing ? c.pq : c.sem_iou;
      if (vc.is_thing) {
        ++things;
        pq_th += c.pq;
        rq_th += c.rq;
        sq_th += c.sq;
      } else {
        ++stuff;
        pq_st += c.pq;
        rq_st += c.rq;
        sq_st += c.sq;
      }
    }
    if (s.sem_union > 0) {
      ++miou_classes;
      miou_sum += c.sem_iou;
    }
    report.classes.push_back(std::move(c));
  }

  std::sort(report.classes.begin(), report.classes.end(),
            [](const PQClassReport& a, const PQClassReport& b) {
              return a.class_id < b.class_id;
            });

  report.classes_evaluated = present;
  report.things_evaluated = things;
  report.stuff_evaluated = stuff;
  if (present > 0) {
    report.pq = pq_sum / present;
    report.rq = rq_sum / present;
    report.sq = sq_sum / present;
    report.pq_dagger = dagger_sum / present;
  }
  if (things > 0) {
    report.pq_things = pq_th / things;
    report.rq_things = rq_th / things;
    report.sq_things = sq_th / things;
  }
  if (stuff > 0) {
    report.pq_stuff = pq_st / stuff;
    report.rq_stuff = rq_st / stuff;
    report.sq_stuff = sq_st / stuff;
  }
  if (miou_classes > 0) report.miou = miou_sum / miou_classes;
  return report;
}

PQReport evaluate_panoptic(const PanopticLabeling& pred,
                           const PanopticLabeling& gt, const Vocabulary& vocab,
                           const EvalOptions& options) {
  PQAccumulator acc(vocab);
  acc.add_scan(pred, gt, options);
  return acc.finalize();
}

std::vector<std::uint16_t> semantic_oracle(
    const std::vector<LidarSegment>& segments, const PanopticLabeling& gt) {
  std::vector<std::uint16_t> classes(segments.size(), 0);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    std::map<std::uint16_t, std::int64_t> votes;
    for (PointIndex p : segments[s].point_indices) {
      if (p < 0 || static_cast<std::size_t>(p) >= gt.size())
        throw DataError("segment point index " + std::to_string(p) +
                        " outside ground truth of " +
                        std::to_string(gt.size()) + " points");
      const std::uint16_t c = gt.semantic[static_cast<std::size_t>(p)];
      if (c != 0) ++votes[c];
    }
    std::uint16_t best = 0;
    std::int64_t best_count = 0;
    for (const auto& [c, count] : votes)  // ascending class id: ties -> lower
      if (count > best_count) {
        best = c;
        best_count = count;
      }
    classes[s] = best;
  }
  return classes;
}

PanopticLabeling apply_semantic_oracle(const PanopticLabeling& pred,
                                       const PanopticLabeling& gt) {
  if (pred.size() != gt.size())
    throw DataError("prediction/ground truth length mismatch");

  // Segments in order of first appearance.
  std::unordered_map<std::uint32_t, std::size_t> seg_of_key;
  std::vector<LidarSegment> segments;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pred.labeled(i)) continue;
    const std::uint32_t key = seg_key(pred.semantic[i], pred.instance[i]);
    auto [it, inserted] = seg_of_key.emplace(key, segments.size());
    if (inserted) segments.emplace_back();
    segments[it->second].point_indices.push_back(static_cast<PointIndex>(i));
  }

  const std::vector<std::uint16_t> classes = semantic_oracle(segments, gt);

  PanopticLabeling out;
  out.resize(pred.size());
  std::uint32_t next_instance = 1;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (classes[s] == 0) continue;  // all-void segment: excluded
    if (next_instance > 0xFFFF)
      throw DataError("more than 65535 instances in one scan");
    for (PointIndex p : segments[s].point_indices) {
      out.semantic[static_cast<std::size_t>(p)] = classes[s];
      out.instance[static_cast<std::size_t>(p)] =
          static_cast<std::uint16_t>(next_instance);
    }
    ++next_instance;
  }
  return out;
}

PanopticLabeling merge_stuff(const PanopticLabeling& labeling,
                             const Vocabulary& vocab) {
  PanopticLabeling out = labeling;
  std::map<std::uint16_t, std::uint16_t> merged_id;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t sem = out.semantic[i];
    if (sem == 0 || vocab.is_thing(sem)) continue;
    if (out.instance[i] == 0) continue;
    auto [it, inserted] = merged_id.emplace(sem, out.instance[i]);
    if (!inserted) it->second = std::min(it->second, out.instance[i]);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t sem = out.semantic[i];
    if (sem == 0 || vocab.is_thing(sem)) continue;
    const auto it = merged_id.find(sem);
    if (it != merged_id.end() && out.instance[i] != 0)
      out.instance[i] = it->second;
  }
  return out;
}

namespace {

nlohmann::json class_json(const PQClassReport& c) {
  nlohmann::json j;
  j["id"] = c.class_id;
  j["name"] = c.name;
  j["thing"] = c.is_thing;
  j["present"] = c.present;
  j["pq"] = c.pq * 100.0;
  j["sq"] = c.sq * 100.0;
  j["rq"] = c.rq * 100.0;
  j["iou"] = c.sem_iou * 100.0;
  j["tp"] = c.stats.tp;
  j["fp"] = c.stats.fp;
  j["fn"] = c.stats.fn;
  j["iou_sum"] = c.stats.iou_sum;
  return j;
}

}  // namespace

std::string report_to_json(const PQReport& report) {
  nlohmann::json j;
  j["pq"] = report.pq * 100.0;
  j["pq_dagger"] = report.pq_dagger * 100.0;
  j["rq"] = report.rq * 100.0;
  j["sq"] = report.sq * 100.0;
  j["pq_things"] = report.pq_things * 100.0;
  j["rq_things"] = report.rq_things * 100.0;
  j["sq_things"] = report.sq_things * 100.0;
  j["pq_stuff"] = report.pq_stuff * 100.0;
  j["rq_stuff"] = report.rq_stuff * 100.0;
  j["sq_stuff"] = report.sq_stuff * 100.0;
  j["miou"] = report.miou * 100.0;
  j["classes_evaluated"] = report.classes_evaluated;
  j["things_evaluated"] = report.things_evaluated;
  j["stuff_evaluated"] = report.stuff_evaluated;
  j["scans"] = report.scans;
  j["notes"] = report.notes;
  j["classes"] = nlohmann::json::array();
  for (const PQClassReport& c : report.classes) j["classes"].push_back(class_json(c));
  return j.dump(2) + "\n";
}

std::string report_to_table(const PQReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %6s %6s %6s %6s %4s %4s %4s\n",
                "class", "PQ", "SQ", "RQ", "IoU", "TP", "FP", "FN");
  out << line;
  for (const PQClassReport& c : report.classes) {
    if (!c.present) continue;
    std::snprintf(line, sizeof(line),
                  "%-16s %6.1f %6.1f %6.1f %6.1f %4lld %4lld %4lld\n",
                  c.name.c_str(), c.pq * 100.0, c.sq * 100.0, c.rq * 100.0,
                  c.sem_iou * 100.0, static_cast<long long>(c.stats.tp),
                  static_cast<long long>(c.stats.fp),
                  static_cast<long long>(c.stats.fn));
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "all: PQ %.1f | PQ† %.1f | RQ %.1f | SQ %.1f | "
                "PQ^Th %.1f | RQ^Th %.1f | SQ^Th %.1f | "
                "PQ^St %.1f | RQ^St %.1f | SQ^St %.1f | mIoU %.1f\n",
                report.pq * 100.0, report.pq_dagger * 100.0, report.rq * 100.0,
                report.sq * 100.0, report.pq_things * 100.0,
                report.rq_things * 100.0, report.sq_things * 100.0,
                report.pq_stuff * 100.0, report.rq_stuff * 100.0,
                report.sq_stuff * 100.0, report.miou * 100.0);
  out << line;
  return out.str();
}

}  // namespace llf

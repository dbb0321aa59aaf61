#include "llf/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace llf {

void LabelStatsAccumulator::add_scan(const PointCloud& cloud,
                                     const PanopticLabeling& labeling,
                                     const std::vector<bool>* frustum_mask) {
  if (labeling.size() != static_cast<std::size_t>(cloud.size()))
    throw DataError("scan '" + cloud.scan_id + "': labeling has " +
                    std::to_string(labeling.size()) + " entries for " +
                    std::to_string(cloud.size()) + " points");
  if (frustum_mask != nullptr && frustum_mask->size() != labeling.size())
    throw DataError("frustum mask length mismatch");

  std::set<std::uint32_t> pairs;
  std::set<std::uint16_t> stuff_without_ids;
  std::int64_t points = 0;
  std::int64_t labeled = 0;
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    if (frustum_mask != nullptr && !(*frustum_mask)[i]) continue;
    ++points;
    if (!labeling.labeled(i)) continue;
    ++labeled;
    const std::uint16_t sem = labeling.semantic[i];
    if (labeling.instance[i] != 0)
      pairs.insert((static_cast<std::uint32_t>(sem) << 16) |
                   labeling.instance[i]);
    else if (sem != 0 && !vocab_->is_thing(sem) && vocab_->find(sem) != nullptr)
      stuff_without_ids.insert(sem);
  }
  // A stuff class labeled without instance ids is the dataset's merged
  // single-instance convention: count it once.
  for (std::uint16_t sem : stuff_without_ids) {
    bool has_pair = false;
    for (std::uint32_t p : pairs)
      if (static_cast<std::uint16_t>(p >> 16) == sem) {
        has_pair = true;
        break;
      }
    if (!has_pair) pairs.insert(static_cast<std::uint32_t>(sem) << 16);
  }

  std::int64_t things = 0, stuff = 0, unclassified = 0;
  for (std::uint32_t p : pairs) {
    const std::uint16_t sem = static_cast<std::uint16_t>(p >> 16);
    ++report_.per_class_instances[sem];
    if (sem == 0 || vocab_->find(sem) == nullptr)
      ++unclassified;
    else if (vocab_->is_thing(sem))
      ++things;
    else
      ++stuff;
  }

  ++report_.scans;
  report_.total_points += points;
  report_.labeled_points += labeled;
  report_.total_instances += static_cast<std::int64_t>(pairs.size());
  report_.max_instances = std::max(report_.max_instances,
                                   static_cast<std::int64_t>(pairs.size()));
  report_.thing_instances += things;
  report_.stuff_instances += stuff;
  report_.unclassified_instances += unclassified;
}

std::string stats_to_json(const LabelStatsReport& report,
                          const Vocabulary& vocab) {
  nlohmann::json j;
  j["scans"] = report.scans;
  j["total_points"] = report.total_points;
  j["labeled_points"] = report.labeled_points;
  j["coverage"] = report.coverage();
  j["instances"]["total"] = report.total_instances;
  j["instances"]["max"] = report.max_instances;
  j["instances"]["mean"] = report.mean_instances();
  j["instances"]["things"] = report.thing_instances;
  j["instances"]["stuff"] = report.stuff_instances;
  j["instances"]["unclassified"] = report.unclassified_instances;
  j["instances"]["things_stuff_ratio"] = report.things_stuff_ratio();
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [sem, count] : report.per_class_instances) {
    const VocabularyClass* c = vocab.find(sem);
    per_class[c != nullptr ? c->name : std::to_string(sem)] = count;
  }
  j["instances"]["per_class"] = per_class;
  return j.dump(2) + "\n";
}

std::string stats_to_table(const LabelStatsReport& report) {
  std::ostringstream out;
  char line[256];
  const double total = static_cast<double>(
      std::max<std::int64_t>(1, report.thing_instances + report.stuff_instances));
  std::snprintf(line, sizeof(line), "%-10s %8s %10s %6s %8s %8s %8s %8s\n",
                "scans", "coverage", "instances", "max", "mean", "things",
                "stuff", "th/st");
  out << line;
  std::snprintf(line, sizeof(line),
                "%-10d %7.1f%% %10lld %6lld %8.1f %7.0f%% %7.0f%% %8.2f\n",
                report.scans, report.coverage() * 100.0,
                static_cast<long long>(report.total_instances),
                static_cast<long long>(report.max_instances),
                report.mean_instances(),
                100.0 * static_cast<double>(report.thing_instances) / total,
                100.0 * static_cast<double>(report.stuff_instances) / total,
                report.things_stuff_ratio());
  out << line;
  return out.str();
}

}  // namespace llf

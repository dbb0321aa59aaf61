#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "llf/geometry.hpp"
#include "llf/stats.hpp"

#include "test_support.hpp"

using namespace llf;

namespace {

PointCloud cloud_of(int n) {
  PointCloud cloud;
  cloud.points.resize(n, 4);
  cloud.points.setZero();
  for (int i = 0; i < n; ++i) cloud.points(i, 0) = static_cast<float>(i + 5);
  return cloud;
}

}  // namespace

TEST_CASE("fully labeled single-instance corpus") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(3, 2);
  LabelStatsAccumulator acc(vocab);
  for (int s = 0; s < 10; ++s) {
    const PointCloud cloud = cloud_of(20);
    PanopticLabeling l;
    l.semantic.assign(20, 1);
    l.instance.assign(20, 1);
    acc.add_scan(cloud, l);
  }
  const LabelStatsReport r = acc.finalize();
  CHECK(r.coverage() == 1.0);
  CHECK(r.total_instances == 10);
  CHECK(r.max_instances == 1);
  CHECK(r.mean_instances() == doctest::Approx(1.0));
  CHECK(r.thing_instances == 10);
}

TEST_CASE("three cars and a merged road give ratio 3") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(9, 8);
  // Class 9 is stuff in this vocabulary.
  const PointCloud cloud = cloud_of(8);
  PanopticLabeling l;
  l.semantic = {1, 1, 1, 1, 1, 1, 9, 9};
  l.instance = {1, 1, 2, 2, 3, 3, 4, 4};
  LabelStatsAccumulator acc(vocab);
  acc.add_scan(cloud, l);
  const LabelStatsReport r = acc.finalize();
  CHECK(r.thing_instances == 3);
  CHECK(r.stuff_instances == 1);
  CHECK(r.things_stuff_ratio() == doctest::Approx(3.0));
}

TEST_CASE("stuff labeled without ids counts once per class per scan") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(2, 1);
  const PointCloud cloud = cloud_of(6);
  PanopticLabeling l;
  l.semantic = {2, 2, 2, 1, 1, 0};  // stuff without ids + one thing instance
  l.instance = {0, 0, 0, 7, 7, 0};
  LabelStatsAccumulator acc(vocab);
  acc.add_scan(cloud, l);
  const LabelStatsReport r = acc.finalize();
  CHECK(r.total_instances == 2);
  CHECK(r.stuff_instances == 1);
  CHECK(r.thing_instances == 1);
  CHECK(r.labeled_points == 5);
  CHECK(r.coverage() == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("misaligned labeling is an error") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(1, 1);
  PanopticLabeling l;
  l.resize(3);
  LabelStatsAccumulator acc(vocab);
  CHECK_THROWS_AS(acc.add_scan(cloud_of(4), l), DataError);
}

TEST_CASE("constructed corpus hits coverage 0.375 exactly") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(2, 1);
  LabelStatsAccumulator acc(vocab);
  for (int s = 0; s < 10; ++s) {
    const PointCloud cloud = cloud_of(80);
    PanopticLabeling l;
    l.resize(80);
    for (int i = 0; i < 30; ++i) {  // 30 of 80 labeled = 0.375
      l.semantic[static_cast<std::size_t>(i)] = 1;
      l.instance[static_cast<std::size_t>(i)] =
          static_cast<std::uint16_t>(1 + i / 10);  // 3 instances per scan
    }
    acc.add_scan(cloud, l);
  }
  const LabelStatsReport r = acc.finalize();
  CHECK(r.coverage() == 0.375);  // exact
  CHECK(r.total_instances == 30);
  CHECK(r.max_instances == 3);
  CHECK(r.mean_instances() == doctest::Approx(3.0));
}

TEST_CASE("frustum restriction raises coverage when labels live inside") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(1, 1);
  const CameraModel cam = testsupport::synthetic_camera();

  // Half the points ahead of the camera (visible), half behind; labels only
  // on visible points.
  PointCloud cloud;
  cloud.points.resize(40, 4);
  cloud.points.setZero();
  for (int i = 0; i < 20; ++i) cloud.points(i, 0) = 10.0f;
  for (int i = 20; i < 40; ++i) cloud.points(i, 0) = -10.0f;
  PanopticLabeling l;
  l.resize(40);
  for (int i = 0; i < 10; ++i) {
    l.semantic[static_cast<std::size_t>(i)] = 1;
    l.instance[static_cast<std::size_t>(i)] = 1;
  }
  const std::vector<bool> frustum = frustum_filter(cloud, {cam});

  LabelStatsAccumulator full(vocab), restricted(vocab);
  full.add_scan(cloud, l);
  restricted.add_scan(cloud, l, &frustum);
  CHECK(restricted.finalize().coverage() >= full.finalize().coverage());
  CHECK(full.finalize().coverage() == doctest::Approx(0.25));
  CHECK(restricted.finalize().coverage() == doctest::Approx(0.5));
}

TEST_CASE("stats serializations include coverage and ratios") {
  const Vocabulary vocab = testsupport::make_test_vocabulary(2, 1);
  LabelStatsAccumulator acc(vocab);
  PanopticLabeling l;
  l.semantic = {1, 2};
  l.instance = {1, 2};
  acc.add_scan(cloud_of(2), l);
  const LabelStatsReport r = acc.finalize();
  const std::string json = stats_to_json(r, vocab);
  CHECK(json.find("\"coverage\": 1.0") != std::string::npos);
  CHECK(json.find("per_class") != std::string::npos);
  CHECK(stats_to_table(r).find("coverage") != std::string::npos);
}

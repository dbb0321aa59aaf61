#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "llf/augment.hpp"

#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace llf;

namespace {

PointCloud grid_cloud(int n) {
  PointCloud cloud;
  cloud.points.resize(n, 4);
  for (int i = 0; i < n; ++i) {
    cloud.points(i, 0) = static_cast<float>(i);
    cloud.points(i, 1) = static_cast<float>(i % 3);
    cloud.points(i, 2) = 0.5f;
    cloud.points(i, 3) = 0.25f;
  }
  return cloud;
}

}  // namespace

TEST_CASE("fully labeled scans crop to themselves") {
  const PointCloud cloud = grid_cloud(10);
  PanopticLabeling l;
  l.semantic.assign(10, 1);
  l.instance.assign(10, 1);
  const CropResult r = crop_unlabeled(cloud, l);
  CHECK(r.cloud.size() == 10);
  CHECK(r.kept_indices.size() == 10);
}

TEST_CASE("fully unlabeled scans crop to empty") {
  const PointCloud cloud = grid_cloud(10);
  PanopticLabeling l;
  l.resize(10);
  const CropResult r = crop_unlabeled(cloud, l);
  CHECK(r.cloud.size() == 0);
  CHECK(r.kept_indices.empty());
}

TEST_CASE("partial crop returns the remap table") {
  const PointCloud cloud = grid_cloud(10);
  PanopticLabeling l;
  l.resize(10);
  for (std::size_t i : {1u, 3u, 5u, 7u}) l.semantic[i] = 2;
  const CropResult r = crop_unlabeled(cloud, l);
  REQUIRE(r.cloud.size() == 4);
  CHECK(r.kept_indices == std::vector<PointIndex>{1, 3, 5, 7});
  CHECK(r.cloud.points(2, 0) == 5.0f);
  CHECK(r.labeling.semantic == std::vector<std::uint16_t>(4, 2));
}

TEST_CASE("a 90-degree labeled frustum replicates four times") {
  // Labeled points spread over exactly 90 degrees of azimuth.
  constexpr int kRays = 10;
  PointCloud cloud;
  cloud.points.resize(kRays, 4);
  PanopticLabeling l;
  l.resize(kRays);
  for (int i = 0; i < kRays; ++i) {
    // Endpoints on the axes make the azimuth extent exactly pi/2
    // (atan2(10, 0) and atan2(0, 10) are exact).
    if (i == 0) {
      cloud.points(i, 0) = 10.0f;
      cloud.points(i, 1) = 0.0f;
    } else if (i == kRays - 1) {
      cloud.points(i, 0) = 0.0f;
      cloud.points(i, 1) = 10.0f;
    } else {
      const double angle = (std::numbers::pi / 2.0) * i / (kRays - 1);
      cloud.points(i, 0) = static_cast<float>(10.0 * std::cos(angle));
      cloud.points(i, 1) = static_cast<float>(10.0 * std::sin(angle));
    }
    cloud.points(i, 2) = 0.0f;
    cloud.points(i, 3) = 0.0f;
    l.semantic[static_cast<std::size_t>(i)] = 1;
    l.instance[static_cast<std::size_t>(i)] = static_cast<std::uint16_t>(1 + i % 2);
  }
  FrankenParams params;
  params.jitter_deg = 0.0;
  const LabeledCloud out = franken_frustum(cloud, l, params);
  CHECK(out.cloud.size() == 4 * kRays);

  // Replica 0 is the original; replica j is rotated by j * 90 degrees.
  CHECK(out.cloud.points(0, 0) == doctest::Approx(10.0));
  const Eigen::Index base = kRays;
  CHECK(out.cloud.points(base, 0) ==
        doctest::Approx(0.0).epsilon(1e-6));  // 90-degree turn of (10, 0)
  CHECK(out.cloud.points(base, 1) == doctest::Approx(10.0));

  // Instance id ranges are disjoint across replicas and labels are total.
  std::set<std::uint16_t> ids(out.labeling.instance.begin(),
                              out.labeling.instance.end());
  CHECK(ids.size() == 8);  // 2 ids per replica, 4 replicas
  for (std::size_t i = 0; i < out.labeling.size(); ++i)
    CHECK(out.labeling.labeled(i));
  out.labeling.validate();
}

TEST_CASE("full-circle labels return the input unchanged") {
  constexpr int kRays = 36;
  PointCloud cloud;
  cloud.points.resize(kRays, 4);
  PanopticLabeling l;
  l.resize(kRays);
  for (int i = 0; i < kRays; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / kRays;
    cloud.points(i, 0) = static_cast<float>(std::cos(angle));
    cloud.points(i, 1) = static_cast<float>(std::sin(angle));
    l.semantic[static_cast<std::size_t>(i)] = 1;
  }
  const LabeledCloud out = franken_frustum(cloud, l, {});
  CHECK(out.cloud.size() == kRays);
  CHECK((out.cloud.points.array() == cloud.points.array()).all());
}

TEST_CASE("franken on an unlabeled scan is an error") {
  const PointCloud cloud = grid_cloud(5);
  PanopticLabeling l;
  l.resize(5);
  CHECK_THROWS_AS(franken_frustum(cloud, l, {}), DataError);
}

TEST_CASE("franken is deterministic under a fixed seed") {
  const PointCloud cloud = grid_cloud(30);
  PanopticLabeling l;
  l.resize(30);
  for (std::size_t i = 0; i < 30; ++i) {
    l.semantic[i] = 1;
    l.instance[i] = static_cast<std::uint16_t>(1 + i % 3);
  }
  FrankenParams params;
  params.jitter_deg = 5.0;
  params.seed = 77;
  const LabeledCloud a = franken_frustum(cloud, l, params);
  const LabeledCloud b = franken_frustum(cloud, l, params);
  CHECK((a.cloud.points.array() == b.cloud.points.array()).all());
  CHECK(a.labeling.instance == b.labeling.instance);
}

TEST_CASE("mixing offsets the second scan's instance ids") {
  const PointCloud a = grid_cloud(3), b = grid_cloud(2);
  PanopticLabeling la, lb;
  la.semantic = {1, 1, 2};
  la.instance = {1, 2, 0};
  lb.semantic = {1, 3};
  lb.instance = {1, 0};
  const LabeledCloud mixed = mix_scans(a, la, b, lb, 0);
  CHECK(mixed.cloud.size() == 5);
  CHECK(mixed.labeling.instance ==
        std::vector<std::uint16_t>{1, 2, 0, 3, 0});  // offset = max(a) = 2
  CHECK(mixed.labeling.semantic ==
        std::vector<std::uint16_t>{1, 1, 2, 1, 3});

  // Mixing with an empty scan is the identity.
  PointCloud empty;
  empty.points.resize(0, 4);
  PanopticLabeling lempty;
  const LabeledCloud same = mix_scans(a, la, empty, lempty, 0);
  CHECK(same.cloud.size() == 3);
  CHECK(same.labeling.instance == la.instance);
}

TEST_CASE("mixing rejects instance overflow") {
  const PointCloud a = grid_cloud(1), b = grid_cloud(1);
  PanopticLabeling la, lb;
  la.semantic = {1};
  la.instance = {0xFFFF};
  lb.semantic = {1};
  lb.instance = {1};
  CHECK_THROWS_AS(mix_scans(a, la, b, lb, 0), DataError);
}

TEST_CASE("identity spatial ranges leave the cloud unchanged") {
  const PointCloud cloud = grid_cloud(20);
  const PointCloud out = spatial_augment(cloud, {});
  CHECK((out.points.array() == cloud.points.array()).all());
}

TEST_CASE("a pi rotation about z negates x and y") {
  PointCloud cloud;
  cloud.points.resize(1, 4);
  cloud.points << 1, 0, 0, 0;
  SpatialAugmentParams params;
  params.rot_z_range = {std::numbers::pi, std::numbers::pi};
  const PointCloud out = spatial_augment(cloud, params);
  CHECK(out.points(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(out.points(0, 1)) < 1e-6);
}

TEST_CASE("scaling doubles pairwise distances") {
  std::mt19937_64 rng(5);
  PointCloud cloud;
  cloud.points.resize(12, 4);
  std::uniform_real_distribution<float> coord(-4.0f, 4.0f);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (int c = 0; c < 4; ++c) cloud.points(i, c) = coord(rng);
  SpatialAugmentParams params;
  params.scale_range = {2.0, 2.0};
  const PointCloud out = spatial_augment(cloud, params);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index j = i + 1; j < 12; ++j) {
      const double before =
          (cloud.position(i) - cloud.position(j)).norm();
      const double after = (out.position(i) - out.position(j)).norm();
      CHECK(after == doctest::Approx(2.0 * before).epsilon(1e-5));
    }
}

TEST_CASE("non-positive scales are rejected") {
  SpatialAugmentParams params;
  params.scale_range = {0.0, 1.0};
  CHECK_THROWS_AS(spatial_augment(grid_cloud(2), params), ConfigError);
}

TEST_CASE("labels keep instance purity through augmentation chains") {
  const PointCloud cloud = grid_cloud(24);
  PanopticLabeling l;
  l.resize(24);
  for (std::size_t i = 0; i < 24; ++i) {
    l.semantic[i] = static_cast<std::uint16_t>(1 + i % 2);
    l.instance[i] = static_cast<std::uint16_t>(1 + (i % 4) / 2);
  }
  // Make instances class-pure: instance determines class.
  for (std::size_t i = 0; i < 24; ++i) l.semantic[i] = l.instance[i];
  l.validate();
  FrankenParams params;
  params.seed = 3;
  const LabeledCloud fr = franken_frustum(cloud, l, params);
  fr.labeling.validate();
  const LabeledCloud mixed =
      mix_scans(fr.cloud, fr.labeling, fr.cloud, fr.labeling, 1);
  mixed.labeling.validate();
}

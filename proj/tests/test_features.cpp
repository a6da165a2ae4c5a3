#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include "predrx/experiments.hpp"
#include "predrx/features.hpp"
#include "predrx/rng.hpp"

using namespace predrx;

TEST_CASE("bin_trace counts packets and applies the smoothing rules") {
  Trace t;
  t.duration_s = 10.0;
  t.records = {
      {1.0, Direction::UL, 100, Protocol::TCP, {}},
      {2.0, Direction::UL, 100, Protocol::TCP, {}},
      {3.0, Direction::UL, 100, Protocol::TCP, {}},
      {4.0, Direction::DL, 500, Protocol::TCP, {}},
  };
  const FeatureSeries s = bin_trace(t, 10.0);
  REQUIRE(s.bins.size() == 1);
  CHECK(s.bins[0].num_ul == 3);
  CHECK(s.bins[0].num_dl == 1);
  CHECK(s.bins[0].ratio == doctest::Approx(2.0));  // (3+1)/(1+1)
  CHECK(s.bins[0].udp_fraction == doctest::Approx(0.0));
}

TEST_CASE("an all-UDP bin has udp_fraction one and an empty bin defaults") {
  Trace t;
  t.duration_s = 2.0;
  t.records = {
      {0.1, Direction::UL, 50, Protocol::UDP, {}},
      {0.2, Direction::DL, 60, Protocol::UDP, {}},
  };
  const FeatureSeries s = bin_trace(t, 1.0);
  REQUIRE(s.bins.size() == 2);
  CHECK(s.bins[0].udp_fraction == doctest::Approx(1.0));
  CHECK(s.bins[1].num_ul == 0);
  CHECK(s.bins[1].ratio == doctest::Approx(1.0));  // (0+1)/(0+1)
  CHECK(s.bins[1].udp_fraction == doctest::Approx(0.0));
}

TEST_CASE("empty trace yields zero-valued bins over the declared duration") {
  Trace t;
  t.duration_s = 25.0;
  const FeatureSeries s = bin_trace(t, 10.0);
  REQUIRE(s.bins.size() == 3);  // ceil(25/10)
  for (const FeatureVector& fv : s.bins) {
    CHECK(fv.num_ul == 0);
    CHECK(fv.ratio == doctest::Approx(1.0));
  }
}

TEST_CASE("standard masks match the feature-set table") {
  CHECK(FeatureSetMask::standard(FeatureSetId::FS1).count() == 5);
  CHECK(FeatureSetMask::standard(FeatureSetId::FS2).count() == 2);
  CHECK(FeatureSetMask::standard(FeatureSetId::FS3).count() == 1);
  CHECK(FeatureSetMask::standard(FeatureSetId::FS4).count() == 3);
  CHECK(FeatureSetMask::standard(FeatureSetId::FS5).count() == 2);
  CHECK(FeatureSetMask::standard(FeatureSetId::FS6).count() == 3);
  const FeatureSetMask fs6 = FeatureSetMask::standard(FeatureSetId::FS6);
  CHECK(fs6.included[0]);  // num_ul
  CHECK(fs6.included[1]);  // num_dl
  CHECK(fs6.included[5]);  // udp_fraction
  CHECK_FALSE(fs6.included[4]);
}

TEST_CASE("apply_mask keeps only masked columns and is idempotent") {
  const Trace t = synthesize_trace(AppClass::SURF, 40.0, 5);
  const FeatureSeries s = bin_trace(t, 2.0);
  const FeatureSetMask m = FeatureSetMask::standard(FeatureSetId::FS3);
  const FeatureSeries a = apply_mask(s, m);
  CHECK(a.matrix()[0].size() == 1);
  const FeatureSeries b = apply_mask(a, m);
  CHECK(a.matrix() == b.matrix());

  FeatureSetMask empty;
  CHECK_THROWS_AS(apply_mask(s, empty), std::runtime_error);
}

TEST_CASE("apply_mask rejects a mask excluding a non-default target") {
  const Trace t = synthesize_trace(AppClass::SURF, 20.0, 5);
  FeatureSeries s = bin_trace(t, 2.0);
  s.target_field = 3;  // size_dl, absent from FS5
  CHECK_THROWS_AS(apply_mask(s, FeatureSetMask::standard(FeatureSetId::FS5)), std::runtime_error);
}

TEST_CASE("split_experiment slices contiguously and validates bounds") {
  const Trace t = synthesize_trace(AppClass::VOICE_CALL, 100.0, 2);
  const FeatureSeries s = bin_trace(t, 1.0);
  REQUIRE(s.bins.size() >= 100);
  const SplitResult r = split_experiment(s, 80, 20, 0);
  CHECK(r.train.bins.size() == 80);
  CHECK(r.test.bins.size() == 20);
  CHECK(r.train.bins[0].num_ul == s.bins[0].num_ul);
  CHECK(r.test.bins[0].num_ul == s.bins[80].num_ul);

  const SplitResult empty_train = split_experiment(s, 0, 20, 0);
  CHECK(empty_train.train.bins.empty());

  CHECK_THROWS_AS(split_experiment(s, 90, 20, 60), std::runtime_error);
}

TEST_CASE("per-bin counts conserve the trace totals") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto cls = static_cast<AppClass>(rng.uniform_int(0, 3));
    const Trace t = synthesize_trace(cls, rng.uniform(20.0, 80.0), rng.next_u64());
    std::size_t ul = 0;
    for (const PacketRecord& r : t.records)
      if (r.dir == Direction::UL) ++ul;
    const double tau = rng.uniform(0.5, 5.0);
    const FeatureSeries s = bin_trace(t, tau);
    double sum = 0;
    for (const FeatureVector& fv : s.bins) sum += fv.num_ul;
    CHECK(sum == doctest::Approx(static_cast<double>(ul)));

    // halving tau at most doubles the bin count and conserves the total
    const FeatureSeries s2 = bin_trace(t, tau / 2);
    CHECK(s2.bins.size() <= 2 * s.bins.size());
    double sum2 = 0;
    for (const FeatureVector& fv : s2.bins) sum2 += fv.num_ul;
    CHECK(sum2 == doctest::Approx(sum));
  }
}

TEST_CASE("feature series round-trips through CSV") {
  const Trace t = synthesize_trace(AppClass::VIDEO_CALL, 30.0, 9);
  const FeatureSeries s = bin_trace(t, 1.0);
  const std::string path =
      (std::filesystem::temp_directory_path() / "predrx_feat_roundtrip.csv").string();
  save_feature_series(s, path);
  const FeatureSeries back = load_feature_series(path, 1.0);
  REQUIRE(back.bins.size() == s.bins.size());
  for (std::size_t i = 0; i < s.bins.size(); ++i) {
    CHECK(back.bins[i].num_ul == doctest::Approx(s.bins[i].num_ul));
    CHECK(back.bins[i].udp_fraction == doctest::Approx(s.bins[i].udp_fraction));
  }
  std::filesystem::remove(path);
}

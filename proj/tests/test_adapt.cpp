#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <set>
#include <vector>

#include "predrx/adapt.hpp"
#include "predrx/rng.hpp"

using namespace predrx;

namespace {

// synthetic bursty label stream: silent stretches with light-load bursts
// (sizes stay small so wake latency, not queueing, dominates delay)
std::vector<int> bursty_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(n, 1);
  std::size_t t = 0;
  while (t < n) {
    t += static_cast<std::size_t>(rng.exponential(1500.0));
    const std::size_t burst = 200 + static_cast<std::size_t>(rng.exponential(800.0));
    for (std::size_t k = 0; k < burst && t + k < n; ++k)
      if (rng.bernoulli(0.1)) labels[t + k] = static_cast<int>(rng.uniform_int(2, 4));
    t += burst;
  }
  return labels;
}

std::vector<TimedArrival> arrivals_from_labels(const std::vector<int>& labels) {
  // representative byte size per label bin midpoint
  static const std::int64_t rep[10] = {0, 0, 75, 300, 750, 3000, 7500, 30000, 75000, 150000};
  std::vector<TimedArrival> out;
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (labels[t] > 1) out.push_back({t, rep[labels[t]]});
  return out;
}

}  // namespace

TEST_CASE("snapshot of a silent history is fully padded") {
  const std::vector<int> empty;
  const TrafficSnapshot s = snapshot(empty);
  CHECK(s.e == std::array<double, 7>{1, 1, 1, 1, 10, 100, 1000});

  const std::vector<int> silent(2000, 1);
  const TrafficSnapshot s2 = snapshot(silent);
  CHECK(s2.e == std::array<double, 7>{1, 1, 1, 1, 10, 100, 1000});
}

TEST_CASE("snapshot sums windows that include the most recent TTIs") {
  std::vector<int> hist(2000, 1);
  hist.back() = 9;  // one label-9 TTI at t-1
  const TrafficSnapshot s = snapshot(hist);
  CHECK(s.e == std::array<double, 7>{9, 1, 1, 1, 18, 108, 1008});
}

TEST_CASE("snapshot sums are exact against a brute-force re-sum") {
  Rng rng(12);
  const std::vector<int> hist = bursty_labels(5000, 77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = static_cast<std::size_t>(rng.uniform_int(1, 4999));
    const TrafficSnapshot s = snapshot(std::span(hist.data(), t));
    const auto at = [&](std::size_t back) {
      return back <= t ? static_cast<double>(hist[t - back]) : 1.0;
    };
    for (int k = 0; k < 4; ++k) CHECK(s.e[k] == at(k + 1));
    const std::array<int, 3> windows{10, 100, 1000};
    for (int w = 0; w < 3; ++w) {
      double sum = 0;
      for (int back = 1; back <= windows[w]; ++back) sum += at(back);
      CHECK(s.e[4 + w] == sum);
    }
  }
}

TEST_CASE("x_short plus x_long equals the entry total") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    PredictionVector pv;
    for (int k = 0; k < 7; ++k) pv.e[k] = rng.uniform(kSnapshotLo[k], kSnapshotHi[k]);
    double total = 0;
    for (double v : pv.e) total += v;
    CHECK(pv.x_short() + pv.x_long() == doctest::Approx(total).epsilon(1e-15));
  }
}

TEST_CASE("predict_F clamps outputs into the entry ranges and is pure") {
  RegressionNet net = make_regression_net(4, 7, 7, Activation::StandardTanh, 5);
  net.trained = true;  // raw weights push outputs outside the ranges
  TrafficSnapshot snap;
  snap.e = {1, 1, 1, 1, 10, 100, 1000};
  const PredictionVector a = predict_F(net, snap);
  const PredictionVector b = predict_F(net, snap);
  CHECK(a.e == b.e);
  for (int k = 0; k < 7; ++k) {
    CHECK(a.e[k] >= kSnapshotLo[k]);
    CHECK(a.e[k] <= kSnapshotHi[k]);
  }
  RegressionNet untrained = make_regression_net(4, 7, 7, Activation::StandardTanh, 5);
  CHECK_THROWS_AS(predict_F(untrained, snap), std::runtime_error);
}

TEST_CASE("F trained on silence predicts the padded constants") {
  const std::vector<int> silent(4000, 1);
  AdaptTrainOptions opts;
  opts.hidden = 8;
  opts.epochs = 200;
  opts.lr = 0.05;
  opts.seed = 3;
  const RegressionNet net = train_adapt_net(silent, opts);
  const PredictionVector pv = predict_F(net, snapshot(silent));
  CHECK(pv.x_short() == doctest::Approx(14.0).epsilon(0.02));
  CHECK(pv.x_long() == doctest::Approx(1100.0).epsilon(0.02));
}

TEST_CASE("the threshold table maps the activity corners to the documented sets") {
  const MappingH h = MappingH::default_table();
  PredictionVector lo;
  lo.e = {1, 1, 1, 1, 10, 100, 1000};
  CHECK(h.decide(lo) == 2);  // most energy saving
  PredictionVector hi;
  hi.e = {9, 9, 9, 9, 90, 900, 9000};
  CHECK(h.decide(hi) == 3);  // least delay

  // short-term activity only
  PredictionVector short_only = lo;
  short_only.e[0] = short_only.e[1] = short_only.e[2] = short_only.e[3] = 9;
  short_only.e[4] = 90;
  CHECK(h.decide(short_only) == 1);

  // long-horizon activity only
  PredictionVector long_only = lo;
  long_only.e[5] = 900;
  long_only.e[6] = 9000;
  CHECK(h.decide(long_only) == 4);
}

TEST_CASE("scores on a boundary fall into the lower region") {
  ScorerConfig sc;
  MappingH h = MappingH::default_table(sc);
  // construct x_long exactly on the boundary-3 score
  const double x_long_b = sc.long_lo + 0.3 * (sc.long_hi - sc.long_lo);
  CHECK(long_score(sc, x_long_b) == doctest::Approx(3.0));
  PredictionVector pv;
  pv.e = {1, 1, 1, 1, 10, 100, 1000};
  pv.e[5] = 100;
  pv.e[6] = x_long_b - 100;
  CHECK(h.decide(pv) == 2);  // lower region keeps the sleepier set
}

TEST_CASE("decide is monotone in x_short toward shorter-sleep sets") {
  const MappingH h = MappingH::default_table();
  // sleep aggressiveness by idle duty power: set2 < set4 < set1 < set3
  const auto sleep_rank = [](int set) {
    switch (set) {
      case 2: return 0;
      case 4: return 1;
      case 1: return 2;
      default: return 3;
    }
  };
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    PredictionVector pv;
    for (int k = 0; k < 7; ++k) pv.e[k] = rng.uniform(kSnapshotLo[k], kSnapshotHi[k]);
    PredictionVector higher = pv;
    for (int k = 0; k < 4; ++k)
      higher.e[k] = std::min(kSnapshotHi[k], higher.e[k] + rng.uniform(0.0, 4.0));
    higher.e[4] = std::min(kSnapshotHi[4], higher.e[4] + rng.uniform(0.0, 40.0));
    CHECK(sleep_rank(h.decide(higher)) >= sleep_rank(h.decide(pv)));
  }
}

TEST_CASE("oracle labeling prefers the extreme sets at the omega extremes") {
  const std::vector<int> labels = bursty_labels(20000, 3);
  const std::vector<TimedArrival> arrivals = arrivals_from_labels(labels);
  OracleOptions opts;
  const std::vector<OracleRun> runs = build_oracle_runs(labels, arrivals, opts);
  REQUIRE(runs.size() >= 10);
  for (const OracleRun& run : runs) {
    CHECK(best_set(run, 0.0) == 2);
    CHECK(best_set(run, 1.0) == 3);
  }

  const MappingH h0 = train_H(runs, 0.0);
  const MappingH h1 = train_H(runs, 1.0);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    PredictionVector pv;
    for (int k = 0; k < 7; ++k) pv.e[k] = rng.uniform(kSnapshotLo[k], kSnapshotHi[k]);
    CHECK(h0.decide(pv) == 2);
    CHECK(h1.decide(pv) == 3);
  }
}

TEST_CASE("a balanced omega uses both scores and more than one set") {
  const std::vector<int> labels = bursty_labels(60000, 8);
  const std::vector<TimedArrival> arrivals = arrivals_from_labels(labels);
  OracleOptions opts;
  const std::vector<OracleRun> runs = build_oracle_runs(labels, arrivals, opts);
  const MappingH h = train_H(runs, 0.5);
  std::set<int> outputs;
  for (const OracleRun& run : runs) outputs.insert(h.decide(run.pv));
  CHECK(outputs.size() >= 2);
  // the tree consulted both features
  std::set<int> features;
  for (const TreeNode& n : h.tree.nodes)
    if (!n.leaf) features.insert(n.feature);
  CHECK(features.size() == 2);
}

TEST_CASE("train_H rejects an empty oracle set") {
  const std::vector<OracleRun> none;
  CHECK_THROWS_AS(train_H(none, 0.5), std::runtime_error);
}

TEST_CASE("the frozen adaptation loop is a pure function of the label history") {
  const std::vector<int> labels = bursty_labels(12000, 44);
  AdaptTrainOptions opts;
  opts.hidden = 8;
  opts.epochs = 60;
  opts.seed = 9;
  const RegressionNet net = train_adapt_net(labels, opts);
  const MappingH h = MappingH::default_table();

  const auto run_controller = [&] {
    AdaptController ctl(net, h, QuantizationScheme{});
    std::vector<int> sets;
    Rng rng(55);
    for (std::uint64_t t = 0; t < 6000; ++t) {
      if (ctl.decision_due(t)) sets.push_back(ctl.decide_now(t));
      ctl.push_tti_bytes(rng.bernoulli(0.02) ? rng.uniform_int(50, 40000) : 0);
    }
    return sets;
  };
  const std::vector<int> a = run_controller();
  const std::vector<int> b = run_controller();
  CHECK(a == b);
}

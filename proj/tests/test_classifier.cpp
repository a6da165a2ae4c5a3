#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "predrx/classifier.hpp"
#include "predrx/rng.hpp"

using namespace predrx;

TEST_CASE("a linearly separable problem needs one split") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    x.push_back({static_cast<double>(i)});
    y.push_back(i < 10 ? 0 : 1);
  }
  const DecisionTree t = fit_tree(x, y, {});
  int internal = 0;
  for (const TreeNode& n : t.nodes)
    if (!n.leaf) ++internal;
  CHECK(internal == 1);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(t.predict(x[i]) == y[i]);
}

TEST_CASE("single-class data yields a single leaf") {
  std::vector<std::vector<double>> x{{1.0}, {2.0}, {3.0}};
  std::vector<int> y{2, 2, 2};
  const DecisionTree t = fit_tree(x, y, {});
  CHECK(t.nodes.size() == 1);
  CHECK(t.nodes[0].leaf);
  const std::vector<double> probe{9.0};
  CHECK(t.predict(probe) == 2);
}

TEST_CASE("a depth-2 tree realizes XOR") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  // brute-force the four corners with repeats so splits are well-defined
  for (int rep = 0; rep < 4; ++rep)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        x.push_back({static_cast<double>(a), static_cast<double>(b)});
        y.push_back(a ^ b);
      }
  TreeOptions opts;
  opts.max_depth = 2;
  const DecisionTree t = fit_tree(x, y, opts);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(t.predict(x[i]) == y[i]);
}

TEST_CASE("empty training data is rejected") {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  CHECK_THROWS_AS(fit_tree(x, y, {}), std::runtime_error);
}

TEST_CASE("majority voting and its tie-break") {
  // three stumps voting (A, A, B) -> A; four voting (A,A,B,B) -> smaller index
  const auto leaf_tree = [](int label) {
    DecisionTree t;
    TreeNode n;
    n.leaf = true;
    n.label = label;
    t.nodes.push_back(n);
    return t;
  };
  RandomForest f3;
  f3.trees = {leaf_tree(0), leaf_tree(0), leaf_tree(1)};
  const std::vector<double> any{0.0};
  CHECK(f3.predict(any) == 0);

  RandomForest f1;
  f1.trees = {leaf_tree(3)};
  CHECK(f1.predict(any) == 3);

  RandomForest f4;
  f4.trees = {leaf_tree(1), leaf_tree(1), leaf_tree(0), leaf_tree(0)};
  CHECK(f4.predict(any) == 0);  // tie resolves to the smaller class index
}

TEST_CASE("a forest of identical trees equals the single tree") {
  Rng rng(3);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    x.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
    y.push_back(x.back()[0] + x.back()[1] > 1.0 ? 1 : 0);
  }
  const DecisionTree t = fit_tree(x, y, {});
  RandomForest f;
  f.trees = {t, t, t, t, t};
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> probe{rng.uniform(0, 1), rng.uniform(0, 1)};
    CHECK(f.predict(probe) == t.predict(probe));
  }
}

TEST_CASE("forest training beats the average single tree on a noisy task") {
  // ensemble property averaged over seeds
  Rng rng(5);
  int forest_wins = 0, runs = 0;
  double forest_acc_sum = 0, tree_acc_sum = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::vector<std::vector<double>> x, xt;
    std::vector<int> y, yt;
    Rng gen(seed * 977 + 11);
    const auto sample = [&](std::vector<std::vector<double>>& xx, std::vector<int>& yy, int n) {
      for (int i = 0; i < n; ++i) {
        std::vector<double> row{gen.uniform(0, 1), gen.uniform(0, 1), gen.uniform(0, 1)};
        const int label = (row[0] + 0.7 * row[1] > 0.85) ? 1 : 0;
        // 10% label noise
        yy.push_back(gen.bernoulli(0.1) ? 1 - label : label);
        xx.push_back(std::move(row));
      }
    };
    sample(x, y, 120);
    sample(xt, yt, 300);
    TreeOptions topt;
    topt.max_depth = 4;
    topt.seed = seed;
    const DecisionTree tree = fit_tree(x, y, topt);
    ForestOptions fopt;
    fopt.k = 25;
    fopt.max_depth = 4;
    fopt.seed = seed;
    const RandomForest forest = fit_forest(x, y, fopt);
    int tc = 0, fc = 0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
      if (tree.predict(xt[i]) == yt[i]) ++tc;
      if (forest.predict(xt[i]) == yt[i]) ++fc;
    }
    tree_acc_sum += tc;
    forest_acc_sum += fc;
    if (fc >= tc) ++forest_wins;
    ++runs;
  }
  CHECK(forest_acc_sum >= tree_acc_sum);
  CHECK(forest_wins >= runs / 2);
}

TEST_CASE("tree predictions are invariant to monotone feature rescaling") {
  Rng rng(7);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 80; ++i) {
    x.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    y.push_back(x.back()[0] > 0.2 ? (x.back()[1] > -0.3 ? 2 : 1) : 0);
  }
  const auto rescale = [](const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out = rows;
    for (auto& r : out) {
      r[0] = 100.0 * r[0] + 5.0;      // affine, strictly increasing
      r[1] = std::exp(r[1]);          // nonlinear, strictly increasing
    }
    return out;
  };
  const DecisionTree plain = fit_tree(x, y, {});
  const DecisionTree scaled = fit_tree(rescale(x), y, {});
  for (int i = 0; i < 60; ++i) {
    std::vector<double> probe{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const auto probe_scaled = rescale({probe})[0];
    CHECK(plain.predict(probe) == scaled.predict(probe_scaled));
  }
}

TEST_CASE("evaluation identities") {
  const std::vector<int> perfect{0, 1, 2, 3};
  const Evaluation ev = evaluate_classification(perfect, perfect);
  CHECK(ev.accuracy == doctest::Approx(1.0));
  for (const auto& [label, r] : ev.recall) CHECK(r == doctest::Approx(1.0));

  const std::vector<int> all_zero{0, 0, 0, 0};
  const std::vector<int> balanced{0, 1, 2, 3};
  const Evaluation ev2 = evaluate_classification(all_zero, balanced);
  CHECK(ev2.accuracy == doctest::Approx(0.25));
  CHECK(ev2.recall.at(0) == doctest::Approx(1.0));
  CHECK(ev2.recall.at(1) == doctest::Approx(0.0));

  // hand-built 8-sample confusion case
  const std::vector<int> truth{0, 0, 0, 1, 1, 2, 2, 2};
  const std::vector<int> pred{0, 0, 1, 1, 0, 2, 2, 0};
  const Evaluation ev3 = evaluate_classification(pred, truth);
  CHECK(ev3.accuracy == doctest::Approx(5.0 / 8.0));
  CHECK(ev3.recall.at(0) == doctest::Approx(2.0 / 3.0));
  CHECK(ev3.recall.at(1) == doctest::Approx(1.0 / 2.0));
  CHECK(ev3.recall.at(2) == doctest::Approx(2.0 / 3.0));

  // accuracy equals the recall mixture, exactly
  double recon = 0;
  for (const auto& [label, count] : ev3.actual_count)
    recon += (static_cast<double>(count) / ev3.total) * ev3.recall.at(label);
  CHECK(recon == doctest::Approx(ev3.accuracy).epsilon(1e-15));

  const std::vector<int> mismatched{0};
  CHECK_THROWS_AS(evaluate_classification(mismatched, truth), std::runtime_error);
}

TEST_CASE("the softmax classifier separates two synthetic sequence classes") {
  Rng rng(17);
  LabeledSequences ds;
  ds.steps = 6;
  ds.input = 2;
  const auto emit = [&](int label, int n) {
    for (int s = 0; s < n; ++s) {
      for (int t = 0; t < ds.steps; ++t) {
        const double base = label == 0 ? 0.3 : 0.7;
        ds.x.push_back(base + rng.uniform(-0.1, 0.1));
        ds.x.push_back(label == 0 ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5));
      }
      ds.y.push_back(label);
      ++ds.n;
    }
  };
  emit(0, 30);
  emit(1, 30);
  ClassifierNet net = make_classifier_net(8, 2, 2, Activation::StandardTanh, 18);
  TrainOptions opts;
  opts.epochs = 250;
  opts.lr = 0.05;
  const std::vector<double> curve = train_classifier(net, ds, opts);
  CHECK(curve.back() < curve.front());
  int correct = 0;
  for (int s = 0; s < ds.n; ++s) {
    std::vector<double> w(ds.x.begin() + static_cast<std::ptrdiff_t>(s) * ds.steps * 2,
                          ds.x.begin() + static_cast<std::ptrdiff_t>(s + 1) * ds.steps * 2);
    if (classify_sequence(net, w, ds.steps) == ds.y[s]) ++correct;
  }
  CHECK(correct >= 55);  // 60 windows
}

TEST_CASE("window classification validates window length") {
  FeatureSeries series;
  series.tau_s = 1.0;
  series.bins.assign(10, FeatureVector{});
  RandomForest f;
  DecisionTree t;
  TreeNode n;
  n.leaf = true;
  n.label = 0;
  t.nodes.push_back(n);
  f.trees.push_back(t);
  CHECK_THROWS_AS(classify_windows(f, series, 0.0), std::runtime_error);
  CHECK_THROWS_AS(classify_windows(f, series, 2.5), std::runtime_error);
  CHECK(classify_windows(f, series, 5.0).size() == 2);
}

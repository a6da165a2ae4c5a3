#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "predrx/features.hpp"
#include "predrx/lstm.hpp"

namespace predrx {

struct TreeNode {
  bool leaf = true;
  int label = 0;
  int feature = -1;
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;  // x[feature] >  threshold
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int max_depth = 8;
  int min_samples_leaf = 1;

  int predict(std::span<const double> x) const;
};

struct TreeOptions {
  int max_depth = 8;
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 = consider all features
  std::uint64_t seed = 1;
};

// Greedy binary splits maximizing Gini impurity decrease. Deterministic
// under the seed; split ties resolve to the lower feature index then the
// lower threshold.
DecisionTree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const TreeOptions& opts);

struct RandomForest {
  std::vector<DecisionTree> trees;

  // Majority vote; ties break to the smallest class index.
  int predict(std::span<const double> x) const;
};

struct ForestOptions {
  int k = 50;
  int max_depth = 8;
  int min_samples_leaf = 1;
  std::uint64_t seed = 1;
};

// Bootstrap-sampled trees with sqrt(feature count) candidate features per
// split.
RandomForest fit_forest(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        const ForestOptions& opts);

// LSTM -> fully connected -> softmax over classes; windows are classified by
// the argmax of the per-step softmax averaged over the window's bins.
struct ClassifierNet {
  int hidden = 0, input = 0, n_classes = 0;
  Activation act = Activation::StandardTanh;
  std::vector<double> theta;
  std::vector<double> in_shift, in_scale;
  bool trained = false;

  lstmdetail::Layout layout() const { return lstmdetail::Layout::make(hidden, input, n_classes); }
};

ClassifierNet make_classifier_net(int hidden, int input, int n_classes, Activation act,
                                  std::uint64_t seed);

struct LabeledSequences {
  int n = 0, steps = 0, input = 0;
  std::vector<double> x;  // n*steps*input
  std::vector<int> y;     // n

  const double* window(int i) const { return x.data() + static_cast<std::size_t>(i) * steps * input; }
};

void set_classifier_normalization(ClassifierNet& net, std::span<const double> shift,
                                  std::span<const double> scale);
std::vector<double> train_classifier(ClassifierNet& net, const LabeledSequences& ds,
                                     const TrainOptions& opts);
std::vector<double> classifier_proba(const ClassifierNet& net, std::span<const double> window,
                                     int steps);
int classify_sequence(const ClassifierNet& net, std::span<const double> window, int steps);

// One label per complete window of window_len_s seconds.
std::vector<int> classify_windows(const RandomForest& forest, const FeatureSeries& series,
                                  double window_len_s);
std::vector<int> classify_windows(const ClassifierNet& net, const FeatureSeries& series,
                                  double window_len_s);

struct Evaluation {
  double accuracy = 0.0;
  std::map<int, double> recall;      // per actual class
  std::map<int, std::size_t> actual_count;
  std::size_t total = 0;
};

Evaluation evaluate_classification(std::span<const int> predictions, std::span<const int> truth);

}  // namespace predrx

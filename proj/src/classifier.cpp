#include "predrx/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "predrx/kernels.hpp"
#include "predrx/rng.hpp"

namespace predrx {

int DecisionTree::predict(std::span<const double> x) const {
  if (nodes.empty()) throw std::runtime_error("tree: not fitted");
  int idx = 0;
  while (!nodes[idx].leaf) {
    const TreeNode& n = nodes[idx];
    idx = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[idx].label;
}

namespace {

double gini(const std::map<int, int>& counts, int total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / total;
    g -= p * p;
  }
  return g;
}

int majority_label(const std::vector<int>& y, const std::vector<int>& idx) {
  std::map<int, int> counts;
  for (int i : idx) counts[y[i]]++;
  int best = 0, best_count = -1;
  for (const auto& [label, c] : counts)
    if (c > best_count) {  // map iterates labels ascending, so ties keep the smallest
      best = label;
      best_count = c;
    }
  return best;
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

SplitChoice best_split(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const std::vector<int>& idx, const std::vector<int>& features,
                       int min_leaf) {
  SplitChoice best;
  std::map<int, int> total_counts;
  for (int i : idx) total_counts[y[i]]++;
  const int n = static_cast<int>(idx.size());
  const double parent = gini(total_counts, n);

  for (int f : features) {
    std::vector<std::pair<double, int>> vals;  // (value, label)
    vals.reserve(idx.size());
    for (int i : idx) vals.emplace_back(x[i][f], y[i]);
    std::sort(vals.begin(), vals.end());

    std::map<int, int> left_counts;
    int left_n = 0;
    for (int cut = 0; cut + 1 < n; ++cut) {
      left_counts[vals[cut].second]++;
      ++left_n;
      if (vals[cut].first == vals[cut + 1].first) continue;
      if (left_n < min_leaf || n - left_n < min_leaf) continue;
      std::map<int, int> right_counts = total_counts;
      for (const auto& [label, c] : left_counts) {
        right_counts[label] -= c;
        if (right_counts[label] == 0) right_counts.erase(label);
      }
      const double g = parent -
                       (static_cast<double>(left_n) / n) * gini(left_counts, left_n) -
                       (static_cast<double>(n - left_n) / n) * gini(right_counts, n - left_n);
      // impure nodes split even on zero gain (an XOR pattern has no
      // first-level gain); features and thresholds ascend, so the first
      // maximum keeps the lowest (feature, threshold) on ties
      if (!best.found || g > best.gain + 1e-15) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (vals[cut].first + vals[cut + 1].first);
        best.gain = g;
      }
    }
  }
  return best;
}

int build_node(std::vector<TreeNode>& nodes, const std::vector<std::vector<double>>& x,
               const std::vector<int>& y, std::vector<int> idx, int depth,
               const TreeOptions& opts, Rng& rng) {
  TreeNode node;
  node.label = majority_label(y, idx);

  bool pure = true;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (y[idx[i]] != y[idx[0]]) {
      pure = false;
      break;
    }

  const int n_features = static_cast<int>(x[0].size());
  if (!pure && depth < opts.max_depth &&
      static_cast<int>(idx.size()) >= 2 * opts.min_samples_leaf) {
    std::vector<int> features;
    if (opts.features_per_split > 0 && opts.features_per_split < n_features) {
      std::vector<int> all(n_features);
      for (int i = 0; i < n_features; ++i) all[i] = i;
      for (int i = 0; i < opts.features_per_split; ++i) {
        const int j = static_cast<int>(rng.uniform_int(i, n_features - 1));
        std::swap(all[i], all[j]);
      }
      features.assign(all.begin(), all.begin() + opts.features_per_split);
      std::sort(features.begin(), features.end());
    } else {
      features.resize(n_features);
      for (int i = 0; i < n_features; ++i) features[i] = i;
    }

    const SplitChoice split = best_split(x, y, idx, features, opts.min_samples_leaf);
    if (split.found) {
      std::vector<int> left_idx, right_idx;
      for (int i : idx)
        (x[i][split.feature] <= split.threshold ? left_idx : right_idx).push_back(i);
      node.leaf = false;
      node.feature = split.feature;
      node.threshold = split.threshold;
      const int self = static_cast<int>(nodes.size());
      nodes.push_back(node);
      const int left = build_node(nodes, x, y, std::move(left_idx), depth + 1, opts, rng);
      const int right = build_node(nodes, x, y, std::move(right_idx), depth + 1, opts, rng);
      nodes[self].left = left;
      nodes[self].right = right;
      return self;
    }
  }

  const int self = static_cast<int>(nodes.size());
  nodes.push_back(node);
  return self;
}

}  // namespace

DecisionTree fit_tree(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      const TreeOptions& opts) {
  if (x.empty() || x.size() != y.size()) throw std::runtime_error("fit_tree: empty or mismatched training set");
  DecisionTree tree;
  tree.max_depth = opts.max_depth;
  tree.min_samples_leaf = opts.min_samples_leaf;
  Rng rng(opts.seed);
  std::vector<int> idx(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) idx[i] = static_cast<int>(i);
  build_node(tree.nodes, x, y, std::move(idx), 0, opts, rng);
  return tree;
}

int RandomForest::predict(std::span<const double> x) const {
  if (trees.empty()) throw std::runtime_error("forest: not fitted");
  std::map<int, int> votes;
  for (const DecisionTree& t : trees) votes[t.predict(x)]++;
  int best = 0, best_votes = -1;
  for (const auto& [label, v] : votes)
    if (v > best_votes) {
      best = label;
      best_votes = v;
    }
  return best;
}

RandomForest fit_forest(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                        const ForestOptions& opts) {
  if (x.empty() || x.size() != y.size())
    throw std::runtime_error("fit_forest: empty or mismatched training set");
  if (opts.k < 1) throw std::runtime_error("fit_forest: need at least one tree");
  RandomForest forest;
  forest.trees.reserve(opts.k);
  const int n = static_cast<int>(x.size());
  const int n_features = static_cast<int>(x[0].size());
  const int per_split = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(n_features))));

  for (int t = 0; t < opts.k; ++t) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::vector<double>> bx;
    std::vector<int> by;
    bx.reserve(n);
    by.reserve(n);
    for (int i = 0; i < n; ++i) {
      const int j = static_cast<int>(rng.uniform_int(0, n - 1));
      bx.push_back(x[j]);
      by.push_back(y[j]);
    }
    TreeOptions topt;
    topt.max_depth = opts.max_depth;
    topt.min_samples_leaf = opts.min_samples_leaf;
    topt.features_per_split = n_features > 1 ? per_split : 0;
    topt.seed = derive_seed(opts.seed, 0x10000u + static_cast<std::uint64_t>(t));
    forest.trees.push_back(fit_tree(bx, by, topt));
  }
  return forest;
}

ClassifierNet make_classifier_net(int hidden, int input, int n_classes, Activation act,
                                  std::uint64_t seed) {
  if (hidden < 1 || input < 1 || n_classes < 2)
    throw std::runtime_error("classifier: bad dimensions");
  ClassifierNet net;
  net.hidden = hidden;
  net.input = input;
  net.n_classes = n_classes;
  net.act = act;
  const auto L = net.layout();
  net.theta.assign(L.size, 0.0);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (int k = 0; k < 4; ++k) {
    for (int idx = 0; idx < hidden * input; ++idx) net.theta[L.w_off[k] + idx] = rng.uniform(-bound, bound);
    for (int idx = 0; idx < hidden * hidden; ++idx) net.theta[L.u_off[k] + idx] = rng.uniform(-bound, bound);
  }
  for (int idx = 0; idx < n_classes * hidden; ++idx) net.theta[L.v_off + idx] = rng.uniform(-bound, bound);
  return net;
}

namespace {

void softmax(std::span<double> v) {
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void norm_window(const ClassifierNet& net, const double* raw, int steps, double* out) {
  for (int t = 0; t < steps; ++t)
    for (int j = 0; j < net.input; ++j) {
      double v = raw[t * net.input + j];
      if (!net.in_shift.empty()) v = (v - net.in_shift[j]) / net.in_scale[j];
      out[t * net.input + j] = v;
    }
}

// Mean cross-entropy over every step of every window; per-step softmax.
double classifier_loss(const ClassifierNet& net, const LabeledSequences& ds, double* grad) {
  const auto L = net.layout();
  const int h = net.hidden, C = net.n_classes;
  lstmdetail::Work w;
  std::vector<double> logits(C), dh_steps;
  double loss = 0.0;
  const double inv = 1.0 / (static_cast<double>(ds.n) * ds.steps);

  for (int s = 0; s < ds.n; ++s) {
    const double* x = ds.window(s);
    lstmdetail::forward(net.theta.data(), L, net.act, x, ds.steps, w);
    if (grad) dh_steps.assign(static_cast<std::size_t>(ds.steps) * h, 0.0);
    for (int t = 0; t < ds.steps; ++t) {
      const double* ht = w.hs.data() + static_cast<std::size_t>(t) * h;
      std::memcpy(logits.data(), net.theta.data() + L.vb_off, sizeof(double) * C);
      kernels::matvec(net.theta.data() + L.v_off, C, h, ht, logits.data(), true);
      softmax(logits);
      const int label = ds.y[s];
      loss -= std::log(std::max(1e-300, logits[label])) * inv;
      if (grad) {
        // dlogits = (p - onehot) * inv
        logits[label] -= 1.0;
        for (double& v : logits) v *= inv;
        kernels::ger_acc(grad + L.v_off, C, h, logits.data(), ht);
        kernels::axpy(1.0, logits.data(), grad + L.vb_off, C);
        kernels::matvec_t_acc(net.theta.data() + L.v_off, C, h, logits.data(),
                              dh_steps.data() + static_cast<std::size_t>(t) * h);
      }
    }
    if (grad)
      lstmdetail::backward(net.theta.data(), L, net.act, x, ds.steps, w, dh_steps.data(), grad);
  }
  return loss;
}

}  // namespace

void set_classifier_normalization(ClassifierNet& net, std::span<const double> shift,
                                  std::span<const double> scale) {
  if (static_cast<int>(shift.size()) != net.input || static_cast<int>(scale.size()) != net.input)
    throw std::runtime_error("classifier: normalization size mismatch");
  net.in_shift.assign(shift.begin(), shift.end());
  net.in_scale.assign(scale.begin(), scale.end());
  for (double& s : net.in_scale)
    if (s == 0.0) s = 1.0;
}

std::vector<double> train_classifier(ClassifierNet& net, const LabeledSequences& ds,
                                     const TrainOptions& opts) {
  if (ds.n < 1) throw std::runtime_error("classifier: empty dataset");
  if (ds.input != net.input) throw std::runtime_error("classifier: input width mismatch");
  for (int label : ds.y)
    if (label < 0 || label >= net.n_classes)
      throw std::runtime_error("classifier: label out of range");
  const auto L = net.layout();
  std::vector<double> grad(L.size), velocity(L.size, 0.0), curve;
  curve.reserve(opts.epochs);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double loss = classifier_loss(net, ds, grad.data());
    if (!std::isfinite(loss))
      throw std::runtime_error("classifier: training diverged at epoch " + std::to_string(epoch) +
                               "; reduce the learning rate");
    curve.push_back(loss);
    const double norm = std::sqrt(kernels::sum_sq(grad.data(), L.size));
    const double scale = (opts.clip > 0 && norm > opts.clip) ? opts.clip / norm : 1.0;
    for (int i = 0; i < L.size; ++i) {
      velocity[i] = opts.momentum * velocity[i] + grad[i] * scale;
      net.theta[i] -= opts.lr * velocity[i];
    }
  }
  net.trained = true;
  return curve;
}

std::vector<double> classifier_proba(const ClassifierNet& net, std::span<const double> window,
                                     int steps) {
  if (static_cast<int>(window.size()) != steps * net.input)
    throw std::runtime_error("classifier: window size mismatch");
  const auto L = net.layout();
  lstmdetail::Work w;
  std::vector<double> x(window.size());
  norm_window(net, window.data(), steps, x.data());
  lstmdetail::forward(net.theta.data(), L, net.act, x.data(), steps, w);
  std::vector<double> mean(net.n_classes, 0.0), logits(net.n_classes);
  for (int t = 0; t < steps; ++t) {
    const double* ht = w.hs.data() + static_cast<std::size_t>(t) * net.hidden;
    std::memcpy(logits.data(), net.theta.data() + L.vb_off, sizeof(double) * net.n_classes);
    kernels::matvec(net.theta.data() + L.v_off, net.n_classes, net.hidden, ht, logits.data(), true);
    softmax(logits);
    for (int c = 0; c < net.n_classes; ++c) mean[c] += logits[c] / steps;
  }
  return mean;
}

int classify_sequence(const ClassifierNet& net, std::span<const double> window, int steps) {
  const std::vector<double> p = classifier_proba(net, window, steps);
  int best = 0;
  for (int c = 1; c < net.n_classes; ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

namespace {

int bins_per_window(const FeatureSeries& series, double window_len_s) {
  if (window_len_s <= 0) throw std::runtime_error("classify_windows: window length must be positive");
  const double ratio = window_len_s / series.tau_s;
  const int bins = static_cast<int>(std::llround(ratio));
  if (bins < 1 || std::fabs(ratio - bins) > 1e-9)
    throw std::runtime_error("classify_windows: window length must be a multiple of tau");
  return bins;
}

}  // namespace

std::vector<int> classify_windows(const RandomForest& forest, const FeatureSeries& series,
                                  double window_len_s) {
  const int per = bins_per_window(series, window_len_s);
  const auto idx = series.mask.indices();
  std::vector<int> out;
  for (std::size_t start = 0; start + per <= series.bins.size(); start += per) {
    std::vector<double> mean(idx.size(), 0.0);
    for (int b = 0; b < per; ++b)
      for (std::size_t j = 0; j < idx.size(); ++j)
        mean[j] += series.bins[start + b].field(idx[j]) / per;
    out.push_back(forest.predict(mean));
  }
  return out;
}

std::vector<int> classify_windows(const ClassifierNet& net, const FeatureSeries& series,
                                  double window_len_s) {
  const int per = bins_per_window(series, window_len_s);
  const auto idx = series.mask.indices();
  if (static_cast<int>(idx.size()) != net.input)
    throw std::runtime_error("classify_windows: feature count does not match the net input");
  std::vector<int> out;
  std::vector<double> window(static_cast<std::size_t>(per) * idx.size());
  for (std::size_t start = 0; start + per <= series.bins.size(); start += per) {
    for (int b = 0; b < per; ++b)
      for (std::size_t j = 0; j < idx.size(); ++j)
        window[static_cast<std::size_t>(b) * idx.size() + j] =
            series.bins[start + b].field(idx[j]);
    out.push_back(classify_sequence(net, window, per));
  }
  return out;
}

Evaluation evaluate_classification(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size() || truth.empty())
    throw std::runtime_error("evaluate_classification: length mismatch or empty");
  Evaluation ev;
  ev.total = truth.size();
  std::map<int, std::size_t> correct;
  std::size_t all_correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ev.actual_count[truth[i]]++;
    if (predictions[i] == truth[i]) {
      correct[truth[i]]++;
      ++all_correct;
    }
  }
  ev.accuracy = static_cast<double>(all_correct) / static_cast<double>(ev.total);
  for (const auto& [label, count] : ev.actual_count)
    ev.recall[label] = static_cast<double>(correct[label]) / static_cast<double>(count);
  return ev;
}

}  // namespace predrx

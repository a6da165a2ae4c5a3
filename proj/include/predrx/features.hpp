#pragma once

#include <array>
#include <string>
#include <vector>

#include "predrx/trace.hpp"

namespace predrx {

// Per-bin features. Field order is the canonical feature index used by masks
// and serialized matrices.
struct FeatureVector {
  double num_ul = 0;
  double num_dl = 0;
  double size_ul = 0;
  double size_dl = 0;
  double ratio = 1.0;         // (num_ul + 1) / (num_dl + 1)
  double udp_fraction = 0.0;  // UDP packets / max(1, packets)

  double field(int i) const;
};

inline constexpr int kNumFeatures = 6;
extern const std::array<std::string, kNumFeatures> kFeatureNames;
inline constexpr int kTargetNumUl = 0;

enum class FeatureSetId { FS1, FS2, FS3, FS4, FS5, FS6 };

FeatureSetId parse_feature_set(const std::string& s);  // "FS1".."FS6" or "1".."6"
std::string to_string(FeatureSetId id);

struct FeatureSetMask {
  std::array<bool, kNumFeatures> included{};
  std::string name = "custom";

  static FeatureSetMask standard(FeatureSetId id);
  static FeatureSetMask all();
  int count() const;
  std::vector<int> indices() const;
};

struct FeatureSeries {
  double tau_s = 0.0;
  std::vector<FeatureVector> bins;
  FeatureSetMask mask = FeatureSetMask::all();
  int target_field = kTargetNumUl;

  std::size_t size() const { return bins.size(); }
  // Row-major matrix of the masked features, one row per bin.
  std::vector<std::vector<double>> matrix() const;
  std::vector<double> target() const;
};

FeatureSeries bin_trace(const Trace& trace, double tau_s);
FeatureSeries apply_mask(const FeatureSeries& series, const FeatureSetMask& mask);

struct SplitResult {
  FeatureSeries train;
  FeatureSeries test;
};
SplitResult split_experiment(const FeatureSeries& series, std::size_t train_len,
                             std::size_t test_len, std::size_t start);

void save_feature_series(const FeatureSeries& series, const std::string& path,
                         const std::vector<int>* labels = nullptr);
FeatureSeries load_feature_series(const std::string& path, double tau_s);

}  // namespace predrx

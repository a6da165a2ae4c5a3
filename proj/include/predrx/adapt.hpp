#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "predrx/classifier.hpp"
#include "predrx/drx.hpp"
#include "predrx/lstm.hpp"
#include "predrx/trace.hpp"

namespace predrx {

// Entry ranges of the 7-vector: four single-TTI labels, then label sums over
// the last 10, 100, and 1000 TTIs (windows include the most recent TTIs;
// missing history pads with the zero-traffic label 1).
inline constexpr std::array<double, 7> kSnapshotLo = {1, 1, 1, 1, 10, 100, 1000};
inline constexpr std::array<double, 7> kSnapshotHi = {9, 9, 9, 9, 90, 900, 9000};

struct TrafficSnapshot {
  std::array<double, 7> e{};
};

// labels_before_t holds every label strictly before the decision TTI,
// oldest first.
TrafficSnapshot snapshot(std::span<const int> labels_before_t);

struct PredictionVector {
  std::array<double, 7> e{};

  double x_short() const { return e[0] + e[1] + e[2] + e[3] + e[4]; }
  double x_long() const { return e[5] + e[6]; }
};

// Mirror of snapshot() over the future side of t (used by oracle labeling
// and to build training targets for F).
PredictionVector future_vector(std::span<const int> labels_from_t);

// F: 7-entry snapshot -> 7-entry prediction, outputs clamped to the entry
// ranges. The net is a RegressionNet with a one-step input window.
PredictionVector predict_F(const RegressionNet& net, const TrafficSnapshot& snap);

struct AdaptTrainOptions {
  int hidden = 16;
  int epochs = 80;
  double lr = 0.02;
  double clip = 1.0;
  std::uint64_t seed = 1;
  int max_samples = 3000;
  Activation act = Activation::StandardTanh;
};

RegressionNet train_adapt_net(std::span<const int> labels, const AdaptTrainOptions& opts);

// Normalized activity scores on a 0..10 scale: s = (x - lo) / (hi - lo) * 10,
// clamped. Defaults mirror configs/drx_compare.cfg; the long anchors sit at
// the same relative position of the attainable range as the short ones.
struct ScorerConfig {
  double short_lo = 14.0, short_hi = 86.0;
  double long_lo = 1100.0, long_hi = 6757.142857142857;
  double boundary_long = 3.0;   // root split
  double boundary_short = 8.0;  // leaf splits
};

struct MappingH {
  enum class Kind { ThresholdTable, Tree };
  Kind kind = Kind::ThresholdTable;
  ScorerConfig scorer;
  DecisionTree tree;  // over (x_short, x_long) when kind == Tree

  int decide(const PredictionVector& pv) const;  // DRX set id 1..4
  static MappingH default_table(ScorerConfig scorer = {});
};

double short_score(const ScorerConfig& s, double x_short);
double long_score(const ScorerConfig& s, double x_long);

// One oracle context: the prediction H would see plus the delay/energy each
// candidate set incurred over the context's future window, normalized to
// [0,1] across the four sets.
struct OracleRun {
  PredictionVector pv;
  std::array<double, 4> delay_norm{};
  std::array<double, 4> energy_norm{};
};

inline constexpr std::array<int, 4> kDrxSetIds = {1, 2, 3, 4};

int best_set(const OracleRun& run, double omega);

struct OracleOptions {
  std::uint64_t window_ttis = 3000;
  std::uint64_t stride_ttis = 1000;
  double rate_bps = 1e6;
  int tti_ms = 1;
  PowerModel power;
  const RegressionNet* net = nullptr;  // null: prediction = true future vector
};

std::vector<OracleRun> build_oracle_runs(std::span<const int> labels,
                                         const std::vector<TimedArrival>& arrivals,
                                         const OracleOptions& opts);

// Fits a depth-limited decision tree over (x_short, x_long) labeled with the
// omega-weighted best set of each oracle run.
MappingH train_H(std::span<const OracleRun> runs, double omega, ScorerConfig scorer = {});

struct DecisionRecord {
  std::uint64_t tti = 0;
  double x_short = 0.0;
  double x_long = 0.0;
  int set_id = 0;
};

// Per-UE online state of the adaptation loop: keeps the recent label window,
// re-runs the decision every epoch, and records the decision log.
class AdaptController {
 public:
  AdaptController(RegressionNet net, MappingH mapping, QuantizationScheme scheme,
                  std::uint64_t epoch_ttis = 1000, int initial_set = 2);

  // called once per TTI with that TTI's arrival byte total
  void push_tti_bytes(std::int64_t bytes);
  bool decision_due(std::uint64_t tti) const { return tti % epoch_ttis_ == 0; }
  int decide_now(std::uint64_t tti);
  int current_set() const { return current_set_; }
  const std::vector<DecisionRecord>& log() const { return log_; }

 private:
  RegressionNet net_;
  MappingH mapping_;
  QuantizationScheme scheme_;
  std::uint64_t epoch_ttis_;
  int current_set_;
  std::vector<int> history_;  // ring of the last 1000 labels
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::vector<DecisionRecord> log_;
};

}  // namespace predrx

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "predrx/classifier.hpp"
#include "predrx/config.hpp"
#include "predrx/metrics.hpp"
#include "predrx/sim.hpp"
#include "predrx/trace.hpp"

namespace predrx {

// Mixed-activity single-user trace: application sessions of random class and
// length separated by idle gaps. Unlabeled, like a capture of normal use.
Trace make_user_trace(double duration_s, std::uint64_t seed);
Trace make_user_trace(double duration_s, std::uint64_t seed, const Config& synth_cfg);

// Bounded worker pool; jobs are independent and collected by index.
void parallel_for(int jobs, int workers, const std::function<void(int)>& fn);

struct PredictSweepResult {
  MetricTable table;
};

struct ClassifyFoldsResult {
  MetricTable table;
  // pooled over folds, keyed "<model>_FS<k>"
  std::map<std::string, Evaluation> pooled;
  // per fold and feature set: |accuracy - sum(share*recall)| for the LSTM
  std::vector<double> identity_residuals;
};

struct DrxCompareResult {
  MetricTable table;
  std::vector<SimReport> reports;
};

PredictSweepResult run_predict_sweep(const Config& cfg, const std::string& out_dir);
ClassifyFoldsResult run_classify_folds(const Config& cfg, const std::string& out_dir);
DrxCompareResult run_drx_compare(const Config& cfg, const std::string& out_dir);

// Dispatches on kind = predict_sweep | classify_folds | drx_compare.
MetricTable run_experiment(const Config& cfg, const std::string& out_dir);

// Scheme runners shared by the sweep and the CLI. Series slices are
// (train, test) with the fitted model evaluated by rolling one-step
// prediction (horizon 1) or anchored multi-step forecasts (horizon > 1).
struct PredictOutcome {
  double rmse = 0.0;
  double relative_rmse = 0.0;
};

PredictOutcome eval_persistence(const FeatureSeries& train, const FeatureSeries& test,
                                int horizon);
PredictOutcome eval_arima_grid(const FeatureSeries& train, const FeatureSeries& test, int horizon,
                               int p_max, int d_max, int q_max);

struct LstmEvalOptions {
  int window_bins = 20;
  int hidden = 24;
  int epochs = 60;
  double lr = 0.02;
  double clip = 1.0;
  int max_windows = 240;
  std::uint64_t seed = 1;
  Activation act = Activation::StandardTanh;
};

struct LstmEvalDetail {
  RegressionNet net;
  std::vector<double> loss_curve;
};

PredictOutcome eval_lstm(const FeatureSeries& train, const FeatureSeries& test,
                         const FeatureSetMask& mask, int horizon, const LstmEvalOptions& opts,
                         LstmEvalDetail* detail = nullptr);

}  // namespace predrx

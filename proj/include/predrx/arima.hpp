#pragma once

#include <span>
#include <string>
#include <vector>

namespace predrx {

struct ArimaOrders {
  int p = 0;
  int d = 0;
  int q = 0;

  int sum() const { return p + d + q; }
};

// ARIMA(p,d,q) fitted by conditional least squares on the d-times differenced
// series. The model keeps the state needed for iterated forecasting and
// rolling one-step evaluation: the centered observation/residual tails and
// the last value of every differencing level.
struct ArimaModel {
  ArimaOrders orders;
  std::vector<double> ar;  // alpha_1..alpha_p
  std::vector<double> ma;  // beta_1..beta_q
  double intercept = 0.0;  // c, fitted on the centered series
  double mean = 0.0;       // mu of the differenced series
  bool converged = true;
  int iterations = 0;
  std::string diagnostics;
  std::vector<double> residuals;  // training one-step residuals (diagnostics)

  std::vector<double> obs_tail;    // last p centered differenced values, oldest first
  std::vector<double> resid_tail;  // last q residuals, oldest first
  std::vector<double> level_last;  // last value of each differencing level 0..d

  // One-step-ahead forecast on the raw scale.
  double one_step() const;
  // Advance the state with an observed raw value.
  void observe(double x_raw);
  // Iterated multi-step forecast with future shocks set to zero.
  std::vector<double> forecast(int horizon) const;
};

// d-th order differencing; length shrinks by d, d = 0 is the identity.
std::vector<double> difference(std::span<const double> series, int d);

// Inverse of difference() given the first value of each level 0..d-1.
std::vector<double> undifference_prefix(std::span<const double> diffed,
                                        std::span<const double> initials);

ArimaModel fit_arima(std::span<const double> train, ArimaOrders orders);

// The last-observation baseline: AR(1) with the coefficient pinned to one
// and no constant, never fitted.
ArimaModel persistence_model(std::span<const double> history);

// One-step predictions over a continuation of the training series; the model
// state advances with each observed value.
std::vector<double> rolling_one_step(ArimaModel model, std::span<const double> continuation);

struct GridEntry {
  ArimaOrders orders;
  double rmse = 0.0;
  bool converged = false;
  std::string diagnostics;
};

struct GridResult {
  ArimaOrders best;
  double best_rmse = 0.0;
  std::vector<GridEntry> table;
};

GridResult grid_search(std::span<const double> train, std::span<const double> validation,
                       std::span<const int> p_range, std::span<const int> d_range,
                       std::span<const int> q_range);

void save_rmse_table(const GridResult& result, const std::string& path);

}  // namespace predrx

#pragma once

#include <span>
#include <string>
#include <vector>

#include "predrx/sim.hpp"

namespace predrx {

double rmse(std::span<const double> predictions, std::span<const double> truth);

// rmse / mean(truth); NaN when the mean is not positive.
double relative_rmse(std::span<const double> predictions, std::span<const double> truth);

// Empirical CDF over per-packet delays at the grid points; packets still
// buffered at the end count as censored above every grid value.
std::vector<double> delay_cdf(std::span<const double> delays_ms, std::uint64_t censored,
                              std::span<const double> grid_ms);
std::vector<double> delay_cdf(const SimReport& report, std::span<const double> grid_ms);

struct PowerSummary {
  std::vector<double> per_ue_mw;
  double fleet_mean_mw = 0.0;
};

PowerSummary average_power(const SimReport& report);

double median(std::vector<double> values);

struct MetricRow {
  std::string experiment;
  std::string scheme;
  std::string axis;
  double axis_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  int reps = 0;
};

struct MetricTable {
  std::vector<MetricRow> rows;

  void add(MetricRow row) { rows.push_back(std::move(row)); }
  const MetricRow* find(const std::string& scheme, double axis_value,
                        const std::string& metric) const;
  void save(const std::string& path) const;
  static MetricTable load(const std::string& path);
};

// mean/stddev over repetition values
MetricRow aggregate(const std::string& experiment, const std::string& scheme,
                    const std::string& axis, double axis_value, const std::string& metric,
                    std::span<const double> values);

}  // namespace predrx

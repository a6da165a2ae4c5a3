#include "predrx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "predrx/csv.hpp"

namespace predrx {

double rmse(std::span<const double> predictions, std::span<const double> truth) {
  if (predictions.size() != truth.size() || truth.empty())
    throw std::runtime_error("rmse: length mismatch or empty input");
  double se = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predictions[i] - truth[i];
    se += e * e;
  }
  return std::sqrt(se / static_cast<double>(truth.size()));
}

double relative_rmse(std::span<const double> predictions, std::span<const double> truth) {
  double m = 0.0;
  for (double v : truth) m += v;
  m /= static_cast<double>(truth.size());
  if (m <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return rmse(predictions, truth) / m;
}

std::vector<double> delay_cdf(std::span<const double> delays_ms, std::uint64_t censored,
                              std::span<const double> grid_ms) {
  const std::uint64_t total = delays_ms.size() + censored;
  if (total == 0) throw std::runtime_error("delay_cdf: no packets");
  std::vector<double> sorted(delays_ms.begin(), delays_ms.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cdf;
  cdf.reserve(grid_ms.size());
  for (double g : grid_ms) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), g);
    cdf.push_back(static_cast<double>(it - sorted.begin()) / static_cast<double>(total));
  }
  return cdf;
}

std::vector<double> delay_cdf(const SimReport& report, std::span<const double> grid_ms) {
  const std::vector<double> d = report.delays_ms();
  return delay_cdf(d, report.total_undelivered(), grid_ms);
}

PowerSummary average_power(const SimReport& report) {
  if (report.duration_ttis == 0) throw std::runtime_error("average_power: zero duration");
  PowerSummary s;
  const double seconds = report.duration_s();
  for (const UeReport& u : report.ues) {
    s.per_ue_mw.push_back(u.energy_mj / seconds);
    s.fleet_mean_mw += u.energy_mj / seconds;
  }
  if (!s.per_ue_mw.empty()) s.fleet_mean_mw /= static_cast<double>(s.per_ue_mw.size());
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::runtime_error("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const MetricRow* MetricTable::find(const std::string& scheme, double axis_value,
                                   const std::string& metric) const {
  for (const MetricRow& r : rows)
    if (r.scheme == scheme && r.metric == metric && std::fabs(r.axis_value - axis_value) < 1e-9)
      return &r;
  return nullptr;
}

void MetricTable::save(const std::string& path) const {
  csv::Writer w(path);
  w.header({"experiment", "scheme", "axis", "axis_value", "metric", "mean", "stddev", "reps"});
  for (const MetricRow& r : rows)
    w.row({r.experiment, r.scheme, r.axis, csv::fmt(r.axis_value), r.metric, csv::fmt(r.mean),
           csv::fmt(r.stddev), std::to_string(r.reps)});
  w.close();
}

MetricTable MetricTable::load(const std::string& path) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() != 8) throw std::runtime_error("metrics: " + path + ": unexpected header");
  MetricTable table;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const int line = t.row_lines[i];
    if (row.size() != 8)
      throw std::runtime_error("metrics: line " + std::to_string(line) + ": expected 8 fields");
    MetricRow r;
    r.experiment = row[0];
    r.scheme = row[1];
    r.axis = row[2];
    r.axis_value = csv::parse_double(row[3], "axis_value", line);
    r.metric = row[4];
    r.mean = csv::parse_double(row[5], "mean", line);
    r.stddev = csv::parse_double(row[6], "stddev", line);
    r.reps = static_cast<int>(csv::parse_int(row[7], "reps", line));
    table.rows.push_back(std::move(r));
  }
  return table;
}

MetricRow aggregate(const std::string& experiment, const std::string& scheme,
                    const std::string& axis, double axis_value, const std::string& metric,
                    std::span<const double> values) {
  if (values.empty()) throw std::runtime_error("aggregate: no repetition values");
  MetricRow r;
  r.experiment = experiment;
  r.scheme = scheme;
  r.axis = axis;
  r.axis_value = axis_value;
  r.metric = metric;
  r.reps = static_cast<int>(values.size());
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - m) * (v - m);
  var /= static_cast<double>(values.size());
  r.mean = m;
  r.stddev = std::sqrt(var);
  return r;
}

}  // namespace predrx

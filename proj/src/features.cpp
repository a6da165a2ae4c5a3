#include "predrx/features.hpp"

#include <cmath>
#include <stdexcept>

#include "predrx/csv.hpp"

namespace predrx {

const std::array<std::string, kNumFeatures> kFeatureNames = {
    "num_ul", "num_dl", "size_ul", "size_dl", "ratio", "udp_fraction"};

double FeatureVector::field(int i) const {
  switch (i) {
    case 0: return num_ul;
    case 1: return num_dl;
    case 2: return size_ul;
    case 3: return size_dl;
    case 4: return ratio;
    case 5: return udp_fraction;
    default: throw std::out_of_range("feature index");
  }
}

FeatureSetId parse_feature_set(const std::string& s) {
  std::string v = s;
  if (v.size() > 2 && (v[0] == 'F' || v[0] == 'f')) v = v.substr(2);
  if (v == "1") return FeatureSetId::FS1;
  if (v == "2") return FeatureSetId::FS2;
  if (v == "3") return FeatureSetId::FS3;
  if (v == "4") return FeatureSetId::FS4;
  if (v == "5") return FeatureSetId::FS5;
  if (v == "6") return FeatureSetId::FS6;
  throw std::runtime_error("features: unknown feature set '" + s + "'");
}

std::string to_string(FeatureSetId id) {
  return "FS" + std::to_string(static_cast<int>(id) + 1);
}

FeatureSetMask FeatureSetMask::standard(FeatureSetId id) {
  FeatureSetMask m;
  m.name = to_string(id);
  switch (id) {
    case FeatureSetId::FS1: m.included = {true, true, true, true, true, false}; break;
    case FeatureSetId::FS2: m.included = {true, false, false, false, true, false}; break;
    case FeatureSetId::FS3: m.included = {true, false, false, false, false, false}; break;
    case FeatureSetId::FS4: m.included = {true, true, false, false, true, false}; break;
    case FeatureSetId::FS5: m.included = {true, true, false, false, false, false}; break;
    case FeatureSetId::FS6: m.included = {true, true, false, false, false, true}; break;
  }
  return m;
}

FeatureSetMask FeatureSetMask::all() {
  FeatureSetMask m;
  m.name = "ALL";
  m.included = {true, true, true, true, true, true};
  return m;
}

int FeatureSetMask::count() const {
  int n = 0;
  for (bool b : included) n += b ? 1 : 0;
  return n;
}

std::vector<int> FeatureSetMask::indices() const {
  std::vector<int> idx;
  for (int i = 0; i < kNumFeatures; ++i)
    if (included[i]) idx.push_back(i);
  return idx;
}

std::vector<std::vector<double>> FeatureSeries::matrix() const {
  const auto idx = mask.indices();
  std::vector<std::vector<double>> rows;
  rows.reserve(bins.size());
  for (const FeatureVector& fv : bins) {
    std::vector<double> row(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) row[j] = fv.field(idx[j]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> FeatureSeries::target() const {
  std::vector<double> out(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) out[i] = bins[i].field(target_field);
  return out;
}

FeatureSeries bin_trace(const Trace& trace, double tau_s) {
  if (tau_s <= 0) throw std::runtime_error("bin_trace: tau must be positive");
  FeatureSeries series;
  series.tau_s = tau_s;
  const std::size_t n = static_cast<std::size_t>(std::ceil(trace.duration_s / tau_s));
  series.bins.assign(n, FeatureVector{});
  if (n == 0) return series;

  std::vector<double> udp_count(n, 0.0), total_count(n, 0.0);
  for (const PacketRecord& r : trace.records) {
    auto idx = static_cast<std::size_t>(r.timestamp_s / tau_s);
    if (idx >= n) idx = n - 1;
    FeatureVector& fv = series.bins[idx];
    if (r.dir == Direction::UL) {
      fv.num_ul += 1;
      fv.size_ul += static_cast<double>(r.size_bytes);
    } else {
      fv.num_dl += 1;
      fv.size_dl += static_cast<double>(r.size_bytes);
    }
    total_count[idx] += 1;
    if (r.proto == Protocol::UDP) udp_count[idx] += 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector& fv = series.bins[i];
    fv.ratio = (fv.num_ul + 1.0) / (fv.num_dl + 1.0);
    fv.udp_fraction = udp_count[i] / std::max(1.0, total_count[i]);
  }
  return series;
}

FeatureSeries apply_mask(const FeatureSeries& series, const FeatureSetMask& mask) {
  if (mask.count() == 0) throw std::runtime_error("apply_mask: mask excludes every feature");
  if (!mask.included[series.target_field] && series.target_field != kTargetNumUl)
    throw std::runtime_error("apply_mask: mask excludes the prediction target");
  FeatureSeries out = series;
  out.mask = mask;
  return out;
}

SplitResult split_experiment(const FeatureSeries& series, std::size_t train_len,
                             std::size_t test_len, std::size_t start) {
  if (start + train_len + test_len > series.bins.size())
    throw std::runtime_error("split_experiment: slice extends past the series end");
  SplitResult r;
  r.train.tau_s = r.test.tau_s = series.tau_s;
  r.train.mask = r.test.mask = series.mask;
  r.train.target_field = r.test.target_field = series.target_field;
  r.train.bins.assign(series.bins.begin() + start, series.bins.begin() + start + train_len);
  r.test.bins.assign(series.bins.begin() + start + train_len,
                     series.bins.begin() + start + train_len + test_len);
  return r;
}

void save_feature_series(const FeatureSeries& series, const std::string& path,
                         const std::vector<int>* labels) {
  if (labels && labels->size() != series.bins.size())
    throw std::runtime_error("save_feature_series: label count mismatch");
  csv::Writer w(path);
  std::vector<std::string> header{"bin_index", "num_ul", "num_dl", "size_ul",
                                  "size_dl",   "ratio",  "udp_fraction"};
  if (labels) header.push_back("label");
  w.header(header);
  for (std::size_t i = 0; i < series.bins.size(); ++i) {
    const FeatureVector& fv = series.bins[i];
    std::vector<std::string> row{std::to_string(i),          csv::fmt(fv.num_ul),
                                 csv::fmt(fv.num_dl),        csv::fmt(fv.size_ul),
                                 csv::fmt(fv.size_dl),       csv::fmt(fv.ratio),
                                 csv::fmt(fv.udp_fraction)};
    if (labels) row.push_back(std::to_string((*labels)[i]));
    w.row(row);
  }
  w.close();
}

FeatureSeries load_feature_series(const std::string& path, double tau_s) {
  csv::Table t = csv::read_file(path);
  if (t.header.size() < 7)
    throw std::runtime_error("features: " + path + ": unexpected header");
  FeatureSeries series;
  series.tau_s = tau_s;
  series.bins.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const int line = t.row_lines[i];
    if (row.size() < 7)
      throw std::runtime_error("features: line " + std::to_string(line) + ": expected 7+ fields");
    FeatureVector fv;
    fv.num_ul = csv::parse_double(row[1], "num_ul", line);
    fv.num_dl = csv::parse_double(row[2], "num_dl", line);
    fv.size_ul = csv::parse_double(row[3], "size_ul", line);
    fv.size_dl = csv::parse_double(row[4], "size_dl", line);
    fv.ratio = csv::parse_double(row[5], "ratio", line);
    fv.udp_fraction = csv::parse_double(row[6], "udp_fraction", line);
    series.bins.push_back(fv);
  }
  return series;
}

}  // namespace predrx

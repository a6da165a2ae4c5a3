#include "predrx/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predrx {

namespace {

double label_at(std::span<const int> labels, std::ptrdiff_t idx) {
  return idx >= 0 && idx < static_cast<std::ptrdiff_t>(labels.size())
             ? static_cast<double>(labels[idx])
             : 1.0;  // zero-traffic padding
}

std::array<double, 7> windowed_entries(std::span<const int> labels, bool forward) {
  // forward: windows start at index 0 and extend right; otherwise they end at
  // the last index and extend left.
  std::array<double, 7> e{};
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
  for (int k = 0; k < 4; ++k)
    e[k] = forward ? label_at(labels, k) : label_at(labels, n - 1 - k);
  const std::array<int, 3> windows = {10, 100, 1000};
  for (int w = 0; w < 3; ++w) {
    double sum = 0.0;
    for (int k = 0; k < windows[w]; ++k)
      sum += forward ? label_at(labels, k) : label_at(labels, n - 1 - k);
    e[4 + w] = sum;
  }
  return e;
}

}  // namespace

TrafficSnapshot snapshot(std::span<const int> labels_before_t) {
  TrafficSnapshot s;
  s.e = windowed_entries(labels_before_t, false);
  return s;
}

PredictionVector future_vector(std::span<const int> labels_from_t) {
  PredictionVector pv;
  pv.e = windowed_entries(labels_from_t, true);
  return pv;
}

PredictionVector predict_F(const RegressionNet& net, const TrafficSnapshot& snap) {
  if (!net.trained) throw std::runtime_error("adapt: prediction net has not been trained");
  if (net.input != 7 || net.output != 7)
    throw std::runtime_error("adapt: F must be a 7-in/7-out net");
  const std::vector<double> out = predict(net, std::span(snap.e.data(), 7), 1, 7);
  PredictionVector pv;
  for (int k = 0; k < 7; ++k) pv.e[k] = std::clamp(out[k], kSnapshotLo[k], kSnapshotHi[k]);
  return pv;
}

RegressionNet train_adapt_net(std::span<const int> labels, const AdaptTrainOptions& opts) {
  const std::uint64_t need = 1000;  // longest future window
  if (labels.size() < 2 * need)
    throw std::runtime_error("adapt: label stream too short to train F");

  const std::size_t first_t = 1;
  const std::size_t last_t = labels.size() - need;
  std::size_t stride = 1;
  const std::size_t span_len = last_t - first_t;
  if (opts.max_samples > 0 && span_len > static_cast<std::size_t>(opts.max_samples))
    stride = span_len / static_cast<std::size_t>(opts.max_samples);

  SequenceDataset ds;
  ds.steps = 1;
  ds.input = 7;
  ds.output = 7;
  for (std::size_t t = first_t; t < last_t; t += stride) {
    const TrafficSnapshot s = snapshot(labels.subspan(0, t));
    const PredictionVector f = future_vector(labels.subspan(t));
    for (int k = 0; k < 7; ++k) {
      ds.x.push_back((s.e[k] - kSnapshotLo[k]) / (kSnapshotHi[k] - kSnapshotLo[k]));
      ds.y.push_back((f.e[k] - kSnapshotLo[k]) / (kSnapshotHi[k] - kSnapshotLo[k]));
    }
    ++ds.n;
  }

  RegressionNet net = make_regression_net(opts.hidden, 7, 7, opts.act, opts.seed);
  std::array<double, 7> lo = kSnapshotLo, range{};
  for (int k = 0; k < 7; ++k) range[k] = kSnapshotHi[k] - kSnapshotLo[k];
  set_input_normalization(net, std::span(lo.data(), 7), std::span(range.data(), 7));
  set_output_normalization(net, std::span(lo.data(), 7), std::span(range.data(), 7));

  TrainOptions topt;
  topt.epochs = opts.epochs;
  topt.lr = opts.lr;
  topt.clip = opts.clip;
  train_regression(net, ds, topt);
  return net;
}

double short_score(const ScorerConfig& s, double x_short) {
  return std::clamp((x_short - s.short_lo) / (s.short_hi - s.short_lo) * 10.0, 0.0, 10.0);
}

double long_score(const ScorerConfig& s, double x_long) {
  return std::clamp((x_long - s.long_lo) / (s.long_hi - s.long_lo) * 10.0, 0.0, 10.0);
}

int MappingH::decide(const PredictionVector& pv) const {
  if (kind == Kind::Tree) {
    const std::array<double, 2> x{pv.x_short(), pv.x_long()};
    return tree.predict(std::span(x.data(), 2));
  }
  const double sl = long_score(scorer, pv.x_long());
  const double ss = short_score(scorer, pv.x_short());
  if (sl <= scorer.boundary_long) return ss <= scorer.boundary_short ? 2 : 1;
  return ss <= scorer.boundary_short ? 4 : 3;
}

MappingH MappingH::default_table(ScorerConfig scorer) {
  MappingH h;
  h.kind = Kind::ThresholdTable;
  h.scorer = scorer;
  return h;
}

int best_set(const OracleRun& run, double omega) {
  if (omega < 0.0 || omega > 1.0) throw std::runtime_error("adapt: omega must lie in [0,1]");
  // preference orders by sleep aggressiveness (idle duty-cycle power) for
  // the tie-breaks: energy-first when omega < 0.5, delay-first otherwise
  static constexpr std::array<int, 4> kEnergyOrder = {2, 4, 1, 3};
  static constexpr std::array<int, 4> kDelayOrder = {3, 1, 4, 2};
  const auto& order = omega < 0.5 ? kEnergyOrder : kDelayOrder;

  double best_score = 0.0;
  int best_id = -1;
  for (int id : order) {
    const int i = id - 1;
    const double score = omega * run.delay_norm[i] + (1.0 - omega) * run.energy_norm[i];
    if (best_id < 0 || score < best_score - 1e-12) {
      best_id = id;
      best_score = score;
    }
  }
  return best_id;
}

std::vector<OracleRun> build_oracle_runs(std::span<const int> labels,
                                         const std::vector<TimedArrival>& arrivals,
                                         const OracleOptions& opts) {
  if (labels.empty()) throw std::runtime_error("adapt: empty label stream");
  std::vector<OracleRun> runs;
  const std::uint64_t W = opts.window_ttis;
  for (std::uint64_t t = opts.stride_ttis; t + W <= labels.size(); t += opts.stride_ttis) {
    OracleRun run;
    if (opts.net) {
      run.pv = predict_F(*opts.net, snapshot(labels.subspan(0, t)));
    } else {
      run.pv = future_vector(labels.subspan(t));
    }

    // future arrivals shifted into the window's local clock
    std::vector<TimedArrival> window;
    for (const TimedArrival& a : arrivals)
      if (a.tti >= t && a.tti < t + W) window.push_back({a.tti - t, a.size_bytes});

    std::array<double, 4> delay{}, energy{};
    for (int i = 0; i < 4; ++i) {
      const SingleUeResult r = run_single_ue(DrxConfig::table_set(kDrxSetIds[i]), opts.power,
                                             window, W, opts.rate_bps, opts.tti_ms);
      double d = 0.0;
      for (const DeliveryEvent& ev : r.deliveries)
        d += static_cast<double>(ev.delivery_tti - ev.enq_tti);
      d += static_cast<double>(r.undelivered) * static_cast<double>(W);  // censored
      const std::size_t n = r.deliveries.size() + r.undelivered;
      delay[i] = n > 0 ? d / static_cast<double>(n) : 0.0;
      energy[i] = r.energy_uj;
    }
    const auto norm = [](std::array<double, 4>& v) {
      const double lo = *std::min_element(v.begin(), v.end());
      const double hi = *std::max_element(v.begin(), v.end());
      for (double& x : v) x = hi > lo ? (x - lo) / (hi - lo) : 0.0;
    };
    norm(delay);
    norm(energy);
    run.delay_norm = delay;
    run.energy_norm = energy;
    runs.push_back(run);
  }
  return runs;
}

MappingH train_H(std::span<const OracleRun> runs, double omega, ScorerConfig scorer) {
  if (runs.empty()) throw std::runtime_error("train_H: empty oracle set");
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  x.reserve(runs.size());
  for (const OracleRun& run : runs) {
    x.push_back({run.pv.x_short(), run.pv.x_long()});
    y.push_back(best_set(run, omega));
  }
  TreeOptions topt;
  topt.max_depth = 3;
  topt.min_samples_leaf = 1;
  topt.seed = 1;
  MappingH h;
  h.kind = MappingH::Kind::Tree;
  h.scorer = scorer;
  h.tree = fit_tree(x, y, topt);
  return h;
}

AdaptController::AdaptController(RegressionNet net, MappingH mapping, QuantizationScheme scheme,
                                 std::uint64_t epoch_ttis, int initial_set)
    : net_(std::move(net)),
      mapping_(std::move(mapping)),
      scheme_(std::move(scheme)),
      epoch_ttis_(epoch_ttis),
      current_set_(initial_set),
      history_(1000, 1) {
  if (epoch_ttis_ == 0) throw std::runtime_error("adapt: decision epoch must be positive");
  scheme_.validate();
}

void AdaptController::push_tti_bytes(std::int64_t bytes) {
  history_[head_] = scheme_.label(bytes);
  head_ = (head_ + 1) % history_.size();
  if (filled_ < history_.size()) ++filled_;
}

int AdaptController::decide_now(std::uint64_t tti) {
  // materialize the ring oldest-first
  std::vector<int> ordered;
  ordered.reserve(filled_);
  const std::size_t n = history_.size();
  for (std::size_t i = 0; i < filled_; ++i)
    ordered.push_back(history_[(head_ + n - filled_ + i) % n]);
  const PredictionVector pv = predict_F(net_, snapshot(ordered));
  current_set_ = mapping_.decide(pv);
  log_.push_back({tti, pv.x_short(), pv.x_long(), current_set_});
  return current_set_;
}

}  // namespace predrx

#include "predrx/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "predrx/arima.hpp"
#include "predrx/csv.hpp"
#include "predrx/rng.hpp"

namespace predrx {

namespace fs = std::filesystem;

Trace make_user_trace(double duration_s, std::uint64_t seed) {
  Config empty;
  return make_user_trace(duration_s, seed, empty);
}

Trace make_user_trace(double duration_s, std::uint64_t seed, const Config& synth_cfg) {
  if (duration_s <= 0) throw std::runtime_error("make_user_trace: duration must be positive");
  Rng rng(seed);
  std::vector<PacketRecord> records;
  const std::array<AppClass, 4> classes = {AppClass::SURF, AppClass::VIDEO_CALL,
                                           AppClass::VOICE_CALL, AppClass::VIDEO_STREAM};
  double t = 0.0;
  while (t < duration_s) {
    t += rng.exponential(18.0);
    if (t >= duration_s) break;
    const AppClass cls = classes[rng.uniform_int(0, 3)];
    const double seg = std::min(rng.uniform(30.0, 150.0), duration_s - t);
    if (seg < 5.0) break;
    const Trace sub =
        synthesize_trace(cls, seg, rng.next_u64(), SynthParams::from_config(synth_cfg, cls));
    for (PacketRecord r : sub.records) {
      r.timestamp_s = std::round((r.timestamp_s + t) * 1e6) / 1e6;
      r.app.reset();
      if (r.timestamp_s < duration_s) records.push_back(r);
    }
    t += seg;
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_s < b.timestamp_s;
                   });
  Trace trace;
  trace.records = std::move(records);
  trace.duration_s = duration_s;
  trace.labeled = false;
  return trace;
}

void parallel_for(int jobs, int workers, const std::function<void(int)>& fn) {
  if (jobs <= 0) return;
  workers = std::max(1, std::min(workers, jobs));
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

double clamp0(double v) { return v < 0.0 ? 0.0 : v; }

int default_workers(const Config& cfg) {
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return static_cast<int>(cfg.integer("workers", hw > 0 ? hw : 2));
}

void write_plotspec(const std::string& path, const std::string& name, const std::string& csv_file,
                    const std::string& x, const std::string& y, const std::string& series,
                    const std::string& filter, const std::string& xlabel,
                    const std::string& ylabel) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("plotspec: cannot write " + path);
  out << "# plotspec v1\n";
  out << "plot " << name << "\n";
  out << "csv " << csv_file << "\n";
  out << "x " << x << "\n";
  out << "y " << y << "\n";
  if (!series.empty()) out << "series " << series << "\n";
  if (!filter.empty()) out << "filter " << filter << "\n";
  out << "xlabel " << xlabel << "\n";
  out << "ylabel " << ylabel << "\n";
}

}  // namespace

PredictOutcome eval_persistence(const FeatureSeries& train, const FeatureSeries& test,
                                int horizon) {
  const std::vector<double> y_train = train.target();
  const std::vector<double> y_test = test.target();
  std::vector<double> preds, truth;
  if (horizon <= 1) {
    ArimaModel m = persistence_model(y_train);
    preds = rolling_one_step(std::move(m), y_test);
    truth = y_test;
  } else {
    for (std::size_t a = 0; a + horizon <= y_test.size(); a += horizon) {
      const double last = a == 0 ? y_train.back() : y_test[a - 1];
      for (int k = 0; k < horizon; ++k) {
        preds.push_back(last);
        truth.push_back(y_test[a + k]);
      }
    }
  }
  for (double& p : preds) p = clamp0(p);
  return {rmse(preds, truth), relative_rmse(preds, truth)};
}

PredictOutcome eval_arima_grid(const FeatureSeries& train, const FeatureSeries& test, int horizon,
                               int p_max, int d_max, int q_max) {
  const std::vector<double> y_train = train.target();
  const std::vector<double> y_test = test.target();

  // grid on an internal 75/25 split, then refit the winner on the full train
  const std::size_t fit_len = std::max<std::size_t>(20, y_train.size() * 3 / 4);
  std::vector<int> ps, ds, qs;
  for (int p = 0; p <= p_max; ++p) ps.push_back(p);
  for (int d = 0; d <= d_max; ++d) ds.push_back(d);
  for (int q = 0; q <= q_max; ++q) qs.push_back(q);
  std::span<const double> fit(y_train.data(), std::min(fit_len, y_train.size() - 1));
  std::span<const double> val(y_train.data() + fit.size(), y_train.size() - fit.size());
  const GridResult grid = grid_search(fit, val, ps, ds, qs);
  ArimaModel model = fit_arima(y_train, grid.best);

  std::vector<double> preds, truth;
  if (horizon <= 1) {
    preds = rolling_one_step(std::move(model), y_test);
    truth = y_test;
  } else {
    for (std::size_t a = 0; a + horizon <= y_test.size(); a += horizon) {
      const std::vector<double> f = model.forecast(horizon);
      for (int k = 0; k < horizon; ++k) {
        preds.push_back(f[k]);
        truth.push_back(y_test[a + k]);
        model.observe(y_test[a + k]);
      }
    }
  }
  for (double& p : preds) p = clamp0(p);
  return {rmse(preds, truth), relative_rmse(preds, truth)};
}

PredictOutcome eval_lstm(const FeatureSeries& train, const FeatureSeries& test,
                         const FeatureSetMask& mask, int horizon, const LstmEvalOptions& opts,
                         LstmEvalDetail* detail) {
  const FeatureSeries mtrain = apply_mask(train, mask);
  const FeatureSeries mtest = apply_mask(test, mask);
  const auto rows_train = mtrain.matrix();
  const auto rows_test = mtest.matrix();
  const std::vector<double> y_train = mtrain.target();
  const std::vector<double> y_test = mtest.target();
  const int d = static_cast<int>(mask.count());
  const int T = opts.window_bins;
  const int h = std::max(1, horizon);
  const int train_len = static_cast<int>(rows_train.size());
  if (train_len < T + h)
    throw std::runtime_error("eval_lstm: training slice shorter than window + horizon");

  // z-score constants from the training slice only
  std::vector<double> f_mean(d, 0.0), f_std(d, 0.0);
  for (const auto& row : rows_train)
    for (int j = 0; j < d; ++j) f_mean[j] += row[j];
  for (double& m : f_mean) m /= train_len;
  for (const auto& row : rows_train)
    for (int j = 0; j < d; ++j) f_std[j] += (row[j] - f_mean[j]) * (row[j] - f_mean[j]);
  for (double& s : f_std) s = std::sqrt(s / train_len);
  double t_mean = 0.0, t_std = 0.0;
  for (double v : y_train) t_mean += v;
  t_mean /= train_len;
  for (double v : y_train) t_std += (v - t_mean) * (v - t_mean);
  t_std = std::sqrt(t_std / train_len);
  if (t_std == 0.0) t_std = 1.0;

  RegressionNet net = make_regression_net(opts.hidden, d, h, opts.act, opts.seed);
  set_input_normalization(net, f_mean, f_std);
  {
    std::vector<double> shift(h, t_mean), scale(h, t_std);
    set_output_normalization(net, shift, scale);
  }

  const int last_start = train_len - h;  // window [j-T, j), targets y[j..j+h)
  const int count = last_start - T + 1;
  const int stride = std::max(1, (count + opts.max_windows - 1) / std::max(1, opts.max_windows));
  SequenceDataset ds;
  ds.steps = T;
  ds.input = d;
  ds.output = h;
  for (int j = T; j <= last_start; j += stride) {
    for (int t = j - T; t < j; ++t)
      for (int k = 0; k < d; ++k)
        ds.x.push_back((rows_train[t][k] - f_mean[k]) / (f_std[k] == 0.0 ? 1.0 : f_std[k]));
    for (int k = 0; k < h; ++k) ds.y.push_back((y_train[j + k] - t_mean) / t_std);
    ++ds.n;
  }
  TrainOptions topt;
  topt.epochs = opts.epochs;
  topt.lr = opts.lr;
  topt.clip = opts.clip;
  const std::vector<double> curve = train_regression(net, ds, topt);
  if (detail) {
    detail->net = net;
    detail->loss_curve = curve;
  }

  // evaluate on raw windows spanning the train/test boundary
  std::vector<std::vector<double>> all_rows = rows_train;
  all_rows.insert(all_rows.end(), rows_test.begin(), rows_test.end());
  std::vector<double> window(static_cast<std::size_t>(T) * d);
  std::vector<double> preds, truth;
  const auto fill_window = [&](int j) {
    for (int t = 0; t < T; ++t)
      for (int k = 0; k < d; ++k) window[static_cast<std::size_t>(t) * d + k] = all_rows[j - T + t][k];
  };
  if (h == 1) {
    for (std::size_t i = 0; i < y_test.size(); ++i) {
      const int j = train_len + static_cast<int>(i);
      fill_window(j);
      preds.push_back(clamp0(predict(net, window, T, 1)[0]));
      truth.push_back(y_test[i]);
    }
  } else {
    for (std::size_t a = 0; a + h <= y_test.size(); a += h) {
      const int j = train_len + static_cast<int>(a);
      fill_window(j);
      const std::vector<double> f = predict(net, window, T, h);
      for (int k = 0; k < h; ++k) {
        preds.push_back(clamp0(f[k]));
        truth.push_back(y_test[a + k]);
      }
    }
  }
  return {rmse(preds, truth), relative_rmse(preds, truth)};
}

namespace {

struct SchemeOutcomes {
  // [axis_value_index][scheme_index]
  std::vector<std::vector<PredictOutcome>> values;
};

}  // namespace

PredictSweepResult run_predict_sweep(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string axis = cfg.str("axis", "tau");
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  const int reps = static_cast<int>(cfg.integer("repetitions", 37));
  if (reps < 1) throw std::runtime_error("predict_sweep: repetitions must be at least 1");
  const double tau_fixed = cfg.num("tau_s", 10.0);
  const int train_fixed = static_cast<int>(cfg.integer("train_bins", 400));
  const int test_bins = static_cast<int>(cfg.integer("test_bins", 200));
  const int window_bins = static_cast<int>(cfg.integer("window_bins", 20));
  const int horizon_fixed = static_cast<int>(cfg.integer("horizon", 1));
  const std::vector<std::string> schemes =
      cfg.has("schemes") ? cfg.str_list("schemes")
                         : std::vector<std::string>{"persistence", "arima", "lstm_fs6"};

  std::vector<double> axis_values;
  if (axis == "tau")
    axis_values = cfg.has("tau_values") ? cfg.num_list("tau_values")
                                        : std::vector<double>{2, 10, 30, 60};
  else if (axis == "train_len")
    axis_values = cfg.has("train_values") ? cfg.num_list("train_values")
                                          : std::vector<double>{60, 400};
  else if (axis == "horizon")
    axis_values = cfg.has("horizon_values") ? cfg.num_list("horizon_values")
                                            : std::vector<double>{5, 20, 60};
  else
    throw std::runtime_error("predict_sweep: unknown axis '" + axis + "'");

  LstmEvalOptions lstm_opts;
  lstm_opts.window_bins = window_bins;
  lstm_opts.hidden = static_cast<int>(cfg.integer("lstm_hidden", 24));
  lstm_opts.epochs = static_cast<int>(cfg.integer("lstm_epochs", 60));
  lstm_opts.lr = cfg.num("lstm_lr", 0.02);
  lstm_opts.max_windows = static_cast<int>(cfg.integer("lstm_max_windows", 240));
  lstm_opts.act = parse_activation(cfg.str("lstm_activation", "tanh"));
  const int p_max = static_cast<int>(cfg.integer("arima_p_max", 8));
  const int d_max = static_cast<int>(cfg.integer("arima_d_max", 2));
  const int q_max = static_cast<int>(cfg.integer("arima_q_max", 3));

  // one trace per repetition, long enough for the largest axis point
  double tau_max = tau_fixed;
  int train_max = train_fixed;
  int horizon_max = horizon_fixed;
  for (double v : axis_values) {
    if (axis == "tau") tau_max = std::max(tau_max, v);
    if (axis == "train_len") train_max = std::max(train_max, static_cast<int>(v));
    if (axis == "horizon") horizon_max = std::max(horizon_max, static_cast<int>(v));
  }
  if (axis == "tau") train_max = train_fixed;
  const double duration_s =
      (train_max + test_bins + window_bins + horizon_max + 10) * (axis == "tau" ? tau_max : tau_fixed);

  std::vector<SchemeOutcomes> per_rep(reps);
  const int workers = default_workers(cfg);

  parallel_for(reps, workers, [&](int rep) {
    const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
    Rng rng(derive_seed(rep_seed, 0xA11CE));
    const Trace trace = make_user_trace(duration_s, rep_seed);

    SchemeOutcomes out;
    out.values.resize(axis_values.size());
    for (std::size_t vi = 0; vi < axis_values.size(); ++vi) {
      const double v = axis_values[vi];
      const double tau = axis == "tau" ? v : tau_fixed;
      const int train_len = axis == "train_len" ? static_cast<int>(v) : train_fixed;
      const int horizon = axis == "horizon" ? static_cast<int>(v) : horizon_fixed;

      FeatureSeries series = bin_trace(trace, tau);
      const std::size_t needed = static_cast<std::size_t>(train_len) + test_bins;
      if (series.bins.size() < needed + 2)
        throw std::runtime_error("predict_sweep: trace too short for axis point");
      const std::size_t start =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(series.bins.size() - needed - 1)));
      const SplitResult split = split_experiment(series, train_len, test_bins, start);

      for (std::size_t si = 0; si < schemes.size(); ++si) {
        const std::string& scheme = schemes[si];
        PredictOutcome outcome;
        if (scheme == "persistence") {
          outcome = eval_persistence(split.train, split.test, horizon);
        } else if (scheme == "arima") {
          outcome = eval_arima_grid(split.train, split.test, horizon, p_max, d_max, q_max);
        } else if (scheme.rfind("lstm_fs", 0) == 0) {
          const FeatureSetMask mask = FeatureSetMask::standard(parse_feature_set(scheme.substr(7)));
          LstmEvalOptions lo = lstm_opts;
          lo.seed = derive_seed(rep_seed, 0xF00D + vi * 16 + si);
          outcome = eval_lstm(split.train, split.test, mask, horizon, lo);
        } else {
          throw std::runtime_error("predict_sweep: unknown scheme '" + scheme + "'");
        }
        out.values[vi].push_back(outcome);
      }
    }
    per_rep[rep] = std::move(out);
  });

  // raw per-repetition artifacts
  for (int rep = 0; rep < reps; ++rep) {
    csv::Writer w(out_dir + "/raw_rep" + std::to_string(rep) + ".csv");
    w.header({"scheme", "axis", "axis_value", "rmse", "relative_rmse"});
    for (std::size_t vi = 0; vi < axis_values.size(); ++vi)
      for (std::size_t si = 0; si < schemes.size(); ++si) {
        const PredictOutcome& o = per_rep[rep].values[vi][si];
        w.row({schemes[si], axis, csv::fmt(axis_values[vi]), csv::fmt(o.rmse),
               csv::fmt(o.relative_rmse)});
      }
    w.close();
  }

  PredictSweepResult result;
  for (std::size_t si = 0; si < schemes.size(); ++si)
    for (std::size_t vi = 0; vi < axis_values.size(); ++vi) {
      std::vector<double> rmses, rels;
      for (int rep = 0; rep < reps; ++rep) {
        rmses.push_back(per_rep[rep].values[vi][si].rmse);
        rels.push_back(per_rep[rep].values[vi][si].relative_rmse);
      }
      result.table.add(aggregate("predict_sweep", schemes[si], axis, axis_values[vi], "rmse", rmses));
      result.table.add(
          aggregate("predict_sweep", schemes[si], axis, axis_values[vi], "relative_rmse", rels));
    }
  result.table.save(out_dir + "/metrics.csv");
  write_plotspec(out_dir + "/rmse_vs_" + axis + ".plot", "rmse_vs_" + axis, "metrics.csv",
                 "axis_value", "mean", "scheme", "metric=rmse", axis, "RMSE");
  return result;
}

ClassifyFoldsResult run_classify_folds(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  const int per_class = static_cast<int>(cfg.integer("traces_per_class", 4));
  const double dur = cfg.num("trace_duration_s", 90.0);
  const double tau = cfg.num("tau_s", 1.0);
  const double window_s = cfg.num("window_s", 5.0);
  const std::vector<std::string> models =
      cfg.has("models") ? cfg.str_list("models") : std::vector<std::string>{"lstm", "forest"};
  std::vector<FeatureSetId> fsets;
  if (cfg.has("feature_sets"))
    for (const std::string& s : cfg.str_list("feature_sets")) fsets.push_back(parse_feature_set(s));
  else
    fsets = {FeatureSetId::FS1, FeatureSetId::FS2, FeatureSetId::FS3,
             FeatureSetId::FS4, FeatureSetId::FS5, FeatureSetId::FS6};

  TrainOptions net_opts;
  net_opts.epochs = static_cast<int>(cfg.integer("lstm_epochs", 120));
  net_opts.lr = cfg.num("lstm_lr", 0.02);
  const int hidden = static_cast<int>(cfg.integer("lstm_hidden", 24));
  ForestOptions forest_opts;
  forest_opts.k = static_cast<int>(cfg.integer("forest_trees", 50));
  forest_opts.max_depth = static_cast<int>(cfg.integer("forest_depth", 8));

  const int n_traces = per_class * kNumAppClasses;
  const int per_window = static_cast<int>(std::llround(window_s / tau));
  if (per_window < 1) throw std::runtime_error("classify_folds: window shorter than one bin");

  // windows per trace, superset features
  struct TraceWindows {
    int label = 0;
    std::vector<FeatureVector> bins;
    int n_windows = 0;
  };
  std::vector<TraceWindows> traces(n_traces);
  for (int i = 0; i < n_traces; ++i) {
    const int cls = i / per_class;
    const Trace t = synthesize_trace(static_cast<AppClass>(cls), dur,
                                     derive_seed(seed, 0x5EED + static_cast<std::uint64_t>(i)));
    traces[i].label = cls;
    traces[i].bins = bin_trace(t, tau).bins;
    traces[i].n_windows = static_cast<int>(traces[i].bins.size()) / per_window;
  }

  struct Key {
    std::string model;
    FeatureSetId fs;
  };
  std::vector<Key> keys;
  for (const std::string& m : models)
    for (FeatureSetId f : fsets) keys.push_back({m, f});

  // predictions pooled across folds, per key
  std::vector<std::vector<int>> pooled_pred(keys.size()), pooled_truth(keys.size());
  std::vector<std::vector<std::vector<int>>> fold_pred(n_traces),
      fold_truth(n_traces);  // [fold][key]
  for (int f = 0; f < n_traces; ++f) {
    fold_pred[f].resize(keys.size());
    fold_truth[f].resize(keys.size());
  }

  const int workers = default_workers(cfg);
  parallel_for(n_traces, workers, [&](int fold) {
    for (std::size_t ki = 0; ki < keys.size(); ++ki) {
      const FeatureSetMask mask = FeatureSetMask::standard(keys[ki].fs);
      const auto fidx = mask.indices();
      const int d = static_cast<int>(fidx.size());

      FeatureSeries test_series;
      test_series.tau_s = tau;
      test_series.mask = mask;
      test_series.bins = traces[fold].bins;

      std::vector<int> preds;
      if (keys[ki].model == "forest") {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (int i = 0; i < n_traces; ++i) {
          if (i == fold) continue;
          for (int w = 0; w < traces[i].n_windows; ++w) {
            std::vector<double> meanv(d, 0.0);
            for (int b = 0; b < per_window; ++b)
              for (int j = 0; j < d; ++j)
                meanv[j] += traces[i].bins[w * per_window + b].field(fidx[j]) / per_window;
            x.push_back(std::move(meanv));
            y.push_back(traces[i].label);
          }
        }
        ForestOptions fo = forest_opts;
        fo.seed = derive_seed(seed, 0xF0 + static_cast<std::uint64_t>(fold) * 64 + ki);
        const RandomForest forest = fit_forest(x, y, fo);
        preds = classify_windows(forest, test_series, window_s);
      } else if (keys[ki].model == "lstm") {
        LabeledSequences ds;
        ds.steps = per_window;
        ds.input = d;
        std::vector<double> mean(d, 0.0), std(d, 0.0);
        std::size_t n_bins = 0;
        for (int i = 0; i < n_traces; ++i) {
          if (i == fold) continue;
          for (int w = 0; w < traces[i].n_windows; ++w)
            for (int b = 0; b < per_window; ++b) {
              for (int j = 0; j < d; ++j) mean[j] += traces[i].bins[w * per_window + b].field(fidx[j]);
              ++n_bins;
            }
        }
        for (double& m : mean) m /= static_cast<double>(n_bins);
        for (int i = 0; i < n_traces; ++i) {
          if (i == fold) continue;
          for (int w = 0; w < traces[i].n_windows; ++w)
            for (int b = 0; b < per_window; ++b)
              for (int j = 0; j < d; ++j) {
                const double v = traces[i].bins[w * per_window + b].field(fidx[j]) - mean[j];
                std[j] += v * v;
              }
        }
        for (double& s : std) {
          s = std::sqrt(s / static_cast<double>(n_bins));
          if (s == 0.0) s = 1.0;
        }
        for (int i = 0; i < n_traces; ++i) {
          if (i == fold) continue;
          for (int w = 0; w < traces[i].n_windows; ++w) {
            for (int b = 0; b < per_window; ++b)
              for (int j = 0; j < d; ++j)
                ds.x.push_back(
                    (traces[i].bins[w * per_window + b].field(fidx[j]) - mean[j]) / std[j]);
            ds.y.push_back(traces[i].label);
            ++ds.n;
          }
        }
        ClassifierNet net = make_classifier_net(
            hidden, d, kNumAppClasses, Activation::StandardTanh,
            derive_seed(seed, 0xC1A55 + static_cast<std::uint64_t>(fold) * 64 + ki));
        set_classifier_normalization(net, mean, std);
        train_classifier(net, ds, net_opts);
        preds = classify_windows(net, test_series, window_s);
      } else {
        throw std::runtime_error("classify_folds: unknown model '" + keys[ki].model + "'");
      }

      fold_pred[fold][ki] = preds;
      fold_truth[fold][ki].assign(preds.size(), traces[fold].label);
    }
  });

  ClassifyFoldsResult result;
  for (int fold = 0; fold < n_traces; ++fold)
    for (std::size_t ki = 0; ki < keys.size(); ++ki) {
      auto& pp = pooled_pred[ki];
      auto& pt = pooled_truth[ki];
      pp.insert(pp.end(), fold_pred[fold][ki].begin(), fold_pred[fold][ki].end());
      pt.insert(pt.end(), fold_truth[fold][ki].begin(), fold_truth[fold][ki].end());
    }

  // accuracy = sum(share_c * recall_c) must hold on every fold's pooled view
  for (int fold = 0; fold < n_traces; ++fold) {
    std::vector<int> pred, truth;
    for (std::size_t ki = 0; ki < keys.size(); ++ki) {
      pred.insert(pred.end(), fold_pred[fold][ki].begin(), fold_pred[fold][ki].end());
      truth.insert(truth.end(), fold_truth[fold][ki].begin(), fold_truth[fold][ki].end());
    }
    const Evaluation ev = evaluate_classification(pred, truth);
    double recon = 0.0;
    for (const auto& [label, count] : ev.actual_count)
      recon += (static_cast<double>(count) / static_cast<double>(ev.total)) * ev.recall.at(label);
    result.identity_residuals.push_back(std::fabs(recon - ev.accuracy));
  }

  const std::array<std::string, 4> recall_cols = {"recall_surf", "recall_vcall", "recall_voice",
                                                  "recall_stream"};
  std::map<std::string, csv::Writer*> report_writers;
  std::vector<std::unique_ptr<csv::Writer>> writer_store;
  for (const std::string& m : models) {
    auto w = std::make_unique<csv::Writer>(out_dir + "/classification_" + m + ".csv");
    w->header({"feature_set", "window_len_s", "accuracy", recall_cols[0], recall_cols[1],
               recall_cols[2], recall_cols[3]});
    report_writers[m] = w.get();
    writer_store.push_back(std::move(w));
  }

  for (std::size_t ki = 0; ki < keys.size(); ++ki) {
    const Evaluation ev = evaluate_classification(pooled_pred[ki], pooled_truth[ki]);
    const std::string name = keys[ki].model + "_" + to_string(keys[ki].fs);
    result.pooled[name] = ev;
    const double fs_num = static_cast<double>(static_cast<int>(keys[ki].fs) + 1);
    result.table.add(aggregate("classify_folds", name, "feature_set", fs_num, "accuracy",
                               std::vector<double>{ev.accuracy}));
    std::vector<std::string> row{to_string(keys[ki].fs), csv::fmt(window_s),
                                 csv::fmt(ev.accuracy)};
    for (int c = 0; c < kNumAppClasses; ++c) {
      const double r = ev.recall.count(c) ? ev.recall.at(c) : 0.0;
      result.table.add(aggregate("classify_folds", name, "feature_set", fs_num, recall_cols[c],
                                 std::vector<double>{r}));
      row.push_back(csv::fmt(r));
    }
    report_writers[keys[ki].model]->row(row);
  }
  for (auto& w : writer_store) w->close();

  result.table.save(out_dir + "/metrics.csv");
  write_plotspec(out_dir + "/accuracy_vs_fs.plot", "accuracy_vs_fs", "metrics.csv", "axis_value",
                 "mean", "scheme", "metric=accuracy", "feature set", "accuracy");
  return result;
}

DrxCompareResult run_drx_compare(const Config& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
  SimConfig sim_cfg;
  sim_cfg.n_ues = static_cast<int>(cfg.integer("n_ues", 10));
  sim_cfg.n_carriers = static_cast<int>(cfg.integer("n_carriers", 5));
  sim_cfg.carrier_rate_bps = cfg.num("carrier_rate_bps", 1e6);
  sim_cfg.tti_ms = static_cast<int>(cfg.integer("tti_ms", 1));
  sim_cfg.decision_epoch_ttis = static_cast<std::uint64_t>(cfg.integer("decision_epoch_ttis", 1000));
  const double sim_minutes = cfg.num("sim_minutes", 10.0);
  const double train_minutes = cfg.num("train_minutes", 6.0);
  sim_cfg.duration_ttis =
      static_cast<std::uint64_t>(sim_minutes * 60.0 * 1000.0 / sim_cfg.tti_ms);
  const double train_s = train_minutes * 60.0;
  const double sim_s = sim_minutes * 60.0;
  const std::vector<std::string> schemes =
      cfg.has("schemes") ? cfg.str_list("schemes")
                         : std::vector<std::string>{"min_energy", "ml", "min_delay"};

  const bool need_ml =
      std::find(schemes.begin(), schemes.end(), "ml") != schemes.end();

  AdaptTrainOptions aopts;
  aopts.hidden = static_cast<int>(cfg.integer("adapt_hidden", 16));
  aopts.epochs = static_cast<int>(cfg.integer("adapt_epochs", 60));
  aopts.lr = cfg.num("adapt_lr", 0.02);
  aopts.max_samples = static_cast<int>(cfg.integer("adapt_max_samples", 2500));

  ScorerConfig scorer;
  scorer.short_lo = cfg.num("score_short_lo", scorer.short_lo);
  scorer.short_hi = cfg.num("score_short_hi", scorer.short_hi);
  scorer.long_lo = cfg.num("score_long_lo", scorer.long_lo);
  scorer.long_hi = cfg.num("score_long_hi", scorer.long_hi);
  scorer.boundary_long = cfg.num("boundary_long", scorer.boundary_long);
  scorer.boundary_short = cfg.num("boundary_short", scorer.boundary_short);

  std::vector<ArrivalSchedule> arrivals(sim_cfg.n_ues);
  std::vector<RegressionNet> nets(sim_cfg.n_ues);
  const QuantizationScheme qscheme;
  const std::uint64_t train_ttis =
      static_cast<std::uint64_t>(train_s * 1000.0 / sim_cfg.tti_ms);

  const int workers = default_workers(cfg);
  parallel_for(sim_cfg.n_ues, workers, [&](int u) {
    const Trace trace =
        make_user_trace(train_s + sim_s, derive_seed(seed, 0xCE11 + static_cast<std::uint64_t>(u)));
    ArrivalSchedule sched;
    const double tti_sec = sim_cfg.tti_ms / 1000.0;
    for (const PacketRecord& r : trace.records) {
      if (r.dir != Direction::DL || r.size_bytes <= 0) continue;
      if (r.timestamp_s < train_s || r.timestamp_s >= train_s + sim_s) continue;
      sched.push_back({static_cast<std::uint64_t>((r.timestamp_s - train_s) / tti_sec),
                       r.size_bytes});
    }
    arrivals[u] = std::move(sched);
    if (need_ml) {
      std::vector<std::int64_t> bytes = per_tti_bytes(trace, sim_cfg.tti_ms, Direction::DL);
      if (bytes.size() > train_ttis) bytes.resize(train_ttis);
      const std::vector<int> labels = quantize_bytes(bytes, qscheme);
      AdaptTrainOptions ao = aopts;
      ao.seed = derive_seed(seed, 0xF1E7 + static_cast<std::uint64_t>(u));
      nets[u] = train_adapt_net(labels, ao);
    }
  });

  MappingH mapping = MappingH::default_table(scorer);
  if (cfg.str("mapping", "table") == "trained") {
    std::vector<OracleRun> runs;
    for (int u = 0; u < std::min(2, sim_cfg.n_ues); ++u) {
      const Trace trace = make_user_trace(
          train_s, derive_seed(seed, 0x04AC1E + static_cast<std::uint64_t>(u)));
      const std::vector<int> labels =
          quantize_tti_arrivals(trace, sim_cfg.tti_ms, qscheme, Direction::DL);
      OracleOptions oo;
      oo.power = sim_cfg.power;
      oo.rate_bps = sim_cfg.carrier_rate_bps;
      oo.tti_ms = sim_cfg.tti_ms;
      auto sub = dl_arrivals_from_trace(trace, sim_cfg.tti_ms);
      auto part = build_oracle_runs(labels, sub, oo);
      runs.insert(runs.end(), part.begin(), part.end());
    }
    mapping = train_H(runs, cfg.num("omega", 0.5), scorer);
  }

  std::vector<SchemeSpec> specs;
  for (const std::string& s : schemes) {
    SchemeSpec spec;
    spec.label = s;
    for (int u = 0; u < sim_cfg.n_ues; ++u) {
      if (s == "min_energy")
        spec.policies.push_back(UePolicy::fixed(DrxConfig::table_set(2)));
      else if (s == "min_delay")
        spec.policies.push_back(UePolicy::fixed(DrxConfig::table_set(3)));
      else if (s == "ml")
        spec.policies.push_back(UePolicy::adaptive(nets[u], mapping, qscheme));
      else if (s.rfind("set", 0) == 0)
        spec.policies.push_back(UePolicy::fixed(DrxConfig::table_set(std::stoi(s.substr(3)))));
      else
        throw std::runtime_error("drx_compare: unknown scheme '" + s + "'");
    }
    specs.push_back(std::move(spec));
  }

  DrxCompareResult result;
  result.reports = compare_schemes(sim_cfg, arrivals, std::move(specs));

  const std::vector<double> grid =
      cfg.has("cdf_grid_ms")
          ? cfg.num_list("cdf_grid_ms")
          : std::vector<double>{1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 40, 50, 75, 100, 150, 200};

  csv::Writer cdfw(out_dir + "/delay_cdf.csv");
  cdfw.header({"scheme", "delay_ms", "cdf"});
  csv::Writer pw(out_dir + "/power.csv");
  pw.header({"scheme", "ue", "power_mw"});
  for (const SimReport& rep : result.reports) {
    save_packets_csv(rep, out_dir + "/packets_" + rep.scheme + ".csv");
    save_ues_csv(rep, out_dir + "/ues_" + rep.scheme + ".csv");
    if (rep.scheme == "ml") save_decisions_csv(rep, out_dir + "/decisions_" + rep.scheme + ".csv");

    const std::vector<double> cdf = delay_cdf(rep, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
      cdfw.row({rep.scheme, csv::fmt(grid[i]), csv::fmt(cdf[i])});

    const PowerSummary ps = average_power(rep);
    for (std::size_t u = 0; u < ps.per_ue_mw.size(); ++u)
      pw.row({rep.scheme, std::to_string(u), csv::fmt(ps.per_ue_mw[u])});
    pw.row({rep.scheme, "mean", csv::fmt(ps.fleet_mean_mw)});

    std::vector<double> delays = rep.delays_ms();
    double mean_delay = 0.0;
    for (double d : delays) mean_delay += d;
    if (!delays.empty()) mean_delay /= static_cast<double>(delays.size());
    result.table.add(aggregate("drx_compare", rep.scheme, "scheme", 0, "mean_delay_ms",
                               std::vector<double>{mean_delay}));
    result.table.add(aggregate("drx_compare", rep.scheme, "scheme", 0, "median_delay_ms",
                               std::vector<double>{delays.empty() ? 0.0 : median(delays)}));
    result.table.add(aggregate("drx_compare", rep.scheme, "scheme", 0, "mean_power_mw",
                               std::vector<double>{ps.fleet_mean_mw}));
    result.table.add(aggregate("drx_compare", rep.scheme, "scheme", 0, "undelivered",
                               std::vector<double>{static_cast<double>(rep.total_undelivered())}));
  }
  cdfw.close();
  pw.close();
  result.table.save(out_dir + "/metrics.csv");
  write_plotspec(out_dir + "/delay_cdf.plot", "delay_cdf", "delay_cdf.csv", "delay_ms", "cdf",
                 "scheme", "", "delay (ms)", "CDF");
  write_plotspec(out_dir + "/power.plot", "power", "power.csv", "ue", "power_mw", "scheme", "",
                 "UE", "average power (mW)");
  return result;
}

MetricTable run_experiment(const Config& cfg, const std::string& out_dir) {
  const std::string kind = cfg.str("kind");
  if (kind == "predict_sweep") return run_predict_sweep(cfg, out_dir).table;
  if (kind == "classify_folds") return run_classify_folds(cfg, out_dir).table;
  if (kind == "drx_compare") return run_drx_compare(cfg, out_dir).table;
  throw std::runtime_error("run_experiment: unknown kind '" + kind + "'");
}

}  // namespace predrx

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "predrx/arima.hpp"
#include "predrx/classifier.hpp"
#include "predrx/experiments.hpp"
#include "predrx/lstm.hpp"
#include "predrx/metrics.hpp"
#include "predrx/sim.hpp"
#include "predrx/trace.hpp"

namespace fs = std::filesystem;
using namespace predrx;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int tti_ms = 1;
  double tau_s = 10.0;
};

Config load_config(const std::string& path, const GlobalOpts& g, CLI::App* cmd) {
  Config cfg = path.empty() ? Config{} : Config::from_file(path);
  // explicit flags override the config file
  if (!cmd->get_option("--seed")->empty() || !cfg.has("seed"))
    cfg.set("seed", static_cast<std::int64_t>(g.seed));
  if (!cmd->get_option("--tti-ms")->empty() || !cfg.has("tti_ms"))
    cfg.set("tti_ms", static_cast<std::int64_t>(g.tti_ms));
  if (!cmd->get_option("--tau-s")->empty() || !cfg.has("tau_s")) cfg.set("tau_s", g.tau_s);
  return cfg;
}

int fail(const std::string& stage, const std::exception& e) {
  std::cerr << "predrx " << stage << ": error: " << e.what() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"per-user traffic forecasting, classification, and DRX energy simulation"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--out-dir", g.out_dir, "artifact output directory");
  app.add_option("--tti-ms", g.tti_ms, "TTI length in milliseconds");
  app.add_option("--tau-s", g.tau_s, "feature bin width in seconds");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled or mixed trace");
  std::string synth_app = "SURF", synth_out = "trace.csv", synth_params;
  double synth_dur = 60.0;
  bool synth_mixed = false;
  synth->add_option("--app", synth_app, "SURF|VIDEO_CALL|VOICE_CALL|VIDEO_STREAM");
  synth->add_option("--duration-s", synth_dur, "trace length in seconds")->required();
  synth->add_option("--out", synth_out, "output trace CSV")->required();
  synth->add_option("--params", synth_params, "synthesis parameter config file");
  synth->add_flag("--mixed", synth_mixed, "mixed-activity unlabeled user trace");

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "validate a trace CSV and report basic statistics");
  std::string ingest_in, ingest_out;
  bool ingest_sort = false;
  ingest->add_option("--in", ingest_in)->required();
  ingest->add_option("--out", ingest_out, "rewrite the normalized trace here");
  ingest->add_flag("--sort", ingest_sort, "sort out-of-order timestamps instead of rejecting");

  // ---- features ----
  auto* features = app.add_subcommand("features", "bin a trace into tau-sized feature vectors");
  std::string feat_in, feat_out = "features.csv", feat_fs = "FS1";
  bool feat_labels = false;
  features->add_option("--in", feat_in)->required();
  features->add_option("--out", feat_out);
  features->add_option("--fs", feat_fs, "feature set FS1..FS6");
  features->add_flag("--quantize-labels", feat_labels, "append per-bin DL quantization labels");

  // ---- fit-arima ----
  auto* fita = app.add_subcommand("fit-arima", "fit or grid-search ARIMA on a binned target");
  std::string fita_in, fita_table = "rmse_table.csv";
  int fita_p = -1, fita_d = -1, fita_q = -1;
  int fita_pmax = 8, fita_dmax = 2, fita_qmax = 3;
  int fita_train = 400, fita_test = 200;
  fita->add_option("--in", fita_in, "trace CSV (binned at --tau-s)")->required();
  fita->add_option("--p", fita_p);
  fita->add_option("--d", fita_d);
  fita->add_option("--q", fita_q);
  fita->add_option("--p-max", fita_pmax);
  fita->add_option("--d-max", fita_dmax);
  fita->add_option("--q-max", fita_qmax);
  fita->add_option("--train-bins", fita_train);
  fita->add_option("--test-bins", fita_test);
  fita->add_option("--out-table", fita_table);

  // ---- train-lstm ----
  auto* tl = app.add_subcommand("train-lstm", "train the regression net on a binned trace");
  std::string tl_in, tl_fs = "FS6", tl_model = "model.json", tl_loss = "loss_curve.csv";
  int tl_window = 20, tl_horizon = 1, tl_hidden = 24, tl_epochs = 60;
  int tl_train = 400, tl_test = 200;
  double tl_lr = 0.05;
  std::string tl_act = "tanh";
  tl->add_option("--in", tl_in, "trace CSV")->required();
  tl->add_option("--fs", tl_fs);
  tl->add_option("--window", tl_window);
  tl->add_option("--horizon", tl_horizon);
  tl->add_option("--hidden", tl_hidden);
  tl->add_option("--epochs", tl_epochs);
  tl->add_option("--lr", tl_lr);
  tl->add_option("--activation", tl_act, "tanh|sigmoid");
  tl->add_option("--train-bins", tl_train);
  tl->add_option("--test-bins", tl_test);
  tl->add_option("--out-model", tl_model);
  tl->add_option("--out-loss", tl_loss);

  // ---- classify / simulate / compare / report ----
  auto* classify = app.add_subcommand("classify", "leave-one-out application classification folds");
  std::string classify_cfg;
  classify->add_option("--config", classify_cfg, "experiment config file");

  auto* simulate = app.add_subcommand("simulate", "run one DRX scheme");
  std::string sim_cfg_path, sim_scheme = "min_energy";
  simulate->add_option("--config", sim_cfg_path, "experiment config file");
  simulate->add_option("--scheme", sim_scheme, "min_energy|min_delay|ml|set1..set4");

  auto* compare = app.add_subcommand("compare", "paired multi-scheme DRX comparison");
  std::string cmp_cfg_path;
  compare->add_option("--config", cmp_cfg_path, "experiment config file");

  auto* report = app.add_subcommand("report", "run a configured experiment sweep");
  std::string report_cfg_path;
  report->add_option("--config", report_cfg_path, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(g.out_dir);
  } catch (const std::exception& e) {
    return fail("init", e);
  }

  if (synth->parsed()) {
    try {
      Trace t;
      if (synth_mixed) {
        Config pc = synth_params.empty() ? Config{} : Config::from_file(synth_params);
        t = make_user_trace(synth_dur, g.seed, pc);
      } else {
        const AppClass cls = parse_app_class(synth_app);
        const SynthParams params =
            synth_params.empty() ? SynthParams::defaults(cls)
                                 : SynthParams::from_config(Config::from_file(synth_params), cls);
        t = synthesize_trace(cls, synth_dur, g.seed, params);
      }
      save_trace(t, synth_out);
      std::cout << "wrote " << t.records.size() << " packets to " << synth_out << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("synth", e);
    }
  }

  if (ingest->parsed()) {
    try {
      LoadOptions opts;
      opts.sort_unsorted = ingest_sort;
      const Trace t = load_trace(ingest_in, opts);
      std::size_t ul = 0, dl = 0, udp = 0;
      for (const PacketRecord& r : t.records) {
        (r.dir == Direction::UL ? ul : dl)++;
        if (r.proto == Protocol::UDP) ++udp;
      }
      std::cout << "records=" << t.records.size() << " duration_s=" << t.duration_s
                << " ul=" << ul << " dl=" << dl << " udp=" << udp
                << " labeled=" << (t.labeled ? "yes" : "no") << "\n";
      if (!ingest_out.empty()) save_trace(t, ingest_out);
      return 0;
    } catch (const std::exception& e) {
      return fail("ingest", e);
    }
  }

  if (features->parsed()) {
    try {
      const Trace t = load_trace(feat_in);
      FeatureSeries series = bin_trace(t, g.tau_s);
      series = apply_mask(series, FeatureSetMask::standard(parse_feature_set(feat_fs)));
      if (feat_labels) {
        // per-bin label: quantize the bin's DL byte total
        std::vector<std::int64_t> bytes(series.bins.size());
        for (std::size_t i = 0; i < series.bins.size(); ++i)
          bytes[i] = static_cast<std::int64_t>(series.bins[i].size_dl);
        const std::vector<int> bin_labels = quantize_bytes(bytes, QuantizationScheme{});
        save_feature_series(series, feat_out, &bin_labels);
      } else {
        save_feature_series(series, feat_out);
      }
      std::cout << "wrote " << series.bins.size() << " bins to " << feat_out << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("features", e);
    }
  }

  if (fita->parsed()) {
    try {
      const Trace t = load_trace(fita_in);
      const FeatureSeries series = bin_trace(t, g.tau_s);
      const std::vector<double> y = series.target();
      if (static_cast<int>(y.size()) < fita_train + fita_test)
        throw std::runtime_error("not enough bins for the requested split");
      std::span<const double> train(y.data(), fita_train);
      std::span<const double> test(y.data() + fita_train, fita_test);
      if (fita_p >= 0 && fita_d >= 0 && fita_q >= 0) {
        ArimaModel m = fit_arima(train, {fita_p, fita_d, fita_q});
        const std::vector<double> preds = rolling_one_step(m, test);
        std::cout << "arima(" << fita_p << "," << fita_d << "," << fita_q
                  << ") test rmse=" << rmse(preds, test) << " converged=" << m.converged << "\n";
      } else {
        std::vector<int> ps, dsv, qs;
        for (int p = 0; p <= fita_pmax; ++p) ps.push_back(p);
        for (int d = 0; d <= fita_dmax; ++d) dsv.push_back(d);
        for (int q = 0; q <= fita_qmax; ++q) qs.push_back(q);
        const std::size_t fit_len = train.size() * 3 / 4;
        const GridResult grid =
            grid_search(train.subspan(0, fit_len), train.subspan(fit_len), ps, dsv, qs);
        save_rmse_table(grid, g.out_dir + "/" + fita_table);
        ArimaModel best = fit_arima(train, grid.best);
        const std::vector<double> preds = rolling_one_step(best, test);
        std::cout << "best arima(" << grid.best.p << "," << grid.best.d << "," << grid.best.q
                  << ") validation rmse=" << grid.best_rmse << " test rmse=" << rmse(preds, test)
                  << "\n";
      }
      return 0;
    } catch (const std::exception& e) {
      return fail("fit-arima", e);
    }
  }

  if (tl->parsed()) {
    try {
      const Trace t = load_trace(tl_in);
      const FeatureSeries series = bin_trace(t, g.tau_s);
      if (static_cast<int>(series.bins.size()) < tl_train + tl_test)
        throw std::runtime_error("not enough bins for the requested split");
      const SplitResult split = split_experiment(series, tl_train, tl_test, 0);
      const FeatureSetMask mask = FeatureSetMask::standard(parse_feature_set(tl_fs));
      LstmEvalOptions opts;
      opts.window_bins = tl_window;
      opts.hidden = tl_hidden;
      opts.epochs = tl_epochs;
      opts.lr = tl_lr;
      opts.seed = g.seed;
      opts.act = parse_activation(tl_act);
      LstmEvalDetail detail;
      const PredictOutcome outcome =
          eval_lstm(split.train, split.test, mask, tl_horizon, opts, &detail);
      save_regression_net(detail.net, g.out_dir + "/" + tl_model);
      save_loss_curve(detail.loss_curve, g.out_dir + "/" + tl_loss);
      std::cout << "lstm(" << tl_fs << ") test rmse=" << outcome.rmse
                << " relative=" << outcome.relative_rmse << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("train-lstm", e);
    }
  }

  if (classify->parsed()) {
    try {
      const Config cfg = load_config(classify_cfg, g, classify);
      const ClassifyFoldsResult r = run_classify_folds(cfg, g.out_dir);
      for (const auto& [name, ev] : r.pooled)
        std::cout << name << " accuracy=" << ev.accuracy << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("classify", e);
    }
  }

  if (simulate->parsed()) {
    try {
      Config cfg = load_config(sim_cfg_path, g, simulate);
      cfg.set("schemes", sim_scheme);
      const DrxCompareResult r = run_drx_compare(cfg, g.out_dir);
      const PowerSummary ps = average_power(r.reports[0]);
      std::cout << sim_scheme << " mean_power_mw=" << ps.fleet_mean_mw
                << " packets=" << r.reports[0].packets.size() << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("simulate", e);
    }
  }

  if (compare->parsed()) {
    try {
      const Config cfg = load_config(cmp_cfg_path, g, compare);
      const DrxCompareResult r = run_drx_compare(cfg, g.out_dir);
      for (const SimReport& rep : r.reports) {
        const PowerSummary ps = average_power(rep);
        std::cout << rep.scheme << " mean_power_mw=" << ps.fleet_mean_mw
                  << " delivered=" << rep.packets.size()
                  << " undelivered=" << rep.total_undelivered() << "\n";
      }
      return 0;
    } catch (const std::exception& e) {
      return fail("compare", e);
    }
  }

  if (report->parsed()) {
    try {
      const Config cfg = load_config(report_cfg_path, g, report);
      const MetricTable table = run_experiment(cfg, g.out_dir);
      std::cout << "wrote " << table.rows.size() << " metric rows to " << g.out_dir
                << "/metrics.csv\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("report", e);
    }
  }

  return 0;
}

#include "predrx/arima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "predrx/csv.hpp"
#include "predrx/kernels.hpp"

namespace predrx {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Ordinary least squares via normal equations; ridge-regularizes once on a
// singular system. Returns false when hopeless.
bool ols(const std::vector<std::vector<double>>& rows, const std::vector<double>& y,
         std::vector<double>& coef) {
  const int k = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  if (k == 0) return false;
  std::vector<double> xtx(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> xty(k, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    for (int i = 0; i < k; ++i) {
      xty[i] += row[i] * y[r];
      for (int j = i; j < k; ++j) xtx[static_cast<std::size_t>(i) * k + j] += row[i] * row[j];
    }
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < i; ++j)
      xtx[static_cast<std::size_t>(i) * k + j] = xtx[static_cast<std::size_t>(j) * k + i];

  std::vector<double> a = xtx, b = xty;
  if (kernels::solve_dense(a, b, k)) {
    coef = b;
    return true;
  }
  a = xtx;
  b = xty;
  for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i) * k + i] += 1e-8;
  if (kernels::solve_dense(a, b, k)) {
    coef = b;
    return true;
  }
  return false;
}

// Filtered one-step residuals with pre-sample values backcast to zero.
void compute_residuals(const std::vector<double>& zc, double c, const std::vector<double>& ar,
                       const std::vector<double>& ma, std::vector<double>& e) {
  const int n = static_cast<int>(zc.size());
  const int p = static_cast<int>(ar.size());
  const int q = static_cast<int>(ma.size());
  e.assign(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double pred = c;
    for (int i = 1; i <= p; ++i)
      if (t - i >= 0) pred += ar[i - 1] * zc[t - i];
    for (int j = 1; j <= q; ++j)
      if (t - j >= 0) pred += ma[j - 1] * e[t - j];
    e[t] = zc[t] - pred;
  }
}

}  // namespace

std::vector<double> difference(std::span<const double> series, int d) {
  if (d < 0) throw std::runtime_error("difference: negative order");
  if (static_cast<int>(series.size()) <= d)
    throw std::runtime_error("difference: series too short for order " + std::to_string(d));
  std::vector<double> out(series.begin(), series.end());
  for (int i = 0; i < d; ++i) {
    std::vector<double> next(out.size() - 1);
    for (std::size_t j = 0; j + 1 < out.size(); ++j) next[j] = out[j + 1] - out[j];
    out = std::move(next);
  }
  return out;
}

std::vector<double> undifference_prefix(std::span<const double> diffed,
                                        std::span<const double> initials) {
  std::vector<double> cur(diffed.begin(), diffed.end());
  for (int lvl = static_cast<int>(initials.size()) - 1; lvl >= 0; --lvl) {
    std::vector<double> next(cur.size() + 1);
    next[0] = initials[lvl];
    for (std::size_t j = 0; j < cur.size(); ++j) next[j + 1] = next[j] + cur[j];
    cur = std::move(next);
  }
  return cur;
}

double ArimaModel::one_step() const {
  double zc = intercept;
  const int p = orders.p;
  const int q = orders.q;
  for (int i = 1; i <= p; ++i) zc += ar[i - 1] * obs_tail[obs_tail.size() - i];
  for (int j = 1; j <= q; ++j) zc += ma[j - 1] * resid_tail[resid_tail.size() - j];
  double v = zc + mean;
  for (int lvl = orders.d - 1; lvl >= 0; --lvl) v += level_last[lvl];
  return v;
}

void ArimaModel::observe(double x_raw) {
  double zc_pred = intercept;
  for (int i = 1; i <= orders.p; ++i) zc_pred += ar[i - 1] * obs_tail[obs_tail.size() - i];
  for (int j = 1; j <= orders.q; ++j) zc_pred += ma[j - 1] * resid_tail[resid_tail.size() - j];

  std::vector<double> v(orders.d + 1);
  v[0] = x_raw;
  for (int i = 1; i <= orders.d; ++i) v[i] = v[i - 1] - level_last[i - 1];
  const double zc_new = v[orders.d] - mean;

  if (orders.p > 0) {
    obs_tail.push_back(zc_new);
    obs_tail.erase(obs_tail.begin());
  }
  if (orders.q > 0) {
    resid_tail.push_back(zc_new - zc_pred);
    resid_tail.erase(resid_tail.begin());
  }
  for (int i = 0; i <= orders.d; ++i) level_last[i] = v[i];
}

std::vector<double> ArimaModel::forecast(int horizon) const {
  if (horizon < 1) throw std::runtime_error("forecast: horizon must be at least 1");
  std::vector<double> obs = obs_tail;
  std::vector<double> res = resid_tail;
  std::vector<double> lvl = level_last;
  std::vector<double> out;
  out.reserve(horizon);
  for (int h = 0; h < horizon; ++h) {
    double zc = intercept;
    for (int i = 1; i <= orders.p; ++i) zc += ar[i - 1] * obs[obs.size() - i];
    for (int j = 1; j <= orders.q; ++j) zc += ma[j - 1] * res[res.size() - j];
    if (orders.p > 0) {
      obs.push_back(zc);
      obs.erase(obs.begin());
    }
    if (orders.q > 0) {
      res.push_back(0.0);  // future shocks are zero
      res.erase(res.begin());
    }
    double z = zc + mean;
    for (int lvl_i = orders.d - 1; lvl_i >= 0; --lvl_i) {
      z += lvl[lvl_i];
    }
    // refresh the level tails with the forecast value
    if (orders.d > 0) {
      std::vector<double> nv(orders.d + 1);
      nv[0] = z;
      for (int i = 1; i <= orders.d; ++i) nv[i] = nv[i - 1] - lvl[i - 1];
      lvl = nv;
    }
    out.push_back(z);
  }
  return out;
}

ArimaModel fit_arima(std::span<const double> train, ArimaOrders o) {
  if (o.p < 0 || o.d < 0 || o.q < 0) throw std::runtime_error("fit_arima: negative order");
  const int min_len = std::max(o.p, o.q) + o.d + 10;
  if (static_cast<int>(train.size()) < min_len)
    throw std::runtime_error("fit_arima: need at least " + std::to_string(min_len) + " samples");

  ArimaModel m;
  m.orders = o;
  m.ar.assign(o.p, 0.0);
  m.ma.assign(o.q, 0.0);

  std::vector<double> z = difference(train, o.d);
  m.mean = mean_of(z);
  std::vector<double> zc(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) zc[i] = z[i] - m.mean;

  const int n = static_cast<int>(zc.size());
  const int lag = std::max(o.p, o.q);
  const double var = variance_of(zc, 0.0);

  if (var < 1e-12 || (o.p == 0 && o.q == 0)) {
    if (var < 1e-12) m.diagnostics = "degenerate constant series";
    m.residuals = zc;
  } else if (o.q == 0) {
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    rows.reserve(n - o.p);
    for (int t = o.p; t < n; ++t) {
      std::vector<double> row(1 + o.p);
      row[0] = 1.0;
      for (int i = 1; i <= o.p; ++i) row[i] = zc[t - i];
      rows.push_back(std::move(row));
      y.push_back(zc[t]);
    }
    std::vector<double> coef;
    if (!ols(rows, y, coef)) {
      m.converged = false;
      m.diagnostics = "singular least-squares system";
    } else {
      m.intercept = coef[0];
      for (int i = 0; i < o.p; ++i) m.ar[i] = coef[1 + i];
    }
    compute_residuals(zc, m.intercept, m.ar, m.ma, m.residuals);
  } else {
    // iterative conditional least squares; residuals backcast to zero
    std::vector<double> e(n, 0.0);
    std::vector<double> prev;
    bool done = false;
    const int max_iter = 60;
    for (int iter = 0; iter < max_iter; ++iter) {
      m.iterations = iter + 1;
      std::vector<std::vector<double>> rows;
      std::vector<double> y;
      rows.reserve(n - lag);
      for (int t = lag; t < n; ++t) {
        std::vector<double> row(1 + o.p + o.q);
        row[0] = 1.0;
        for (int i = 1; i <= o.p; ++i) row[i] = zc[t - i];
        for (int j = 1; j <= o.q; ++j) row[o.p + j] = e[t - j];
        rows.push_back(std::move(row));
        y.push_back(zc[t]);
      }
      std::vector<double> coef;
      if (!ols(rows, y, coef)) {
        m.diagnostics = "singular least-squares system at iteration " + std::to_string(iter);
        break;
      }
      bool finite = true;
      for (double c : coef)
        if (!std::isfinite(c) || std::fabs(c) > 1e3) finite = false;
      if (!finite) {
        m.diagnostics = "coefficients diverged at iteration " + std::to_string(iter);
        break;
      }
      m.intercept = coef[0];
      for (int i = 0; i < o.p; ++i) m.ar[i] = coef[1 + i];
      for (int j = 0; j < o.q; ++j) m.ma[j] = coef[1 + o.p + j];
      compute_residuals(zc, m.intercept, m.ar, m.ma, e);

      if (!prev.empty()) {
        double delta = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) delta = std::max(delta, std::fabs(coef[i] - prev[i]));
        if (delta < 1e-8) {
          done = true;
          break;
        }
      }
      prev = coef;
    }
    m.converged = done;
    if (!done && m.diagnostics.empty())
      m.diagnostics = "conditional least squares did not converge in " + std::to_string(max_iter) +
                      " iterations";
    m.residuals = e;
  }

  // forecasting state
  m.obs_tail.assign(o.p, 0.0);
  for (int i = 0; i < o.p && i < n; ++i) m.obs_tail[o.p - 1 - i] = zc[n - 1 - i];
  m.resid_tail.assign(o.q, 0.0);
  for (int j = 0; j < o.q && j < static_cast<int>(m.residuals.size()); ++j)
    m.resid_tail[o.q - 1 - j] = m.residuals[m.residuals.size() - 1 - j];
  m.level_last.assign(o.d + 1, 0.0);
  {
    std::vector<double> lvl(train.begin(), train.end());
    for (int i = 0; i <= o.d; ++i) {
      m.level_last[i] = lvl.back();
      if (i < o.d) {
        std::vector<double> next(lvl.size() - 1);
        for (std::size_t j = 0; j + 1 < lvl.size(); ++j) next[j] = lvl[j + 1] - lvl[j];
        lvl = std::move(next);
      }
    }
  }
  return m;
}

ArimaModel persistence_model(std::span<const double> history) {
  if (history.empty()) throw std::runtime_error("persistence_model: empty history");
  ArimaModel m;
  m.orders = {1, 0, 0};
  m.ar = {1.0};
  m.intercept = 0.0;
  m.mean = 0.0;
  m.obs_tail = {history.back()};
  m.level_last = {history.back()};
  m.diagnostics = "persistence baseline";
  return m;
}

std::vector<double> rolling_one_step(ArimaModel model, std::span<const double> continuation) {
  std::vector<double> preds;
  preds.reserve(continuation.size());
  for (double v : continuation) {
    preds.push_back(model.one_step());
    model.observe(v);
  }
  return preds;
}

GridResult grid_search(std::span<const double> train, std::span<const double> validation,
                       std::span<const int> p_range, std::span<const int> d_range,
                       std::span<const int> q_range) {
  if (p_range.empty() || d_range.empty() || q_range.empty())
    throw std::runtime_error("grid_search: empty order range");
  if (validation.empty()) throw std::runtime_error("grid_search: empty validation series");

  GridResult result;
  bool have_best = false;
  std::string failures;
  for (int p : p_range)
    for (int d : d_range)
      for (int q : q_range) {
        GridEntry entry;
        entry.orders = {p, d, q};
        try {
          ArimaModel m = fit_arima(train, entry.orders);
          std::vector<double> preds = rolling_one_step(m, validation);
          double se = 0.0;
          for (std::size_t i = 0; i < preds.size(); ++i) {
            double err = preds[i] - validation[i];
            se += err * err;
          }
          entry.rmse = std::sqrt(se / static_cast<double>(preds.size()));
          entry.converged = m.converged;
          entry.diagnostics = m.diagnostics;
          if (!std::isfinite(entry.rmse)) {
            entry.rmse = std::numeric_limits<double>::infinity();
            entry.converged = false;
            entry.diagnostics = "non-finite validation error";
          }
        } catch (const std::exception& ex) {
          entry.rmse = std::numeric_limits<double>::infinity();
          entry.converged = false;
          entry.diagnostics = ex.what();
          failures += "(" + std::to_string(p) + "," + std::to_string(d) + "," +
                      std::to_string(q) + "): " + ex.what() + "; ";
        }
        result.table.push_back(entry);
        if (std::isfinite(entry.rmse)) {
          const auto better = [&](const GridEntry& e) {
            if (!have_best) return true;
            if (e.rmse != result.best_rmse) return e.rmse < result.best_rmse;
            const int s_new = e.orders.sum(), s_old = result.best.sum();
            if (s_new != s_old) return s_new < s_old;
            if (e.orders.p != result.best.p) return e.orders.p < result.best.p;
            if (e.orders.d != result.best.d) return e.orders.d < result.best.d;
            return e.orders.q < result.best.q;
          };
          if (better(entry)) {
            result.best = entry.orders;
            result.best_rmse = entry.rmse;
            have_best = true;
          }
        }
      }
  if (!have_best)
    throw std::runtime_error("grid_search: every configuration failed: " + failures);
  return result;
}

void save_rmse_table(const GridResult& result, const std::string& path) {
  csv::Writer w(path);
  w.header({"p", "d", "q", "rmse", "converged"});
  for (const GridEntry& e : result.table)
    w.row({std::to_string(e.orders.p), std::to_string(e.orders.d), std::to_string(e.orders.q),
           csv::fmt(e.rmse), e.converged ? "1" : "0"});
  w.close();
}

}  // namespace predrx

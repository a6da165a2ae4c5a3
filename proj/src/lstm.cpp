#include "predrx/lstm.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "predrx/csv.hpp"
#include "predrx/kernels.hpp"
#include "predrx/rng.hpp"

namespace predrx {

std::string to_string(Activation a) {
  return a == Activation::PaperSigmoid ? "sigmoid" : "tanh";
}

Activation parse_activation(const std::string& s) {
  if (s == "sigmoid" || s == "paper") return Activation::PaperSigmoid;
  if (s == "tanh" || s == "standard") return Activation::StandardTanh;
  throw std::runtime_error("lstm: unknown activation '" + s + "'");
}

namespace lstmdetail {

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double squash(double x, Activation act) {
  return act == Activation::PaperSigmoid ? sigm(x) : std::tanh(x);
}

Layout Layout::make(int h, int d, int out) {
  Layout L;
  L.h = h;
  L.d = d;
  L.out = out;
  int off = 0;
  for (int k = 0; k < 4; ++k) {
    L.w_off[k] = off;
    off += h * d;
  }
  for (int k = 0; k < 4; ++k) {
    L.u_off[k] = off;
    off += h * h;
  }
  for (int k = 0; k < 4; ++k) {
    L.b_off[k] = off;
    off += h;
  }
  L.v_off = off;
  off += out * h;
  L.vb_off = off;
  off += out;
  L.size = off;
  return L;
}

void Work::resize(int steps_, int h_) {
  steps = steps_;
  h = h_;
  const std::size_t n = static_cast<std::size_t>(steps) * h;
  f.assign(n, 0.0);
  i.assign(n, 0.0);
  o.assign(n, 0.0);
  g.assign(n, 0.0);
  c.assign(n, 0.0);
  sc.assign(n, 0.0);
  hs.assign(n, 0.0);
}

void forward(const double* theta, const Layout& L, Activation act, const double* x, int steps,
             Work& w) {
  w.resize(steps, L.h);
  const int h = L.h, d = L.d;
  std::vector<double> z(4 * static_cast<std::size_t>(h));
  const double* h_prev = nullptr;

  for (int t = 0; t < steps; ++t) {
    const double* xt = x + static_cast<std::size_t>(t) * d;
    for (int k = 0; k < 4; ++k) {
      double* zk = z.data() + static_cast<std::size_t>(k) * h;
      std::memcpy(zk, theta + L.b_off[k], sizeof(double) * h);
      kernels::matvec(theta + L.w_off[k], h, d, xt, zk, true);
      if (t > 0) kernels::matvec(theta + L.u_off[k], h, h, h_prev, zk, true);
    }
    const std::size_t row = static_cast<std::size_t>(t) * h;
    for (int j = 0; j < h; ++j) {
      const double f = sigm(z[j]);
      const double i = sigm(z[h + j]);
      const double o = sigm(z[2 * static_cast<std::size_t>(h) + j]);
      const double g = squash(z[3 * static_cast<std::size_t>(h) + j], act);
      const double c_prev = t > 0 ? w.c[row - h + j] : 0.0;
      const double c = f * c_prev + i * g;
      const double s = squash(c, act);
      w.f[row + j] = f;
      w.i[row + j] = i;
      w.o[row + j] = o;
      w.g[row + j] = g;
      w.c[row + j] = c;
      w.sc[row + j] = s;
      w.hs[row + j] = o * s;
    }
    h_prev = w.hs.data() + row;
  }
}

void backward(const double* theta, const Layout& L, Activation act, const double* x, int steps,
              const Work& w, const double* dh_steps, double* grad) {
  const int h = L.h, d = L.d;
  std::vector<double> dh_next(h, 0.0), dc_next(h, 0.0);
  std::vector<double> dz(4 * static_cast<std::size_t>(h));
  std::vector<double> dh_prev(h);

  for (int t = steps - 1; t >= 0; --t) {
    const std::size_t row = static_cast<std::size_t>(t) * h;
    const double* xt = x + static_cast<std::size_t>(t) * d;
    const double* h_prev = t > 0 ? w.hs.data() + row - h : nullptr;
    for (int j = 0; j < h; ++j) {
      const double f = w.f[row + j], i = w.i[row + j], o = w.o[row + j], g = w.g[row + j];
      const double sc = w.sc[row + j];
      const double c_prev = t > 0 ? w.c[row - h + j] : 0.0;
      const double dh = dh_steps[row + j] + dh_next[j];
      const double dsq = act == Activation::PaperSigmoid ? sc * (1.0 - sc) : 1.0 - sc * sc;
      const double dc = dc_next[j] + dh * o * dsq;
      const double dgate_o = dh * sc;
      const double dgate_f = dc * c_prev;
      const double dgate_i = dc * g;
      const double dgate_g = dc * i;
      dc_next[j] = dc * f;
      dz[j] = dgate_f * f * (1.0 - f);
      dz[h + j] = dgate_i * i * (1.0 - i);
      dz[2 * static_cast<std::size_t>(h) + j] = dgate_o * o * (1.0 - o);
      const double dact = act == Activation::PaperSigmoid ? g * (1.0 - g) : 1.0 - g * g;
      dz[3 * static_cast<std::size_t>(h) + j] = dgate_g * dact;
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    for (int k = 0; k < 4; ++k) {
      const double* dzk = dz.data() + static_cast<std::size_t>(k) * h;
      kernels::ger_acc(grad + L.w_off[k], h, d, dzk, xt);
      if (t > 0) {
        kernels::ger_acc(grad + L.u_off[k], h, h, dzk, h_prev);
        kernels::matvec_t_acc(theta + L.u_off[k], h, h, dzk, dh_prev.data());
      }
      kernels::axpy(1.0, dzk, grad + L.b_off[k], h);
    }
    dh_next = dh_prev;
  }
}

}  // namespace lstmdetail

RegressionNet make_regression_net(int hidden, int input, int output, Activation act,
                                  std::uint64_t seed) {
  if (hidden < 1 || input < 1 || output < 1)
    throw std::runtime_error("lstm: dimensions must be positive");
  RegressionNet net;
  net.hidden = hidden;
  net.input = input;
  net.output = output;
  net.act = act;
  const auto L = net.layout();
  net.theta.assign(L.size, 0.0);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  // weights uniform in +-1/sqrt(h); biases start at zero
  for (int k = 0; k < 4; ++k) {
    for (int idx = 0; idx < hidden * input; ++idx)
      net.theta[L.w_off[k] + idx] = rng.uniform(-bound, bound);
    for (int idx = 0; idx < hidden * hidden; ++idx)
      net.theta[L.u_off[k] + idx] = rng.uniform(-bound, bound);
  }
  for (int idx = 0; idx < output * hidden; ++idx) net.theta[L.v_off + idx] = rng.uniform(-bound, bound);
  return net;
}

double regression_loss(const RegressionNet& net, const SequenceDataset& ds, double* grad) {
  if (ds.n < 1) throw std::runtime_error("lstm: empty dataset");
  if (ds.input != net.input || ds.output != net.output)
    throw std::runtime_error("lstm: dataset dimensions do not match the net");
  const auto L = net.layout();
  const int h = net.hidden, out = net.output;
  lstmdetail::Work w;
  std::vector<double> y(out), dy(out);
  std::vector<double> dh_steps;
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(ds.n);

  for (int s = 0; s < ds.n; ++s) {
    const double* x = ds.window(s);
    lstmdetail::forward(net.theta.data(), L, net.act, x, ds.steps, w);
    const double* h_last = w.hs.data() + static_cast<std::size_t>(ds.steps - 1) * h;
    std::memcpy(y.data(), net.theta.data() + L.vb_off, sizeof(double) * out);
    kernels::matvec(net.theta.data() + L.v_off, out, h, h_last, y.data(), true);

    const double* target = ds.target(s);
    double window_loss = 0.0;
    for (int k = 0; k < out; ++k) {
      const double err = y[k] - target[k];
      window_loss += err * err;
      dy[k] = 2.0 * err / static_cast<double>(out) * inv_n;
    }
    loss += window_loss / static_cast<double>(out);

    if (grad) {
      kernels::ger_acc(grad + L.v_off, out, h, dy.data(), h_last);
      kernels::axpy(1.0, dy.data(), grad + L.vb_off, out);
      dh_steps.assign(static_cast<std::size_t>(ds.steps) * h, 0.0);
      kernels::matvec_t_acc(net.theta.data() + L.v_off, out, h, dy.data(),
                            dh_steps.data() + static_cast<std::size_t>(ds.steps - 1) * h);
      lstmdetail::backward(net.theta.data(), L, net.act, x, ds.steps, w, dh_steps.data(), grad);
    }
  }
  return loss * inv_n;
}

std::vector<double> train_regression(RegressionNet& net, const SequenceDataset& ds,
                                     const TrainOptions& opts) {
  const auto L = net.layout();
  std::vector<double> grad(L.size);
  std::vector<double> velocity(L.size, 0.0);
  std::vector<double> curve;
  curve.reserve(opts.epochs);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double loss = regression_loss(net, ds, grad.data());
    if (!std::isfinite(loss))
      throw std::runtime_error("lstm: training diverged (non-finite loss) at epoch " +
                               std::to_string(epoch) + "; reduce the learning rate");
    curve.push_back(loss);
    const double norm = std::sqrt(kernels::sum_sq(grad.data(), L.size));
    const double scale = (opts.clip > 0 && norm > opts.clip) ? opts.clip / norm : 1.0;
    for (int i = 0; i < L.size; ++i) {
      velocity[i] = opts.momentum * velocity[i] + grad[i] * scale;
      net.theta[i] -= opts.lr * velocity[i];
    }
  }
  net.trained = true;
  return curve;
}

double gradient_check(const RegressionNet& net, const SequenceDataset& ds, double eps) {
  if (eps <= 0) throw std::runtime_error("gradient_check: epsilon must be positive");
  const auto L = net.layout();
  std::vector<double> grad(L.size, 0.0);
  regression_loss(net, ds, grad.data());

  RegressionNet probe = net;
  double worst = 0.0;
  for (int idx = 0; idx < L.size; ++idx) {
    const double saved = probe.theta[idx];
    probe.theta[idx] = saved + eps;
    const double lp = regression_loss(probe, ds, nullptr);
    probe.theta[idx] = saved - eps;
    const double lm = regression_loss(probe, ds, nullptr);
    probe.theta[idx] = saved;
    const double numeric = (lp - lm) / (2.0 * eps);
    const double denom = std::max(1e-8, std::fabs(numeric) + std::fabs(grad[idx]));
    worst = std::max(worst, std::fabs(numeric - grad[idx]) / denom);
  }
  return worst;
}

namespace {

void apply_input_norm(const RegressionNet& net, const double* raw, int steps, double* out) {
  const int d = net.input;
  for (int t = 0; t < steps; ++t)
    for (int j = 0; j < d; ++j) {
      double v = raw[t * d + j];
      if (!net.in_shift.empty()) v = (v - net.in_shift[j]) / net.in_scale[j];
      out[t * d + j] = v;
    }
}

}  // namespace

std::vector<double> predict(const RegressionNet& net, std::span<const double> window, int steps,
                            int horizon) {
  if (horizon < 1) throw std::runtime_error("predict: horizon must be at least 1");
  if (steps < 1 || static_cast<int>(window.size()) != steps * net.input)
    throw std::runtime_error("predict: window size does not match steps*input");
  const auto L = net.layout();
  lstmdetail::Work w;
  std::vector<double> x(window.size());
  apply_input_norm(net, window.data(), steps, x.data());

  std::vector<double> out;
  if (horizon <= net.output) {
    lstmdetail::forward(net.theta.data(), L, net.act, x.data(), steps, w);
    const double* h_last = w.hs.data() + static_cast<std::size_t>(steps - 1) * net.hidden;
    std::vector<double> y(net.output);
    std::memcpy(y.data(), net.theta.data() + L.vb_off, sizeof(double) * net.output);
    kernels::matvec(net.theta.data() + L.v_off, net.output, net.hidden, h_last, y.data(), true);
    out.assign(y.begin(), y.begin() + horizon);
  } else if (net.output == 1 && net.input == 1) {
    // recursive single-step mode
    std::vector<double> buf = x;
    for (int step = 0; step < horizon; ++step) {
      lstmdetail::forward(net.theta.data(), L, net.act, buf.data(), static_cast<int>(buf.size()), w);
      const double* h_last =
          w.hs.data() + (buf.size() - 1) * static_cast<std::size_t>(net.hidden);
      double y = net.theta[L.vb_off] + kernels::dot(net.theta.data() + L.v_off, h_last, net.hidden);
      out.push_back(y);
      buf.erase(buf.begin());
      buf.push_back(y);
    }
  } else {
    throw std::runtime_error("predict: horizon " + std::to_string(horizon) +
                             " exceeds the configured output size " + std::to_string(net.output));
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!net.out_scale.empty()) {
      const std::size_t j = std::min(k, net.out_scale.size() - 1);
      out[k] = out[k] * net.out_scale[j] + net.out_shift[j];
    }
  }
  return out;
}

void cell_step(const RegressionNet& net, std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev, std::span<double> h_out, std::span<double> c_out) {
  const int h = net.hidden, d = net.input;
  if (static_cast<int>(x.size()) != d || static_cast<int>(h_prev.size()) != h ||
      static_cast<int>(c_prev.size()) != h || static_cast<int>(h_out.size()) != h ||
      static_cast<int>(c_out.size()) != h)
    throw std::runtime_error("cell_step: dimension mismatch");
  const auto L = net.layout();
  std::vector<double> z(4 * static_cast<std::size_t>(h));
  for (int k = 0; k < 4; ++k) {
    double* zk = z.data() + static_cast<std::size_t>(k) * h;
    std::memcpy(zk, net.theta.data() + L.b_off[k], sizeof(double) * h);
    kernels::matvec(net.theta.data() + L.w_off[k], h, d, x.data(), zk, true);
    kernels::matvec(net.theta.data() + L.u_off[k], h, h, h_prev.data(), zk, true);
  }
  for (int j = 0; j < h; ++j) {
    const double f = lstmdetail::sigm(z[j]);
    const double i = lstmdetail::sigm(z[h + j]);
    const double o = lstmdetail::sigm(z[2 * static_cast<std::size_t>(h) + j]);
    const double g = lstmdetail::squash(z[3 * static_cast<std::size_t>(h) + j], net.act);
    const double c = f * c_prev[j] + i * g;
    c_out[j] = c;
    h_out[j] = o * lstmdetail::squash(c, net.act);
  }
}

void set_input_normalization(RegressionNet& net, std::span<const double> shift,
                             std::span<const double> scale) {
  if (static_cast<int>(shift.size()) != net.input || static_cast<int>(scale.size()) != net.input)
    throw std::runtime_error("lstm: input normalization size mismatch");
  net.in_shift.assign(shift.begin(), shift.end());
  net.in_scale.assign(scale.begin(), scale.end());
  for (double& s : net.in_scale)
    if (s == 0.0) s = 1.0;
}

void set_output_normalization(RegressionNet& net, std::span<const double> shift,
                              std::span<const double> scale) {
  net.out_shift.assign(shift.begin(), shift.end());
  net.out_scale.assign(scale.begin(), scale.end());
  for (double& s : net.out_scale)
    if (s == 0.0) s = 1.0;
}

void save_regression_net(const RegressionNet& net, const std::string& path) {
  nlohmann::json j;
  j["format"] = "regnet-v1";
  j["hidden"] = net.hidden;
  j["input"] = net.input;
  j["output"] = net.output;
  j["activation"] = to_string(net.act);
  j["trained"] = net.trained;
  j["theta"] = net.theta;
  j["in_shift"] = net.in_shift;
  j["in_scale"] = net.in_scale;
  j["out_shift"] = net.out_shift;
  j["out_scale"] = net.out_scale;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("lstm: cannot write " + path);
  out << j.dump(1) << "\n";
}

RegressionNet load_regression_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("lstm: cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "regnet-v1")
    throw std::runtime_error("lstm: " + path + " is not a regnet-v1 checkpoint");
  RegressionNet net;
  net.hidden = j.at("hidden").get<int>();
  net.input = j.at("input").get<int>();
  net.output = j.at("output").get<int>();
  net.act = parse_activation(j.at("activation").get<std::string>());
  net.trained = j.value("trained", false);
  net.theta = j.at("theta").get<std::vector<double>>();
  net.in_shift = j.value("in_shift", std::vector<double>{});
  net.in_scale = j.value("in_scale", std::vector<double>{});
  net.out_shift = j.value("out_shift", std::vector<double>{});
  net.out_scale = j.value("out_scale", std::vector<double>{});
  if (static_cast<int>(net.theta.size()) != net.layout().size)
    throw std::runtime_error("lstm: checkpoint parameter count mismatch");
  return net;
}

void save_loss_curve(std::span<const double> losses, const std::string& path) {
  csv::Writer w(path);
  w.header({"epoch", "mse"});
  for (std::size_t i = 0; i < losses.size(); ++i)
    w.row({std::to_string(i), csv::fmt(losses[i])});
  w.close();
}

}  // namespace predrx

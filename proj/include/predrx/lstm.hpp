#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace predrx {

// The printed cell equations squash the candidate and the cell output with
// the sigmoid; the conventional cell uses tanh. Both are supported and the
// variant is recorded with the model so inference matches training.
enum class Activation { PaperSigmoid, StandardTanh };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

namespace lstmdetail {

// Offsets into the flat parameter vector:
// Wf Wi Wo Wc (h*d each) | Uf Ui Uo Uc (h*h) | bf bi bo bc (h) | V (out*h) | vb (out)
struct Layout {
  int h = 0, d = 0, out = 0;
  int w_off[4], u_off[4], b_off[4];
  int v_off = 0, vb_off = 0;
  int size = 0;

  static Layout make(int h, int d, int out);
};

struct Work {
  int steps = 0, h = 0;
  std::vector<double> f, i, o, g, c, sc, hs;  // steps*h each; sc = squash(c)
  void resize(int steps, int h);
};

// Runs the recurrent stack over a steps*d input (zero initial state).
void forward(const double* theta, const Layout& L, Activation act, const double* x, int steps,
             Work& w);

// Accumulates parameter gradients given dL/dh_t for every step (steps*h).
void backward(const double* theta, const Layout& L, Activation act, const double* x, int steps,
              const Work& w, const double* dh_steps, double* grad);

}  // namespace lstmdetail

// Windows are flattened row-major: x is n*steps*input, y is n*output.
struct SequenceDataset {
  int n = 0, steps = 0, input = 0, output = 0;
  std::vector<double> x;
  std::vector<double> y;

  const double* window(int i) const { return x.data() + static_cast<std::size_t>(i) * steps * input; }
  const double* target(int i) const { return y.data() + static_cast<std::size_t>(i) * output; }
};

// LSTM -> fully connected -> linear output, trained on the mean squared
// error over the output window. Input/output normalization constants are
// stored with the model; predict() consumes and produces raw units.
struct RegressionNet {
  int hidden = 0, input = 0, output = 0;
  Activation act = Activation::StandardTanh;
  std::vector<double> theta;
  std::vector<double> in_shift, in_scale;    // (x - shift) / scale
  std::vector<double> out_shift, out_scale;  // y_raw = y * scale + shift
  bool trained = false;

  lstmdetail::Layout layout() const { return lstmdetail::Layout::make(hidden, input, output); }
};

RegressionNet make_regression_net(int hidden, int input, int output, Activation act,
                                  std::uint64_t seed);

struct TrainOptions {
  int epochs = 200;
  double lr = 0.005;
  double clip = 1.0;      // global gradient-norm ceiling
  double momentum = 0.9;  // heavy-ball coefficient; 0 gives plain descent
};

// Full-batch gradient descent; returns the per-epoch training MSE. The
// dataset is consumed as-is (normalize first when the net carries constants).
std::vector<double> train_regression(RegressionNet& net, const SequenceDataset& ds,
                                     const TrainOptions& opts);

// Batch loss and, when grad is non-null, its gradient w.r.t. theta.
double regression_loss(const RegressionNet& net, const SequenceDataset& ds, double* grad);

// Max relative disagreement between analytic and central finite-difference
// gradients over every parameter.
double gradient_check(const RegressionNet& net, const SequenceDataset& ds, double eps);

// Multi-step prediction from a raw steps*input window. Multi-output heads
// return their first `horizon` outputs; a 1-in/1-out net runs recursively.
std::vector<double> predict(const RegressionNet& net, std::span<const double> window, int steps,
                            int horizon);

// One cell update (exposed for verification against hand calculations).
void cell_step(const RegressionNet& net, std::span<const double> x, std::span<const double> h_prev,
               std::span<const double> c_prev, std::span<double> h_out, std::span<double> c_out);

void set_input_normalization(RegressionNet& net, std::span<const double> shift,
                             std::span<const double> scale);
void set_output_normalization(RegressionNet& net, std::span<const double> shift,
                              std::span<const double> scale);

void save_regression_net(const RegressionNet& net, const std::string& path);
RegressionNet load_regression_net(const std::string& path);

void save_loss_curve(std::span<const double> losses, const std::string& path);

}  // namespace predrx

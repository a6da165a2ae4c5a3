#include "predrx/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace predrx::kernels {

namespace detail {

void matvec_scalar(const double* w, int rows, int cols, const double* x, double* y, bool acc) {
  for (int r = 0; r < rows; ++r) {
    double s = acc ? y[r] : 0.0;
    const double* wr = w + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) s += wr[c] * x[c];
    y[r] = s;
  }
}

void matvec_t_acc_scalar(const double* w, int rows, int cols, const double* x, double* y) {
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<std::size_t>(r) * cols;
    const double xr = x[r];
    for (int c = 0; c < cols; ++c) y[c] += wr[c] * xr;
  }
}

void ger_acc_scalar(double* a, int rows, int cols, const double* x, const double* y) {
  for (int r = 0; r < rows; ++r) {
    double* ar = a + static_cast<std::size_t>(r) * cols;
    const double xr = x[r];
    for (int c = 0; c < cols; ++c) ar[c] += xr * y[c];
  }
}

double dot_scalar(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq_scalar(const double* x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace detail

namespace {

bool detect_avx2() {
#if defined(PREDRX_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Backend> g_backend{detect_avx2() ? Backend::Avx2 : Backend::Scalar};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::Avx2 && !avx2_available())
    throw std::runtime_error("kernels: AVX2 backend not available on this host");
  g_backend.store(b, std::memory_order_relaxed);
}

bool avx2_available() { return detect_avx2(); }

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

void matvec(const double* w, int rows, int cols, const double* x, double* y, bool accumulate) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) {
    detail::matvec_avx2(w, rows, cols, x, y, accumulate);
    return;
  }
#endif
  detail::matvec_scalar(w, rows, cols, x, y, accumulate);
}

void matvec_t_acc(const double* w, int rows, int cols, const double* x, double* y) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) {
    detail::matvec_t_acc_avx2(w, rows, cols, x, y);
    return;
  }
#endif
  detail::matvec_t_acc_scalar(w, rows, cols, x, y);
}

void ger_acc(double* a, int rows, int cols, const double* x, const double* y) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) {
    detail::ger_acc_avx2(a, rows, cols, x, y);
    return;
  }
#endif
  detail::ger_acc_scalar(a, rows, cols, x, y);
}

double dot(const double* a, const double* b, int n) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return detail::dot_avx2(a, b, n);
#endif
  return detail::dot_scalar(a, b, n);
}

void axpy(double alpha, const double* x, double* y, int n) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) {
    detail::axpy_avx2(alpha, x, y, n);
    return;
  }
#endif
  detail::axpy_scalar(alpha, x, y, n);
}

double sum_sq(const double* x, int n) {
#if defined(PREDRX_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return detail::sum_sq_avx2(x, n);
#endif
  return detail::sum_sq_scalar(x, n);
}

bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-300) return false;
    if (pivot != col) {
      for (int c = col; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(pivot) * n + c], a[static_cast<std::size_t>(col) * n + c]);
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      double f = a[static_cast<std::size_t>(r) * n + col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= f * a[static_cast<std::size_t>(col) * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[static_cast<std::size_t>(r) * n + c] * b[c];
    b[r] = s / a[static_cast<std::size_t>(r) * n + r];
  }
  return true;
}

}  // namespace predrx::kernels

#include "predrx/kernels.hpp"

#if defined(PREDRX_HAVE_AVX2)

#include <immintrin.h>

namespace predrx::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

void matvec_avx2(const double* w, int rows, int cols, const double* x, double* y, bool acc) {
  const int tail = cols & 3;
  const int main = cols - tail;
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<std::size_t>(r) * cols;
    __m256d accv = _mm256_setzero_pd();
    for (int c = 0; c < main; c += 4)
      accv = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), _mm256_loadu_pd(x + c), accv);
    double s = hsum(accv);
    for (int c = main; c < cols; ++c) s += wr[c] * x[c];
    y[r] = acc ? y[r] + s : s;
  }
}

void matvec_t_acc_avx2(const double* w, int rows, int cols, const double* x, double* y) {
  const int tail = cols & 3;
  const int main = cols - tail;
  for (int r = 0; r < rows; ++r) {
    const double* wr = w + static_cast<std::size_t>(r) * cols;
    const __m256d xr = _mm256_set1_pd(x[r]);
    for (int c = 0; c < main; c += 4) {
      __m256d yv = _mm256_loadu_pd(y + c);
      yv = _mm256_fmadd_pd(_mm256_loadu_pd(wr + c), xr, yv);
      _mm256_storeu_pd(y + c, yv);
    }
    for (int c = main; c < cols; ++c) y[c] += wr[c] * x[r];
  }
}

void ger_acc_avx2(double* a, int rows, int cols, const double* x, const double* y) {
  const int tail = cols & 3;
  const int main = cols - tail;
  for (int r = 0; r < rows; ++r) {
    double* ar = a + static_cast<std::size_t>(r) * cols;
    const __m256d xr = _mm256_set1_pd(x[r]);
    for (int c = 0; c < main; c += 4) {
      __m256d av = _mm256_loadu_pd(ar + c);
      av = _mm256_fmadd_pd(xr, _mm256_loadu_pd(y + c), av);
      _mm256_storeu_pd(ar + c, av);
    }
    for (int c = main; c < cols; ++c) ar[c] += x[r] * y[c];
  }
}

double dot_avx2(const double* a, const double* b, int n) {
  const int tail = n & 3;
  const int main = n - tail;
  __m256d acc = _mm256_setzero_pd();
  for (int i = 0; i < main; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (int i = main; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, int n) {
  const int tail = n & 3;
  const int main = n - tail;
  const __m256d av = _mm256_set1_pd(alpha);
  for (int i = 0; i < main; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (int i = main; i < n; ++i) y[i] += alpha * x[i];
}

double sum_sq_avx2(const double* x, int n) {
  const int tail = n & 3;
  const int main = n - tail;
  __m256d acc = _mm256_setzero_pd();
  for (int i = 0; i < main; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (int i = main; i < n; ++i) s += x[i] * x[i];
  return s;
}

}  // namespace predrx::kernels::detail

#endif  // PREDRX_HAVE_AVX2

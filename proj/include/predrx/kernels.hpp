#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace predrx::kernels {

// Dense double-precision primitives behind the forecasting math. Each op has
// a scalar reference implementation and, on x86-64 with AVX2+FMA, a vector
// variant selected at runtime. set_backend(Scalar) forces the reference path
// (used by the equivalence tests).
enum class Backend { Scalar, Avx2 };

Backend active_backend();
void set_backend(Backend b);
bool avx2_available();
std::string backend_name(Backend b);

// y = W x, or y += W x when accumulate; W is row-major rows x cols.
void matvec(const double* w, int rows, int cols, const double* x, double* y, bool accumulate = false);

// y += W^T x; W row-major rows x cols, x has rows entries, y has cols.
void matvec_t_acc(const double* w, int rows, int cols, const double* x, double* y);

// A += x y^T; A row-major rows x cols.
void ger_acc(double* a, int rows, int cols, const double* x, const double* y);

double dot(const double* a, const double* b, int n);

// y += alpha x
void axpy(double alpha, const double* x, double* y, int n);

double sum_sq(const double* x, int n);

// Small dense solve by Gaussian elimination with partial pivoting; a is
// row-major n x n and is destroyed. Returns false when singular.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n);

namespace detail {
void matvec_scalar(const double* w, int rows, int cols, const double* x, double* y, bool acc);
void matvec_t_acc_scalar(const double* w, int rows, int cols, const double* x, double* y);
void ger_acc_scalar(double* a, int rows, int cols, const double* x, const double* y);
double dot_scalar(const double* a, const double* b, int n);
void axpy_scalar(double alpha, const double* x, double* y, int n);
double sum_sq_scalar(const double* x, int n);
#if defined(PREDRX_HAVE_AVX2)
void matvec_avx2(const double* w, int rows, int cols, const double* x, double* y, bool acc);
void matvec_t_acc_avx2(const double* w, int rows, int cols, const double* x, double* y);
void ger_acc_avx2(double* a, int rows, int cols, const double* x, const double* y);
double dot_avx2(const double* a, const double* b, int n);
void axpy_avx2(double alpha, const double* x, double* y, int n);
double sum_sq_avx2(const double* x, int n);
#endif
}  // namespace detail

}  // namespace predrx::kernels

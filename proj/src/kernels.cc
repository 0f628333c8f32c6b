// dabias/kernels.cc

// Copyright 2026  dabias authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dabias/kernels.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>

namespace dabias {
namespace kernels {

namespace {

std::atomic<bool> g_force_serial{false};

// Below these sizes thread startup costs more than the loop itself.
constexpr int64_t kMatmulParThreshold = 1 << 15;      // m*k*n
constexpr int64_t kElementParThreshold = 1 << 14;     // n
constexpr int64_t kSoftmaxParThreshold = 1 << 13;     // rows*cols

inline bool use_parallel(int64_t work, int64_t threshold) {
#ifdef _OPENMP
  return !g_force_serial.load(std::memory_order_relaxed) && work >= threshold;
#else
  (void)work;
  (void)threshold;
  return false;
#endif
}

}  // namespace

void set_force_serial(bool v) { g_force_serial.store(v); }
bool force_serial() { return g_force_serial.load(); }

// ---- matmul ----

// Inner accumulation runs k in ascending order for every output element in
// both variants, so serial and OpenMP results are bitwise identical.
static inline void matmul_row(const double* a, const double* b, double* c,
                              int64_t i, int64_t k, int64_t n) {
  double* crow = c + i * n;
  std::fill(crow, crow + n, 0.0);
  const double* arow = a + i * k;
  for (int64_t kk = 0; kk < k; ++kk) {
    double av = arow[kk];
    const double* brow = b + kk * n;
    for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

void matmul_serial(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul_omp(const double* a, const double* b, double* c, int64_t m,
                int64_t k, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul(const double* a, const double* b, double* c, int64_t m, int64_t k,
            int64_t n) {
  if (use_parallel(m * k * n, kMatmulParThreshold) && m > 1)
    matmul_omp(a, b, c, m, k, n);
  else
    matmul_serial(a, b, c, m, k, n);
}

static inline void matmul_nt_row(const double* a, const double* b, double* c,
                                 int64_t i, int64_t k, int64_t n) {
  const double* arow = a + i * k;
  double* crow = c + i * n;
  for (int64_t j = 0; j < n; ++j) {
    const double* brow = b + j * k;
    double acc = 0.0;
    for (int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
    crow[j] = acc;
  }
}

void matmul_nt_serial(const double* a, const double* b, double* c, int64_t m,
                      int64_t k, int64_t n) {
  for (int64_t i = 0; i < m; ++i) matmul_nt_row(a, b, c, i, k, n);
}

void matmul_nt_omp(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < m; ++i) matmul_nt_row(a, b, c, i, k, n);
}

void matmul_nt(const double* a, const double* b, double* c, int64_t m,
               int64_t k, int64_t n) {
  if (use_parallel(m * k * n, kMatmulParThreshold) && m > 1)
    matmul_nt_omp(a, b, c, m, k, n);
  else
    matmul_nt_serial(a, b, c, m, k, n);
}

void matmul_acc(const double* a, const double* b, double* c, int64_t m,
                int64_t k, int64_t n) {
  bool par = use_parallel(m * k * n, kMatmulParThreshold) && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      double av = arow[kk];
      const double* brow = b + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void matmul_nt_acc(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n) {
  bool par = use_parallel(m * k * n, kMatmulParThreshold) && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double acc = 0.0;
      for (int64_t kk = 0; kk < k; ++kk) acc += arow[kk] * brow[kk];
      crow[j] += acc;
    }
  }
}

void matmul_tn_acc(const double* a, const double* b, double* c, int64_t p,
                   int64_t m, int64_t n) {
  bool par = use_parallel(p * m * n, kMatmulParThreshold) && m > 1;
#pragma omp parallel for schedule(static) if (par)
  for (int64_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (int64_t pp = 0; pp < p; ++pp) {
      double av = a[pp * m + i];
      const double* brow = b + pp * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// ---- elementwise ----

#define DABIAS_EW_BINARY(NAME, EXPR)                                     \
  void NAME##_serial(const double* a, const double* b, double* y,        \
                     int64_t n) {                                        \
    for (int64_t i = 0; i < n; ++i) y[i] = (EXPR);                       \
  }                                                                      \
  void NAME##_omp(const double* a, const double* b, double* y,           \
                  int64_t n) {                                           \
    _Pragma("omp parallel for schedule(static)")                         \
    for (int64_t i = 0; i < n; ++i) y[i] = (EXPR);                       \
  }                                                                      \
  void NAME(const double* a, const double* b, double* y, int64_t n) {    \
    if (use_parallel(n, kElementParThreshold))                           \
      NAME##_omp(a, b, y, n);                                            \
    else                                                                 \
      NAME##_serial(a, b, y, n);                                         \
  }

DABIAS_EW_BINARY(add, a[i] + b[i])
DABIAS_EW_BINARY(mul, a[i] * b[i])
#undef DABIAS_EW_BINARY

#define DABIAS_EW_UNARY(NAME, FNAME, EXPR)                               \
  void NAME##_serial(const double* x, double* y, int64_t n) {            \
    for (int64_t i = 0; i < n; ++i) y[i] = (EXPR);                       \
  }                                                                      \
  void NAME##_omp(const double* x, double* y, int64_t n) {               \
    _Pragma("omp parallel for schedule(static)")                         \
    for (int64_t i = 0; i < n; ++i) y[i] = (EXPR);                       \
  }                                                                      \
  void FNAME(const double* x, double* y, int64_t n) {                    \
    if (use_parallel(n, kElementParThreshold))                           \
      NAME##_omp(x, y, n);                                               \
    else                                                                 \
      NAME##_serial(x, y, n);                                            \
  }

DABIAS_EW_UNARY(relu, relu, x[i] > 0.0 ? x[i] : 0.0)
DABIAS_EW_UNARY(tanh, tanh_, std::tanh(x[i]))
DABIAS_EW_UNARY(sigmoid, sigmoid, 1.0 / (1.0 + std::exp(-x[i])))
#undef DABIAS_EW_UNARY

void axpy(double alpha, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double c, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = c * x[i];
}

void acc_mul(const double* a, const double* b, double* dst, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dst[i] += a[i] * b[i];
}

void acc_relu_bwd(const double* x, const double* dy, double* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

void acc_tanh_bwd(const double* y, const double* dy, double* dx, int64_t n) {
  for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void acc_sigmoid_bwd(const double* y, const double* dy, double* dx,
                     int64_t n) {
  for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
}

// ---- softmax ----

static inline void softmax_row(const double* x, double* y, int64_t cols) {
  double mx = x[0];
  for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double s = 0.0;
  for (int64_t j = 0; j < cols; ++j) {
    y[j] = std::exp(x[j] - mx);
    s += y[j];
  }
  double inv = 1.0 / s;
  for (int64_t j = 0; j < cols; ++j) y[j] *= inv;
}

static inline void log_softmax_row(const double* x, double* y, int64_t cols) {
  double mx = x[0];
  for (int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double s = 0.0;
  for (int64_t j = 0; j < cols; ++j) s += std::exp(x[j] - mx);
  double lse = mx + std::log(s);
  for (int64_t j = 0; j < cols; ++j) y[j] = x[j] - lse;
}

void row_softmax_serial(const double* x, double* y, int64_t rows,
                        int64_t cols) {
  for (int64_t i = 0; i < rows; ++i)
    softmax_row(x + i * cols, y + i * cols, cols);
}

void row_softmax_omp(const double* x, double* y, int64_t rows, int64_t cols) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < rows; ++i)
    softmax_row(x + i * cols, y + i * cols, cols);
}

void row_softmax(const double* x, double* y, int64_t rows, int64_t cols) {
  if (use_parallel(rows * cols, kSoftmaxParThreshold) && rows > 1)
    row_softmax_omp(x, y, rows, cols);
  else
    row_softmax_serial(x, y, rows, cols);
}

void row_log_softmax_serial(const double* x, double* y, int64_t rows,
                            int64_t cols) {
  for (int64_t i = 0; i < rows; ++i)
    log_softmax_row(x + i * cols, y + i * cols, cols);
}

void row_log_softmax_omp(const double* x, double* y, int64_t rows,
                         int64_t cols) {
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < rows; ++i)
    log_softmax_row(x + i * cols, y + i * cols, cols);
}

void row_log_softmax(const double* x, double* y, int64_t rows, int64_t cols) {
  if (use_parallel(rows * cols, kSoftmaxParThreshold) && rows > 1)
    row_log_softmax_omp(x, y, rows, cols);
  else
    row_log_softmax_serial(x, y, rows, cols);
}

void acc_row_softmax_bwd(const double* y, const double* dy, double* dx,
                         int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; ++i) {
    const double* yr = y + i * cols;
    const double* dyr = dy + i * cols;
    double* dxr = dx + i * cols;
    double dot = 0.0;
    for (int64_t j = 0; j < cols; ++j) dot += dyr[j] * yr[j];
    for (int64_t j = 0; j < cols; ++j) dxr[j] += yr[j] * (dyr[j] - dot);
  }
}

void acc_row_log_softmax_bwd(const double* y, const double* dy, double* dx,
                             int64_t rows, int64_t cols) {
  bool par = use_parallel(rows * cols, kSoftmaxParThreshold) && rows > 1;
#pragma omp parallel for schedule(static) if (par)
  for (int64_t i = 0; i < rows; ++i) {
    const double* yr = y + i * cols;
    const double* dyr = dy + i * cols;
    double* dxr = dx + i * cols;
    double s = 0.0;
    for (int64_t j = 0; j < cols; ++j) s += dyr[j];
    for (int64_t j = 0; j < cols; ++j) dxr[j] += dyr[j] - std::exp(yr[j]) * s;
  }
}

void colsum_acc(const double* a, double* dst, int64_t rows, int64_t cols) {
  for (int64_t i = 0; i < rows; ++i) {
    const double* row = a + i * cols;
    for (int64_t j = 0; j < cols; ++j) dst[j] += row[j];
  }
}

double sum(const double* x, int64_t n) {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double logsumexp2(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace kernels
}  // namespace dabias

// dabias/kernels.h

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

#ifndef DABIAS_KERNELS_H_
#define DABIAS_KERNELS_H_

#include <cstdint>

// Dense numeric kernels. Every kernel has a serial reference version and an
// OpenMP version; the OpenMP version parallelizes over output elements only,
// so each element is computed with the same operation order as the serial
// reference and the two are bitwise identical. The unprefixed entry points
// dispatch on problem size and the force_serial switch.

namespace dabias {
namespace kernels {

// When true, dispatch always picks the serial reference path.
void set_force_serial(bool v);
bool force_serial();

// ---- matmul family ----
// C[m x n] = A[m x k] * B[k x n]
void matmul_serial(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n);
void matmul_omp(const double* a, const double* b, double* c, int64_t m,
                int64_t k, int64_t n);
void matmul(const double* a, const double* b, double* c, int64_t m, int64_t k,
            int64_t n);

// C[m x n] = A[m x k] * B[n x k]^T
void matmul_nt_serial(const double* a, const double* b, double* c, int64_t m,
                      int64_t k, int64_t n);
void matmul_nt_omp(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n);
void matmul_nt(const double* a, const double* b, double* c, int64_t m,
               int64_t k, int64_t n);

// C[m x n] += A[m x k] * B[k x n]
void matmul_acc(const double* a, const double* b, double* c, int64_t m,
                int64_t k, int64_t n);
// C[m x n] += A[m x k] * B[n x k]^T
void matmul_nt_acc(const double* a, const double* b, double* c, int64_t m,
                   int64_t k, int64_t n);
// C[m x n] += A[p x m]^T * B[p x n]
void matmul_tn_acc(const double* a, const double* b, double* c, int64_t p,
                   int64_t m, int64_t n);

// ---- elementwise ----
void add_serial(const double* a, const double* b, double* y, int64_t n);
void add_omp(const double* a, const double* b, double* y, int64_t n);
void add(const double* a, const double* b, double* y, int64_t n);

void mul_serial(const double* a, const double* b, double* y, int64_t n);
void mul_omp(const double* a, const double* b, double* y, int64_t n);
void mul(const double* a, const double* b, double* y, int64_t n);

void relu_serial(const double* x, double* y, int64_t n);
void relu_omp(const double* x, double* y, int64_t n);
void relu(const double* x, double* y, int64_t n);

void tanh_serial(const double* x, double* y, int64_t n);
void tanh_omp(const double* x, double* y, int64_t n);
void tanh_(const double* x, double* y, int64_t n);

void sigmoid_serial(const double* x, double* y, int64_t n);
void sigmoid_omp(const double* x, double* y, int64_t n);
void sigmoid(const double* x, double* y, int64_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, int64_t n);
// y = c * x
void scale(double c, const double* x, double* y, int64_t n);
// dst += a .* b
void acc_mul(const double* a, const double* b, double* dst, int64_t n);
// dx += dy where x > 0
void acc_relu_bwd(const double* x, const double* dy, double* dx, int64_t n);
// dx += dy * (1 - y^2), y = tanh(x)
void acc_tanh_bwd(const double* y, const double* dy, double* dx, int64_t n);
// dx += dy * y * (1 - y), y = sigmoid(x)
void acc_sigmoid_bwd(const double* y, const double* dy, double* dx, int64_t n);

// ---- softmax over the last axis ----
void row_softmax_serial(const double* x, double* y, int64_t rows,
                        int64_t cols);
void row_softmax_omp(const double* x, double* y, int64_t rows, int64_t cols);
void row_softmax(const double* x, double* y, int64_t rows, int64_t cols);

void row_log_softmax_serial(const double* x, double* y, int64_t rows,
                            int64_t cols);
void row_log_softmax_omp(const double* x, double* y, int64_t rows,
                         int64_t cols);
void row_log_softmax(const double* x, double* y, int64_t rows, int64_t cols);

// dx += y .* (dy - rowdot(dy, y))
void acc_row_softmax_bwd(const double* y, const double* dy, double* dx,
                         int64_t rows, int64_t cols);
// dx += dy - exp(y) .* rowsum(dy)
void acc_row_log_softmax_bwd(const double* y, const double* dy, double* dx,
                             int64_t rows, int64_t cols);

// dst[j] += sum_i a[i, j]
void colsum_acc(const double* a, double* dst, int64_t rows, int64_t cols);

// Fixed left-to-right sum (the project-wide deterministic reduction order).
double sum(const double* x, int64_t n);

// log(exp(a) + exp(b)) without overflow; tolerates -inf inputs.
double logsumexp2(double a, double b);

}  // namespace kernels
}  // namespace dabias

#endif  // DABIAS_KERNELS_H_

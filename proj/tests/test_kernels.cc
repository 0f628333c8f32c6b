// dabias/tests/test_kernels.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <vector>

#include "dabias/kernels.h"
#include "dabias/rng.h"
#include "doctest.h"

using namespace dabias;

namespace {

std::vector<double> random_vec(Rng& rng, int64_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool bitwise_equal(const std::vector<double>& a,
                   const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("serial and OpenMP matmul are bitwise identical") {
  Rng rng(7);
  for (auto [m, k, n] : {std::tuple<int64_t, int64_t, int64_t>{3, 4, 5},
                         {64, 256, 64},
                         {200, 64, 31},
                         {1, 16, 1}}) {
    std::vector<double> a = random_vec(rng, m * k);
    std::vector<double> b = random_vec(rng, k * n);
    std::vector<double> c1(m * n), c2(m * n);
    kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n);
    kernels::matmul_omp(a.data(), b.data(), c2.data(), m, k, n);
    CHECK(bitwise_equal(c1, c2));
    kernels::matmul_nt_serial(a.data(), b.data(), c1.data(), m, k, n);
    // B interpreted as [n x k]; reuse same buffer sizes by swapping roles
    std::vector<double> bt = random_vec(rng, n * k);
    kernels::matmul_nt_serial(a.data(), bt.data(), c1.data(), m, k, n);
    kernels::matmul_nt_omp(a.data(), bt.data(), c2.data(), m, k, n);
    CHECK(bitwise_equal(c1, c2));
  }
}

TEST_CASE("serial and OpenMP elementwise kernels are bitwise identical") {
  Rng rng(11);
  int64_t n = 40000;  // above the parallel threshold
  std::vector<double> a = random_vec(rng, n), b = random_vec(rng, n);
  std::vector<double> y1(n), y2(n);
  kernels::add_serial(a.data(), b.data(), y1.data(), n);
  kernels::add_omp(a.data(), b.data(), y2.data(), n);
  CHECK(bitwise_equal(y1, y2));
  kernels::mul_serial(a.data(), b.data(), y1.data(), n);
  kernels::mul_omp(a.data(), b.data(), y2.data(), n);
  CHECK(bitwise_equal(y1, y2));
  kernels::tanh_serial(a.data(), y1.data(), n);
  kernels::tanh_omp(a.data(), y2.data(), n);
  CHECK(bitwise_equal(y1, y2));
  kernels::sigmoid_serial(a.data(), y1.data(), n);
  kernels::sigmoid_omp(a.data(), y2.data(), n);
  CHECK(bitwise_equal(y1, y2));
  kernels::relu_serial(a.data(), y1.data(), n);
  kernels::relu_omp(a.data(), y2.data(), n);
  CHECK(bitwise_equal(y1, y2));
}

TEST_CASE("serial and OpenMP softmax kernels are bitwise identical") {
  Rng rng(13);
  int64_t rows = 300, cols = 40;
  std::vector<double> x = random_vec(rng, rows * cols);
  std::vector<double> y1(rows * cols), y2(rows * cols);
  kernels::row_softmax_serial(x.data(), y1.data(), rows, cols);
  kernels::row_softmax_omp(x.data(), y2.data(), rows, cols);
  CHECK(bitwise_equal(y1, y2));
  kernels::row_log_softmax_serial(x.data(), y1.data(), rows, cols);
  kernels::row_log_softmax_omp(x.data(), y2.data(), rows, cols);
  CHECK(bitwise_equal(y1, y2));
}

TEST_CASE("dispatch honors force_serial and stays bitwise stable") {
  Rng rng(17);
  int64_t m = 80, k = 64, n = 40;
  std::vector<double> a = random_vec(rng, m * k), b = random_vec(rng, k * n);
  std::vector<double> c1(m * n), c2(m * n);
  kernels::set_force_serial(true);
  kernels::matmul(a.data(), b.data(), c1.data(), m, k, n);
  kernels::set_force_serial(false);
  kernels::matmul(a.data(), b.data(), c2.data(), m, k, n);
  CHECK(bitwise_equal(c1, c2));
}

TEST_CASE("matmul accumulation variants match the plain product") {
  Rng rng(19);
  int64_t m = 5, k = 7, n = 3;
  std::vector<double> a = random_vec(rng, m * k), b = random_vec(rng, k * n);
  std::vector<double> c(m * n, 0.0), ref(m * n);
  kernels::matmul(a.data(), b.data(), ref.data(), m, k, n);
  kernels::matmul_acc(a.data(), b.data(), c.data(), m, k, n);
  CHECK(bitwise_equal(c, ref));
  // A^T path: C[m x n] += A[p x m]^T B[p x n]
  int64_t p = 6;
  std::vector<double> at = random_vec(rng, p * m), bt = random_vec(rng, p * n);
  std::vector<double> c2(m * n, 0.0), ref2(m * n, 0.0);
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t q = 0; q < p; ++q) acc += at[q * m + i] * bt[q * n + j];
      ref2[i * n + j] = acc;
    }
  kernels::matmul_tn_acc(at.data(), bt.data(), c2.data(), p, m, n);
  for (int64_t i = 0; i < m * n; ++i)
    CHECK(c2[i] == doctest::Approx(ref2[i]).epsilon(1e-12));
}

TEST_CASE("logsumexp2 handles -inf and large spreads") {
  double inf = std::numeric_limits<double>::infinity();
  CHECK(kernels::logsumexp2(-inf, 1.5) == 1.5);
  CHECK(kernels::logsumexp2(1.5, -inf) == 1.5);
  CHECK(kernels::logsumexp2(0.0, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK(kernels::logsumexp2(1000.0, 0.0) == doctest::Approx(1000.0));
  CHECK(std::isfinite(kernels::logsumexp2(-1000.0, -1000.0)));
}

TEST_CASE("fixed-order sum is deterministic across calls") {
  Rng rng(23);
  std::vector<double> x = random_vec(rng, 1000);
  double s1 = kernels::sum(x.data(), x.size());
  double s2 = kernels::sum(x.data(), x.size());
  CHECK(std::memcmp(&s1, &s2, sizeof(double)) == 0);
}

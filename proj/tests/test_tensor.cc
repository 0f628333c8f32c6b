// dabias/tests/test_tensor.cc

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

#include "dabias/tensor.h"
#include "doctest.h"
#include "test_util.h"

using namespace dabias;
using dabias::testing::grad_vs_fd_rel_err;
using dabias::testing::random_tensor;

TEST_CASE("matmul identity and zero-row cases") {
  Tensor eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
  Tensor a = Tensor::from_values({2, 2}, {1, 2, 3, 4});
  Tensor out = matmul(eye, a);
  CHECK(out.values() == std::vector<double>{1, 2, 3, 4});

  Tensor proj = Tensor::from_values({2, 2}, {1, 0, 0, 0});
  Tensor v = Tensor::from_values({2, 1}, {5, 7});
  Tensor out2 = matmul(proj, v);
  CHECK(out2.values() == std::vector<double>{5, 0});
}

TEST_CASE("matmul rejects mismatched inner dimensions naming both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 2});
  try {
    matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("matmul gradient of sum(output) matches finite differences") {
  Rng rng(101);
  Tensor a = random_tensor({3, 4}, rng, -1, 1, true);
  Tensor b = random_tensor({4, 2}, rng, -1, 1, true);
  auto forward = [&]() { return sum(matmul(a, b)); };
  for (int64_t i = 0; i < a.numel(); ++i)
    CHECK(grad_vs_fd_rel_err(forward, a, i) < 1e-6);
  for (int64_t i = 0; i < b.numel(); ++i)
    CHECK(grad_vs_fd_rel_err(forward, b, i) < 1e-6);
}

TEST_CASE("softmax examples") {
  Tensor x = Tensor::from_values({2}, {0, 0});
  Tensor y = softmax(x);
  CHECK(y.values()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y.values()[1] == doctest::Approx(0.5).epsilon(1e-15));

  // stability: no overflow with a huge logit
  Tensor big = Tensor::from_values({2}, {1000, 0});
  Tensor yb = softmax(big);
  CHECK(std::isfinite(yb.values()[0]));
  CHECK(yb.values()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(yb.values()[1] == doctest::Approx(0.0).epsilon(1e-12));

  // exp-normalize oracle in extended precision
  Tensor z = Tensor::from_values({3}, {1, 2, 3});
  Tensor yz = softmax(z);
  long double s = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
  for (int i = 0; i < 3; ++i) {
    long double expect = std::exp(static_cast<long double>(i + 1)) / s;
    CHECK(std::abs(yz.values()[i] - static_cast<double>(expect)) < 1e-12);
  }

  CHECK_THROWS_AS(softmax(Tensor::zeros({0})), DimensionError);
}

TEST_CASE("softmax outputs sum to one and shift invariance") {
  Rng rng(103);
  for (int it = 0; it < 50; ++it) {
    int64_t n = 1 + rng.uniform_int(8);
    Tensor x = random_tensor({n}, rng, -5, 5);
    Tensor y = softmax(x);
    double s = 0;
    for (double v : y.values()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0 + 1e-15);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    // adding a constant to all logits does not change the result
    Tensor shifted = Tensor::zeros({n});
    for (int64_t i = 0; i < n; ++i)
      shifted.values()[i] = x.values()[i] + 3.25;
    Tensor y2 = softmax(shifted);
    for (int64_t i = 0; i < n; ++i)
      CHECK(std::abs(y.values()[i] - y2.values()[i]) <= 1e-12);
  }
}

TEST_CASE("elementwise examples") {
  Tensor r = relu(Tensor::from_values({3}, {-1, 0, 2}));
  CHECK(r.values() == std::vector<double>{0, 0, 2});
  CHECK(tanh_t(Tensor::scalar(0)).scalar_value() == 0.0);

  // sigmoid'(0) = 0.25
  Tensor x = Tensor::scalar(0.0, true);
  auto forward = [&]() { return sum(sigmoid(x)); };
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss = forward();
    tape.backward(loss);
  }
  CHECK(x.grad_view()[0] == doctest::Approx(0.25).epsilon(1e-12));
  x.zero_grad();
  CHECK(grad_vs_fd_rel_err(forward, x, 0) < 1e-8);
}

TEST_CASE("elementwise shape mismatch raises a dimension error") {
  CHECK_THROWS_AS(add(Tensor::zeros({2}), Tensor::zeros({3})),
                  DimensionError);
  CHECK_THROWS_AS(mul(Tensor::zeros({2, 2}), Tensor::zeros({4})),
                  DimensionError);
}

TEST_CASE("concat examples") {
  Tensor c = concat(Tensor::from_values({2}, {1, 2}),
                    Tensor::from_values({1}, {3}), 0);
  CHECK(c.values() == std::vector<double>{1, 2, 3});

  // 192-dim frame + 64-dim embedding -> 256
  Tensor frame = Tensor::zeros({192});
  Tensor da = Tensor::zeros({64});
  CHECK(concat(frame, da, 0).numel() == 256);

  Tensor a = Tensor::zeros({2}, true);
  Tensor b = Tensor::zeros({3}, true);
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss = sum(concat(a, b, 0));
    tape.backward(loss);
  }
  CHECK(a.grad_view() == std::vector<double>{1, 1});
  CHECK(b.grad_view() == std::vector<double>{1, 1, 1});

  CHECK_THROWS_AS(concat(Tensor::zeros({2, 2}), Tensor::zeros({2, 3}), 0),
                  DimensionError);
}

TEST_CASE("embedding lookup examples") {
  Tensor eye = Tensor::from_values({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  CHECK(embedding_lookup(eye, 1).values() == std::vector<double>{0, 1, 0});

  try {
    embedding_lookup(eye, 5);
    FAIL("expected IndexError");
  } catch (const IndexError& e) {
    std::string msg = e.what();
    CHECK(msg.find("5") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }

  // gradient accumulates across repeated lookups of the same id
  Rng table_rng(5);
  Tensor table = random_tensor({4, 2}, table_rng, -1, 1, true);
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss =
        sum(add(embedding_lookup(table, 2), embedding_lookup(table, 2)));
    tape.backward(loss);
  }
  CHECK(table.grad_view()[2 * 2 + 0] == 2.0);
  CHECK(table.grad_view()[2 * 2 + 1] == 2.0);
  CHECK(table.grad_view()[0] == 0.0);

  // FD on the selected row
  Rng rng(117);
  Tensor t2 = random_tensor({4, 3}, rng, -1, 1, true);
  auto forward = [&]() { return sum(tanh_t(embedding_lookup(t2, 1))); };
  for (int64_t i = 3; i < 6; ++i)
    CHECK(grad_vs_fd_rel_err(forward, t2, i) < 1e-6);
}

TEST_CASE("backward populates gradients and validates the scalar contract") {
  Rng rng(131);
  Tensor x = random_tensor({2, 3}, rng, -1, 1, true);
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss = sum(x);
    tape.backward(loss);
  }
  CHECK(x.grad_view() == std::vector<double>(6, 1.0));

  // scalar product: d(x.y)/dx = y, /dy = x
  Tensor a = Tensor::from_values({3}, {1, 2, 3}, true);
  Tensor b = Tensor::from_values({3}, {4, 5, 6}, true);
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss = sum(mul(a, b));
    tape.backward(loss);
  }
  CHECK(a.grad_view() == std::vector<double>{4, 5, 6});
  CHECK(b.grad_view() == std::vector<double>{1, 2, 3});

  // non-scalar loss is a contract error
  Tape tape;
  TapeScope scope(&tape);
  Tensor y = add(a, b);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("backward leaves unreachable tensors untouched") {
  Tensor x = Tensor::from_values({2}, {1, 2}, true);
  Tensor y = Tensor::from_values({2}, {3, 4}, true);
  Tape tape;
  TapeScope scope(&tape);
  Tensor keep = sum(mul(x, x));
  Tensor orphan = sum(mul(y, y));  // recorded but not backward'd
  (void)orphan;
  tape.backward(keep);
  CHECK(x.has_grad());
  CHECK_FALSE(y.has_grad());
}

TEST_CASE("backward is additive over losses") {
  Rng rng(137);
  Tensor x = random_tensor({4}, rng, -1, 1, true);
  // separate runs
  std::vector<double> g_sum;
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor l1 = sum(mul(x, x));
    tape.backward(l1);
  }
  std::vector<double> g1 = x.grad_view();
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor l2 = sum(tanh_t(x));
    tape.backward(l2);
  }
  std::vector<double> g2 = x.grad_view();
  x.zero_grad();
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor l = add(sum(mul(x, x)), sum(tanh_t(x)));
    tape.backward(l);
  }
  for (int64_t i = 0; i < 4; ++i)
    CHECK(x.grad_view()[i] == doctest::Approx(g1[i] + g2[i]).epsilon(1e-15));
}

TEST_CASE("ops are deterministic bitwise") {
  Rng rng(139);
  Tensor a = random_tensor({16, 16}, rng);
  Tensor b = random_tensor({16, 16}, rng);
  Tensor c1 = matmul(a, b);
  Tensor c2 = matmul(a, b);
  CHECK(std::memcmp(c1.data(), c2.data(), c1.numel() * sizeof(double)) == 0);
  Tensor s1 = row_softmax(c1);
  Tensor s2 = row_softmax(c2);
  CHECK(std::memcmp(s1.data(), s2.data(), s1.numel() * sizeof(double)) == 0);
}

TEST_CASE("finite differences agree for every differentiable op") {
  Rng rng(149);
  Tensor a = random_tensor({3, 4}, rng, -1, 1, true);
  Tensor b = random_tensor({3, 4}, rng, -1, 1, true);
  Tensor v = random_tensor({4}, rng, -1, 1, true);
  Tensor q = random_tensor({2, 4}, rng, -1, 1, true);

  std::vector<std::pair<const char*, std::function<Tensor()>>> cases = {
      {"add", [&]() { return sum(add(a, b)); }},
      {"mul", [&]() { return sum(mul(a, b)); }},
      {"relu", [&]() { return sum(relu(a)); }},
      {"tanh", [&]() { return sum(tanh_t(a)); }},
      {"sigmoid", [&]() { return sum(sigmoid(a)); }},
      {"scale", [&]() { return sum(scale(a, -1.7)); }},
      {"matmul_nt", [&]() { return sum(tanh_t(matmul_nt(a, q))); }},
      {"transpose", [&]() { return sum(tanh_t(matmul(transpose(a), a))); }},
      {"concat0", [&]() { return sum(tanh_t(concat(a, b, 0))); }},
      {"concat1", [&]() { return sum(tanh_t(concat(a, b, 1))); }},
      {"repeat_row", [&]() { return sum(tanh_t(repeat_row(v, 5))); }},
      {"add_rowvec", [&]() { return sum(tanh_t(add_rowvec(a, v))); }},
      {"grid_add", [&]() { return sum(tanh_t(grid_add(a, q))); }},
      {"row_of", [&]() { return sum(tanh_t(row_of(a, 1))); }},
      {"gather_rows",
       [&]() { return sum(tanh_t(gather_rows(a, {2, 0, 2}))); }},
      {"row_softmax", [&]() { return sum(mul(row_softmax(a), b)); }},
      {"row_log_softmax",
       [&]() { return sum(mul(row_log_softmax(a), b)); }},
      {"softmax_vec", [&]() { return sum(mul(softmax(v), v)); }},
      {"reshape",
       [&]() { return sum(tanh_t(reshape(a, {4, 3}))); }},
  };
  for (auto& [name, forward] : cases) {
    CAPTURE(name);
    for (int probe = 0; probe < 6; ++probe) {
      Tensor target = probe % 2 == 0 ? a : (probe % 3 == 0 ? b : v);
      int64_t idx = rng.uniform_int(target.numel());
      double err = grad_vs_fd_rel_err(forward, target, idx);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("masked softmax zeroes masked entries and renormalizes") {
  Tensor x = Tensor::from_values({4}, {1, 2, 3, 4});
  std::vector<char> mask = {1, 0, 1, 0};
  Tensor y = masked_softmax(x, mask);
  CHECK(y.values()[1] == 0.0);
  CHECK(y.values()[3] == 0.0);
  CHECK(y.values()[0] + y.values()[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(masked_softmax(x, std::vector<char>{0, 0, 0, 0}),
                  ContractError);
}

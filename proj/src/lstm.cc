// dabias/lstm.cc

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

#include "dabias/lstm.h"

#include <cmath>

namespace dabias {

namespace {
constexpr const char* kGateNames[4] = {"input", "forget", "cell", "output"};
constexpr int kForgetGate = 1;
}  // namespace

LstmLayer::LstmLayer(ParamStore& store, const std::string& prefix,
                     int64_t input_size, int64_t hidden_size, Rng& rng)
    : input_size_(input_size), hidden_size_(hidden_size) {
  double k = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (int g = 0; g < 4; ++g) {
    std::string base = prefix + "." + kGateNames[g];
    w_x_[g] = store.add_uniform(base + ".w_x", {hidden_size, input_size}, k,
                                rng);
    w_h_[g] = store.add_uniform(base + ".w_h", {hidden_size, hidden_size}, k,
                                rng);
    b_[g] = store.add(base + ".b", {hidden_size});
    if (g == kForgetGate)
      for (double& v : b_[g].values()) v = 1.0;
  }
}

LstmLayer::State LstmLayer::initial_state() const {
  return {Tensor::zeros({hidden_size_}), Tensor::zeros({hidden_size_})};
}

LstmLayer::BatchState LstmLayer::initial_state(int64_t batch) const {
  return {Tensor::zeros({batch, hidden_size_}),
          Tensor::zeros({batch, hidden_size_})};
}

LstmLayer::State LstmLayer::step(const Tensor& x, const State& prev) const {
  auto gate = [&](int g) {
    return add(add(matmul(w_x_[g], x), matmul(w_h_[g], prev.h)), b_[g]);
  };
  Tensor i = sigmoid(gate(0));
  Tensor f = sigmoid(gate(1));
  Tensor g = tanh_t(gate(2));
  Tensor o = sigmoid(gate(3));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor h = mul(o, tanh_t(c));
  return {h, c};
}

LstmLayer::BatchState LstmLayer::step(const Tensor& x,
                                      const BatchState& prev) const {
  auto gate = [&](int g) {
    return add_rowvec(add(matmul_nt(x, w_x_[g]), matmul_nt(prev.h, w_h_[g])),
                      b_[g]);
  };
  Tensor i = sigmoid(gate(0));
  Tensor f = sigmoid(gate(1));
  Tensor g = tanh_t(gate(2));
  Tensor o = sigmoid(gate(3));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor h = mul(o, tanh_t(c));
  return {h, c};
}

Tensor LstmLayer::unroll(const Tensor& x) const {
  if (x.ndim() != 2 || x.dim(1) != input_size_)
    throw DimensionError("lstm unroll: expected [T x " +
                         std::to_string(input_size_) + "], got " +
                         shape_str(x.shape()));
  int64_t t_len = x.dim(0);
  State s = initial_state();
  std::vector<Tensor> outs;
  outs.reserve(t_len);
  for (int64_t t = 0; t < t_len; ++t) {
    s = step(row_of(x, t), s);
    outs.push_back(s.h);
  }
  return stack_rows(outs);
}

}  // namespace dabias

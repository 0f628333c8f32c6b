// dabias/lstm.h

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

#ifndef DABIAS_LSTM_H_
#define DABIAS_LSTM_H_

#include <string>
#include <vector>

#include "dabias/params.h"
#include "dabias/tensor.h"

namespace dabias {

// Unidirectional LSTM layer with per-gate weight matrices.
// Gate order: input, forget, cell, output. Weights ~ Uniform(-k, k) with
// k = 1/sqrt(hidden); forget-gate bias starts at 1.0, other biases at 0.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(ParamStore& store, const std::string& prefix, int64_t input_size,
            int64_t hidden_size, Rng& rng);

  int64_t input_size() const { return input_size_; }
  int64_t hidden_size() const { return hidden_size_; }

  struct State {
    Tensor h;  // [H]
    Tensor c;  // [H]
  };
  struct BatchState {
    Tensor h;  // [B x H]
    Tensor c;  // [B x H]
  };

  State initial_state() const;
  BatchState initial_state(int64_t batch) const;

  // One step on a single input vector [input_size].
  State step(const Tensor& x, const State& prev) const;
  // One step on a batch [B x input_size]; row b evolves exactly as the
  // vector path would (bitwise).
  BatchState step(const Tensor& x, const BatchState& prev) const;

  // Unrolls over the rows of x [T x input_size]; returns the T hidden
  // states stacked as [T x hidden_size].
  Tensor unroll(const Tensor& x) const;

 private:
  int64_t input_size_ = 0;
  int64_t hidden_size_ = 0;
  // Indexed by gate: 0 input, 1 forget, 2 cell, 3 output.
  Tensor w_x_[4];  // [H x input]
  Tensor w_h_[4];  // [H x H]
  Tensor b_[4];    // [H]
};

}  // namespace dabias

#endif  // DABIAS_LSTM_H_

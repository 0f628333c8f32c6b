// dabias/rnnt.h

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

#ifndef DABIAS_RNNT_H_
#define DABIAS_RNNT_H_

#include <string>
#include <vector>

#include "dabias/lstm.h"
#include "dabias/params.h"
#include "dabias/tensor.h"

namespace dabias {

// Stacked unidirectional LSTMs with a linear projection to audio_dim.
class EncoderNetwork {
 public:
  EncoderNetwork() = default;
  EncoderNetwork(ParamStore& store, int64_t input_dim, int64_t hidden,
                 int64_t layers, int64_t audio_dim, Rng& rng);

  // features [T x input_dim] -> [T x audio_dim]. The provenance tag is set
  // by the caller (raw vs early-fused input).
  Tensor forward(const Tensor& features) const;

  int64_t input_dim() const { return input_dim_; }
  int64_t audio_dim() const { return audio_dim_; }

 private:
  int64_t input_dim_ = 0;
  int64_t audio_dim_ = 0;
  std::vector<LstmLayer> layers_;
  Tensor proj_w_;  // [audio_dim x hidden]
  Tensor proj_b_;  // [audio_dim]
};

// Token-embedding LSTM over the emitted prefix. Row 0 of the output is the
// start-of-sequence state (the SOS embedding is an extra table row, not a
// vocabulary token).
class PredictionNetwork {
 public:
  PredictionNetwork() = default;
  PredictionNetwork(ParamStore& store, int64_t vocab, int64_t embed_dim,
                    int64_t hidden, int64_t layers, int64_t audio_dim,
                    Rng& rng);

  // targets (length U, ids < vocab) -> [(U+1) x audio_dim]
  Tensor forward(const std::vector<int>& targets) const;

  // Incremental interface for decoding.
  struct State {
    std::vector<LstmLayer::State> layers;
    Tensor out;  // [audio_dim]
  };
  State start() const;
  State advance(const State& s, int token) const;

  int64_t vocab() const { return vocab_; }

 private:
  State feed(const State& s, int64_t table_row) const;
  int64_t vocab_ = 0;
  int64_t audio_dim_ = 0;
  Tensor embed_;  // [(vocab+1) x e]; last row is SOS
  std::vector<LstmLayer> layers_;
  Tensor proj_w_;
  Tensor proj_b_;
};

// join(h_enc, h_pre) = W_out tanh(W_e h_enc + W_p h_pre + b_h) + b_out.
// The join is addition of separately projected inputs; outputs are
// vocab+1 logits (tokens plus blank, blank id == vocab).
class JointNetwork {
 public:
  JointNetwork() = default;
  JointNetwork(ParamStore& store, int64_t audio_dim, int64_t hidden,
               int64_t vocab, Rng& rng);

  // [T x D_a], [(U+1) x D_a] -> [(T*(U+1)) x (vocab+1)]
  Tensor grid_logits(const Tensor& h_enc, const Tensor& h_pre) const;
  // single pair -> [vocab+1]
  Tensor logits(const Tensor& h_enc_t, const Tensor& h_pre_u) const;

  int64_t vocab() const { return vocab_; }
  int64_t blank_id() const { return vocab_; }

 private:
  int64_t vocab_ = 0;
  Tensor w_enc_;  // [hidden x D_a]
  Tensor w_pre_;  // [hidden x D_a]
  Tensor b_h_;    // [hidden]
  Tensor w_out_;  // [(vocab+1) x hidden]
  Tensor b_out_;  // [vocab+1]
};

// Log-softmax-normalized joint outputs for every (t, u):
// a [T x (U+1) x (V+1)] tensor where each (t, u) slice sums to one in
// probability space.
Tensor build_lattice(const Tensor& h_enc, const Tensor& h_pre,
                     const JointNetwork& joint);

// -log P(targets | lattice) by the forward recursion
//   alpha(t, u) = logsumexp(alpha(t-1, u) + blank(t-1, u),
//                           alpha(t, u-1) + emit(t, u-1))
// with alpha at the first frame and empty prefix = 0 and
// loss = -(alpha(T, U) + blank(T, U)). Backward is the exact
// alpha-beta gradient with respect to the lattice entries.
Tensor rnnt_loss(const Tensor& lattice, const std::vector<int>& targets,
                 int blank_id);

// Greedy decode loop over a frame-synchronous stepper. The stepper exposes
// the joint logits at the current (frame, prefix) and advances its
// prediction state when a token is emitted.
//   struct Stepper {
//     const std::vector<double>& logits(int64_t t);
//     void advance(int token);
//   };
// Emits argmax tokens until blank wins or the per-frame cap is hit, then
// moves to the next frame; |hypothesis| <= T * max_symbols_per_frame.
template <typename Stepper>
std::vector<int> greedy_decode_loop(int64_t frames, int max_symbols_per_frame,
                                    int blank_id, Stepper& stepper) {
  std::vector<int> hyp;
  for (int64_t t = 0; t < frames; ++t) {
    for (int s = 0; s < max_symbols_per_frame; ++s) {
      const std::vector<double>& lg = stepper.logits(t);
      int best = 0;
      for (int v = 1; v < static_cast<int>(lg.size()); ++v)
        if (lg[v] > lg[best]) best = v;
      if (best == blank_id) break;
      hyp.push_back(best);
      stepper.advance(best);
    }
  }
  return hyp;
}

}  // namespace dabias

#endif  // DABIAS_RNNT_H_

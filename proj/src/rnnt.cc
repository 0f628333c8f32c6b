// dabias/rnnt.cc

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

#include "dabias/rnnt.h"

#include <cmath>
#include <limits>

#include "dabias/kernels.h"

namespace dabias {

EncoderNetwork::EncoderNetwork(ParamStore& store, int64_t input_dim,
                               int64_t hidden, int64_t layers,
                               int64_t audio_dim, Rng& rng)
    : input_dim_(input_dim), audio_dim_(audio_dim) {
  for (int64_t l = 0; l < layers; ++l) {
    int64_t in = l == 0 ? input_dim : hidden;
    layers_.emplace_back(store, "enc.lstm" + std::to_string(l), in, hidden,
                         rng);
  }
  double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  proj_w_ = store.add_uniform("enc.proj.w", {audio_dim, hidden}, k, rng);
  proj_b_ = store.add("enc.proj.b", {audio_dim});
}

Tensor EncoderNetwork::forward(const Tensor& features) const {
  if (features.ndim() != 2 || features.dim(1) != input_dim_)
    throw DimensionError("encoder: expected [T x " +
                         std::to_string(input_dim_) + "], got " +
                         shape_str(features.shape()));
  Tensor h = features;
  for (const LstmLayer& layer : layers_) h = layer.unroll(h);
  return add_rowvec(matmul_nt(h, proj_w_), proj_b_);
}

PredictionNetwork::PredictionNetwork(ParamStore& store, int64_t vocab,
                                     int64_t embed_dim, int64_t hidden,
                                     int64_t layers, int64_t audio_dim,
                                     Rng& rng)
    : vocab_(vocab), audio_dim_(audio_dim) {
  double ke = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  embed_ = store.add_uniform("pred.embed", {vocab + 1, embed_dim}, ke, rng);
  for (int64_t l = 0; l < layers; ++l) {
    int64_t in = l == 0 ? embed_dim : hidden;
    layers_.emplace_back(store, "pred.lstm" + std::to_string(l), in, hidden,
                         rng);
  }
  double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  proj_w_ = store.add_uniform("pred.proj.w", {audio_dim, hidden}, k, rng);
  proj_b_ = store.add("pred.proj.b", {audio_dim});
}

PredictionNetwork::State PredictionNetwork::feed(const State& s,
                                                 int64_t table_row) const {
  State next;
  next.layers.reserve(layers_.size());
  Tensor x = embedding_lookup(embed_, table_row);
  for (size_t l = 0; l < layers_.size(); ++l) {
    LstmLayer::State ls = layers_[l].step(x, s.layers[l]);
    x = ls.h;
    next.layers.push_back(ls);
  }
  next.out = add(matmul(proj_w_, x), proj_b_);
  return next;
}

PredictionNetwork::State PredictionNetwork::start() const {
  State s;
  s.layers.reserve(layers_.size());
  for (const LstmLayer& l : layers_) s.layers.push_back(l.initial_state());
  return feed(s, vocab_);  // SOS row
}

PredictionNetwork::State PredictionNetwork::advance(const State& s,
                                                    int token) const {
  if (token < 0 || token >= vocab_)
    throw IndexError("prediction network: token " + std::to_string(token) +
                     " out of range [0, " + std::to_string(vocab_) + ")");
  return feed(s, token);
}

Tensor PredictionNetwork::forward(const std::vector<int>& targets) const {
  State s = start();
  std::vector<Tensor> rows;
  rows.reserve(targets.size() + 1);
  rows.push_back(s.out);
  for (int tok : targets) {
    s = advance(s, tok);
    rows.push_back(s.out);
  }
  return stack_rows(rows);
}

JointNetwork::JointNetwork(ParamStore& store, int64_t audio_dim,
                           int64_t hidden, int64_t vocab, Rng& rng)
    : vocab_(vocab) {
  double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  w_enc_ = store.add_uniform("joint.w_enc", {hidden, audio_dim}, k, rng);
  w_pre_ = store.add_uniform("joint.w_pre", {hidden, audio_dim}, k, rng);
  b_h_ = store.add("joint.b_h", {hidden});
  w_out_ = store.add_uniform("joint.w_out", {vocab + 1, hidden}, k, rng);
  b_out_ = store.add("joint.b_out", {vocab + 1});
}

Tensor JointNetwork::grid_logits(const Tensor& h_enc,
                                 const Tensor& h_pre) const {
  if (h_enc.ndim() != 2 || h_pre.ndim() != 2 ||
      h_enc.dim(1) != w_enc_.dim(1) || h_pre.dim(1) != w_pre_.dim(1))
    throw DimensionError("joint: dimension mismatch, got " +
                         shape_str(h_enc.shape()) + " and " +
                         shape_str(h_pre.shape()) + " for projections " +
                         shape_str(w_enc_.shape()) + " / " +
                         shape_str(w_pre_.shape()));
  Tensor pe = matmul_nt(h_enc, w_enc_);  // [T x H]
  Tensor pp = matmul_nt(h_pre, w_pre_);  // [(U+1) x H]
  Tensor hidden = tanh_t(add_rowvec(grid_add(pe, pp), b_h_));
  return add_rowvec(matmul_nt(hidden, w_out_), b_out_);
}

Tensor JointNetwork::logits(const Tensor& h_enc_t,
                            const Tensor& h_pre_u) const {
  Tensor hidden = tanh_t(
      add(add(matmul(w_enc_, h_enc_t), matmul(w_pre_, h_pre_u)), b_h_));
  return add(matmul(w_out_, hidden), b_out_);
}

Tensor build_lattice(const Tensor& h_enc, const Tensor& h_pre,
                     const JointNetwork& joint) {
  int64_t t_len = h_enc.dim(0);
  int64_t u_len = h_pre.dim(0);
  Tensor logits = joint.grid_logits(h_enc, h_pre);
  return reshape(row_log_softmax(logits),
                 {t_len, u_len, joint.vocab() + 1});
}

namespace {

// alpha[t][u], 0-based t in [0, T), u in [0, U].
struct LatticeView {
  const double* data;
  int64_t u_len;  // U + 1
  int64_t v_len;  // V + 1
  double at(int64_t t, int64_t u, int64_t v) const {
    return data[(t * u_len + u) * v_len + v];
  }
};

}  // namespace

Tensor rnnt_loss(const Tensor& lattice, const std::vector<int>& targets,
                 int blank_id) {
  if (lattice.ndim() != 3)
    throw DimensionError("rnnt_loss: lattice must be [T x (U+1) x (V+1)], "
                         "got " + shape_str(lattice.shape()));
  const int64_t t_len = lattice.dim(0);
  const int64_t u_cap = lattice.dim(1);   // U + 1
  const int64_t v_len = lattice.dim(2);   // V + 1
  const int64_t u_len = static_cast<int64_t>(targets.size());
  if (t_len < 1)
    throw DimensionError("rnnt_loss: need at least one frame");
  if (u_len + 1 > u_cap)
    throw DimensionError("rnnt_loss: target length " + std::to_string(u_len) +
                         " does not fit lattice U-dimension " +
                         std::to_string(u_cap));
  if (blank_id < 0 || blank_id >= v_len)
    throw IndexError("rnnt_loss: blank id " + std::to_string(blank_id) +
                     " out of range [0, " + std::to_string(v_len) + ")");
  for (int tok : targets)
    if (tok < 0 || tok >= v_len)
      throw IndexError("rnnt_loss: target id " + std::to_string(tok) +
                       " out of range [0, " + std::to_string(v_len) + ")");

  const double kNegInf = -std::numeric_limits<double>::infinity();
  LatticeView lat{lattice.data(), u_cap, v_len};
  auto blank_at = [&](int64_t t, int64_t u) { return lat.at(t, u, blank_id); };
  auto emit_at = [&](int64_t t, int64_t u) {
    return lat.at(t, u, targets[u]);
  };

  // Forward recursion over the (T x (U+1)) grid actually used.
  std::vector<double> alpha(static_cast<size_t>(t_len * (u_len + 1)), kNegInf);
  auto a = [&](int64_t t, int64_t u) -> double& {
    return alpha[t * (u_len + 1) + u];
  };
  a(0, 0) = 0.0;
  for (int64_t u = 1; u <= u_len; ++u)
    a(0, u) = a(0, u - 1) + emit_at(0, u - 1);
  for (int64_t t = 1; t < t_len; ++t) {
    a(t, 0) = a(t - 1, 0) + blank_at(t - 1, 0);
    for (int64_t u = 1; u <= u_len; ++u)
      a(t, u) = kernels::logsumexp2(a(t - 1, u) + blank_at(t - 1, u),
                                    a(t, u - 1) + emit_at(t, u - 1));
  }
  double log_z = a(t_len - 1, u_len) + blank_at(t_len - 1, u_len);
  Tensor loss = Tensor::scalar(-log_z);

  Tape* tape = active_tape();
  if (tape && lattice.requires_grad()) {
    loss.set_requires_grad(true);
    Tensor lat_t = lattice;
    Tensor loss_t = loss;
    std::vector<int> tgt = targets;
    std::vector<double> alpha_copy = std::move(alpha);
    tape->record(loss, {lattice}, [lat_t, loss_t, tgt, alpha_copy, t_len,
                                   u_len, u_cap, v_len, blank_id,
                                   log_z]() mutable {
      const double upstream = loss_t.grad()[0];
      LatticeView lv{lat_t.data(), u_cap, v_len};
      auto blank_at = [&](int64_t t, int64_t u) {
        return lv.at(t, u, blank_id);
      };
      auto emit_at = [&](int64_t t, int64_t u) { return lv.at(t, u, tgt[u]); };
      auto a = [&](int64_t t, int64_t u) {
        return alpha_copy[t * (u_len + 1) + u];
      };
      const double kNegInf2 = -std::numeric_limits<double>::infinity();
      // Backward (completion) recursion; beta(t, u) includes the transition
      // leaving (t, u).
      std::vector<double> beta(static_cast<size_t>(t_len * (u_len + 1)),
                               kNegInf2);
      auto b = [&](int64_t t, int64_t u) -> double& {
        return beta[t * (u_len + 1) + u];
      };
      b(t_len - 1, u_len) = blank_at(t_len - 1, u_len);
      for (int64_t u = u_len - 1; u >= 0; --u)
        b(t_len - 1, u) = emit_at(t_len - 1, u) + b(t_len - 1, u + 1);
      for (int64_t t = t_len - 2; t >= 0; --t) {
        b(t, u_len) = blank_at(t, u_len) + b(t + 1, u_len);
        for (int64_t u = u_len - 1; u >= 0; --u)
          b(t, u) = kernels::logsumexp2(blank_at(t, u) + b(t + 1, u),
                                        emit_at(t, u) + b(t, u + 1));
      }
      double* grad = lat_t.grad().data();
      auto add_grad = [&](int64_t t, int64_t u, int64_t v, double occupancy) {
        grad[(t * u_cap + u) * v_len + v] -= upstream * occupancy;
      };
      // d(log Z)/d(lattice entry) is the posterior occupancy of the
      // corresponding transition.
      for (int64_t t = 0; t < t_len; ++t) {
        for (int64_t u = 0; u <= u_len; ++u) {
          if (t + 1 < t_len)
            add_grad(t, u, blank_id,
                     std::exp(a(t, u) + blank_at(t, u) + b(t + 1, u) - log_z));
          else if (u == u_len)
            add_grad(t, u, blank_id,
                     std::exp(a(t, u) + blank_at(t, u) - log_z));
          if (u < u_len)
            add_grad(t, u, tgt[u],
                     std::exp(a(t, u) + emit_at(t, u) + b(t, u + 1) - log_z));
        }
      }
    });
  }
  return loss;
}

}  // namespace dabias

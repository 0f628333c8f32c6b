// dabias/dialog_act.cc

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

#include "dabias/dialog_act.h"

#include <algorithm>
#include <cmath>

namespace dabias {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

DialogAct parse_da(std::string_view text) {
  auto fail = [&](const char* why) {
    throw ParseError(std::string("bad dialog act \"") + std::string(text) +
                     "\": " + why);
  };
  size_t open = text.find('(');
  if (open == std::string_view::npos) fail("missing '('");
  if (text.find('(', open + 1) != std::string_view::npos)
    fail("multiple '('");
  size_t close = text.find(')', open + 1);
  if (close == std::string_view::npos) fail("missing ')'");
  if (text.find(')', close + 1) != std::string_view::npos)
    fail("multiple ')'");
  if (trim(text.substr(close + 1)) != "") fail("trailing text after ')'");
  DialogAct da;
  da.action = trim(text.substr(0, open));
  da.slot = trim(text.substr(open + 1, close - open - 1));
  if (da.action.empty()) fail("empty action");
  if (da.slot.empty()) fail("empty slot");
  return da;
}

DaVocabulary::DaVocabulary(std::vector<std::string> actions,
                           std::vector<std::string> slots,
                           int64_t max_inventory)
    : actions_(std::move(actions)), slots_(std::move(slots)) {
  int64_t combos = static_cast<int64_t>(actions_.size()) *
                   static_cast<int64_t>(slots_.size());
  if (combos > max_inventory)
    throw ConfigError("dialog act inventory " + std::to_string(combos) +
                      " exceeds the configured bound " +
                      std::to_string(max_inventory));
  for (size_t i = 0; i < actions_.size(); ++i)
    action_ids_[actions_[i]] = static_cast<int64_t>(i) + 1;
  for (size_t i = 0; i < slots_.size(); ++i)
    slot_ids_[slots_[i]] = static_cast<int64_t>(i) + 1;
}

int64_t DaVocabulary::action_id(const std::string& a) const {
  auto it = action_ids_.find(a);
  return it == action_ids_.end() ? kUnkId : it->second;
}

int64_t DaVocabulary::slot_id(const std::string& s) const {
  auto it = slot_ids_.find(s);
  return it == slot_ids_.end() ? kUnkId : it->second;
}

DaEncoder::DaEncoder(ParamStore& store, const DaVocabulary& vocab,
                     int64_t embed_dim, int64_t da_dim, Rng& rng)
    : embed_dim_(embed_dim), da_dim_(da_dim) {
  double ke = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  action_table_ = store.add_uniform("da.action_table",
                                    {vocab.action_count(), embed_dim}, ke, rng);
  slot_table_ = store.add_uniform("da.slot_table",
                                  {vocab.slot_count(), embed_dim}, ke, rng);
  w_ = store.add_uniform("da.ffn.w", {da_dim, embed_dim}, ke, rng);
  b_ = store.add("da.ffn.b", {da_dim});
}

Tensor DaEncoder::encode(const DialogAct& da, const DaVocabulary& vocab) const {
  Tensor ha = embedding_lookup(action_table_, vocab.action_id(da.action));
  Tensor hs = embedding_lookup(slot_table_, vocab.slot_id(da.slot));
  return relu(add(matmul(w_, add(ha, hs)), b_));
}

Tensor early_fuse(const Tensor& x_t, const Tensor& h_dae) {
  if (x_t.ndim() != 1 || h_dae.ndim() != 1)
    throw DimensionError("early_fuse: need two vectors, got " +
                         shape_str(x_t.shape()) + " and " +
                         shape_str(h_dae.shape()));
  return concat(x_t, h_dae, 0);
}

Tensor early_fuse_sequence(const Tensor& frames, const Tensor& h_dae) {
  if (frames.ndim() != 2 || h_dae.ndim() != 1)
    throw DimensionError("early_fuse_sequence: need [T x F] and [d_da], got " +
                         shape_str(frames.shape()) + " and " +
                         shape_str(h_dae.shape()));
  return concat(frames, repeat_row(h_dae, frames.dim(0)), 1);
}

LateFusionNetwork::LateFusionNetwork(ParamStore& store, int64_t audio_dim,
                                     int64_t da_dim, Rng& rng)
    : audio_dim_(audio_dim), da_dim_(da_dim) {
  double k = 1.0 / std::sqrt(static_cast<double>(audio_dim + da_dim));
  w_ = store.add_uniform("fuse.late.w", {audio_dim, audio_dim + da_dim}, k,
                         rng);
  b_ = store.add("fuse.late.b", {audio_dim});
}

Tensor LateFusionNetwork::apply(const Tensor& h_enc_t,
                                const Tensor& h_dae) const {
  if (h_enc_t.numel() != audio_dim_ || h_dae.numel() != da_dim_)
    throw DimensionError("late_fuse: expected [" + std::to_string(audio_dim_) +
                         "] and [" + std::to_string(da_dim_) + "], got " +
                         shape_str(h_enc_t.shape()) + " and " +
                         shape_str(h_dae.shape()));
  Tensor out = relu(add(matmul(w_, concat(h_enc_t, h_dae, 0)), b_));
  out.set_provenance(Provenance::kLateFused);
  return out;
}

Tensor LateFusionNetwork::apply_sequence(const Tensor& h_enc,
                                         const Tensor& h_dae) const {
  if (h_enc.ndim() != 2 || h_enc.dim(1) != audio_dim_ ||
      h_dae.numel() != da_dim_)
    throw DimensionError("late_fuse: expected [T x " +
                         std::to_string(audio_dim_) + "] and [" +
                         std::to_string(da_dim_) + "], got " +
                         shape_str(h_enc.shape()) + " and " +
                         shape_str(h_dae.shape()));
  Tensor joined = concat(h_enc, repeat_row(h_dae, h_enc.dim(0)), 1);
  Tensor out = relu(add_rowvec(matmul_nt(joined, w_), b_));
  out.set_provenance(Provenance::kLateFused);
  return out;
}

}  // namespace dabias

// dabias/catalog.cc

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

#include "dabias/catalog.h"

#include <algorithm>
#include <cmath>
#include <map>

namespace dabias {

const char* catalog_type_name(CatalogType t) {
  switch (t) {
    case CatalogType::kContactName:
      return "ContactName";
    case CatalogType::kDeviceName:
      return "DeviceName";
    case CatalogType::kDeviceLocation:
      return "DeviceLocation";
  }
  return "?";
}

CatalogType catalog_type_from_name(const std::string& name) {
  if (name == "ContactName") return CatalogType::kContactName;
  if (name == "DeviceName") return CatalogType::kDeviceName;
  if (name == "DeviceLocation") return CatalogType::kDeviceLocation;
  throw ParseError("unknown catalog type: " + name);
}

const std::vector<CatalogEntity>& CatalogSet::by_type(CatalogType t) const {
  switch (t) {
    case CatalogType::kContactName:
      return contact_names;
    case CatalogType::kDeviceName:
      return device_names;
    case CatalogType::kDeviceLocation:
      return device_locations;
  }
  return contact_names;
}

std::vector<CatalogEntity>& CatalogSet::by_type(CatalogType t) {
  switch (t) {
    case CatalogType::kContactName:
      return contact_names;
    case CatalogType::kDeviceName:
      return device_names;
    case CatalogType::kDeviceLocation:
      return device_locations;
  }
  return contact_names;
}

std::vector<CatalogEntity> select_catalogs(const DialogAct& da,
                                           const CatalogSet& catalogs,
                                           bool selection_enabled,
                                           int64_t max_entities,
                                           const CatalogEntity* must_keep) {
  std::vector<CatalogEntity> out;
  if (selection_enabled && da.slot == kSlotProperName) {
    out = catalogs.contact_names;
  } else if (selection_enabled && da.slot == kSlotDeviceName) {
    out = catalogs.device_names;
  } else if (selection_enabled && da.slot == kSlotDeviceLocation) {
    out = catalogs.device_locations;
  } else {
    out = catalogs.contact_names;
    out.insert(out.end(), catalogs.device_names.begin(),
               catalogs.device_names.end());
    out.insert(out.end(), catalogs.device_locations.begin(),
               catalogs.device_locations.end());
  }
  if (max_entities > 0 && static_cast<int64_t>(out.size()) > max_entities) {
    bool keep_needed = false;
    CatalogEntity kept;
    if (must_keep) {
      auto it = std::find(out.begin(), out.end(), *must_keep);
      if (it != out.end() && it - out.begin() >= max_entities) {
        keep_needed = true;
        kept = *it;
      }
    }
    out.resize(max_entities);
    if (keep_needed) out.back() = kept;
  }
  return out;
}

CatalogEncoder::CatalogEncoder(ParamStore& store, int64_t token_vocab,
                               int64_t embed_dim, int64_t hidden,
                               int64_t cat_dim, Rng& rng)
    : embed_dim_(embed_dim), hidden_(hidden), cat_dim_(cat_dim) {
  double ke = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  token_table_ =
      store.add_uniform("cat.token_table", {token_vocab, embed_dim}, ke, rng);
  type_table_ = store.add_uniform("cat.type_table", {3, embed_dim}, ke, rng);
  fwd_ = LstmLayer(store, "cat.fwd", embed_dim, hidden, rng);
  bwd_ = LstmLayer(store, "cat.bwd", embed_dim, hidden, rng);
  double kp = 1.0 / std::sqrt(static_cast<double>(2 * hidden));
  proj_w_ = store.add_uniform("cat.proj.w", {cat_dim, 2 * hidden}, kp, rng);
  proj_b_ = store.add("cat.proj.b", {cat_dim});
}

Tensor CatalogEncoder::entity_inputs(const CatalogEntity& entity) const {
  if (entity.tokens.empty())
    throw ContractError("catalog entity \"" + entity.text +
                        "\" has no tokens");
  Tensor type_emb =
      embedding_lookup(type_table_, static_cast<int64_t>(entity.type));
  std::vector<Tensor> rows;
  rows.reserve(entity.tokens.size());
  for (int tok : entity.tokens)
    rows.push_back(add(embedding_lookup(token_table_, tok), type_emb));
  return stack_rows(rows);
}

Tensor CatalogEncoder::encode_one(const CatalogEntity& entity) const {
  Tensor inputs = entity_inputs(entity);  // [L x e]
  int64_t len = inputs.dim(0);
  LstmLayer::State f = fwd_.initial_state();
  for (int64_t t = 0; t < len; ++t) f = fwd_.step(row_of(inputs, t), f);
  LstmLayer::State b = bwd_.initial_state();
  for (int64_t t = len - 1; t >= 0; --t) b = bwd_.step(row_of(inputs, t), b);
  return add(matmul(proj_w_, concat(f.h, b.h, 0)), proj_b_);
}

Tensor CatalogEncoder::encode(const std::vector<CatalogEntity>& entities) const {
  if (entities.empty())
    throw ContractError("encode_catalog: no entities to encode");
  // Bucket by length so each bucket runs as one batched unroll. Row-level
  // arithmetic is identical to encode_one, so the batching is invisible.
  std::map<size_t, std::vector<int64_t>> buckets;
  for (size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].tokens.empty())
      throw ContractError("catalog entity \"" + entities[i].text +
                          "\" has no tokens");
    buckets[entities[i].tokens.size()].push_back(static_cast<int64_t>(i));
  }
  std::vector<Tensor> bucket_outputs;
  std::vector<int64_t> order;  // original index per output row
  for (auto& [len, idxs] : buckets) {
    int64_t batch = static_cast<int64_t>(idxs.size());
    // Per-step inputs: X_t [B x e] for t in [0, len).
    std::vector<Tensor> step_inputs(len);
    {
      std::vector<std::vector<Tensor>> per_step(len);
      for (int64_t b = 0; b < batch; ++b) {
        const CatalogEntity& ent = entities[idxs[b]];
        Tensor type_emb =
            embedding_lookup(type_table_, static_cast<int64_t>(ent.type));
        for (size_t t = 0; t < len; ++t)
          per_step[t].push_back(
              add(embedding_lookup(token_table_, ent.tokens[t]), type_emb));
      }
      for (size_t t = 0; t < len; ++t) step_inputs[t] = stack_rows(per_step[t]);
    }
    LstmLayer::BatchState f = fwd_.initial_state(batch);
    for (size_t t = 0; t < len; ++t) f = fwd_.step(step_inputs[t], f);
    LstmLayer::BatchState b = bwd_.initial_state(batch);
    for (int64_t t = static_cast<int64_t>(len) - 1; t >= 0; --t)
      b = bwd_.step(step_inputs[t], b);
    Tensor h = concat(f.h, b.h, 1);  // [B x 2H]
    bucket_outputs.push_back(
        add_rowvec(matmul_nt(h, proj_w_), proj_b_));  // [B x cat_dim]
    order.insert(order.end(), idxs.begin(), idxs.end());
  }
  Tensor stacked = bucket_outputs[0];
  for (size_t i = 1; i < bucket_outputs.size(); ++i)
    stacked = concat(stacked, bucket_outputs[i], 0);
  // Restore original entity order.
  std::vector<int64_t> perm(order.size());
  for (size_t pos = 0; pos < order.size(); ++pos) perm[order[pos]] = pos;
  return gather_rows(stacked, perm);
}

BiasingNetwork::BiasingNetwork(ParamStore& store, int64_t audio_dim,
                               int64_t cat_dim, int64_t attn_dim,
                               bool use_no_bias_row, Rng& rng)
    : audio_dim_(audio_dim),
      cat_dim_(cat_dim),
      attn_dim_(attn_dim),
      use_no_bias_(use_no_bias_row) {
  double kq = 1.0 / std::sqrt(static_cast<double>(audio_dim));
  double kc = 1.0 / std::sqrt(static_cast<double>(cat_dim));
  wq_ = store.add_uniform("bias.wq", {audio_dim, attn_dim}, kq, rng);
  wk_ = store.add_uniform("bias.wk", {cat_dim, attn_dim}, kc, rng);
  wv_ = store.add_uniform("bias.wv", {cat_dim, audio_dim}, kc, rng);
  if (use_no_bias_)
    no_bias_row_ = store.add("bias.no_bias_row", {cat_dim});
}

Tensor BiasingNetwork::with_no_bias_row(const Tensor& catalog_rows) const {
  if (!use_no_bias_) return catalog_rows;
  return concat(catalog_rows, reshape(no_bias_row_, {1, cat_dim_}), 0);
}

std::pair<Tensor, Tensor> BiasingNetwork::attend(
    const Tensor& query, const Tensor& catalog_rows,
    const std::vector<char>* mask) const {
  if (catalog_rows.ndim() != 2 || catalog_rows.dim(0) < 1)
    throw ContractError("bias_attend: need at least one catalog row, got " +
                        shape_str(catalog_rows.shape()));
  if (query.ndim() != 1 || query.numel() != audio_dim_ ||
      catalog_rows.dim(1) != cat_dim_)
    throw DimensionError("bias_attend: expected query [" +
                         std::to_string(audio_dim_) + "] and rows [K x " +
                         std::to_string(cat_dim_) + "], got " +
                         shape_str(query.shape()) + " and " +
                         shape_str(catalog_rows.shape()));
  // (C^e W^k)(q W^q)^T / sqrt(d)
  Tensor q_proj = matmul(transpose(wq_), query);          // [d]
  Tensor keys = matmul(catalog_rows, wk_);                // [K' x d]
  Tensor scores =
      scale(matmul(keys, q_proj), 1.0 / std::sqrt(double(attn_dim_)));
  Tensor alpha = mask ? masked_softmax(scores, *mask) : softmax(scores);
  // b = alpha^T (C^e W^v): single row of values-weighted combination
  Tensor values = matmul(catalog_rows, wv_);              // [K' x D_a]
  Tensor bias = matmul(transpose(values), alpha);         // [D_a]
  return {alpha, bias};
}

std::pair<Tensor, Tensor> BiasingNetwork::attend_sequence(
    const Tensor& queries, const Tensor& catalog_rows) const {
  if (catalog_rows.ndim() != 2 || catalog_rows.dim(0) < 1)
    throw ContractError("bias_attend: need at least one catalog row, got " +
                        shape_str(catalog_rows.shape()));
  if (queries.ndim() != 2 || queries.dim(1) != audio_dim_ ||
      catalog_rows.dim(1) != cat_dim_)
    throw DimensionError("bias_attend: expected queries [T x " +
                         std::to_string(audio_dim_) + "] and rows [K x " +
                         std::to_string(cat_dim_) + "], got " +
                         shape_str(queries.shape()) + " and " +
                         shape_str(catalog_rows.shape()));
  Tensor q_proj = matmul(queries, wq_);                   // [T x d]
  Tensor keys = matmul(catalog_rows, wk_);                // [K' x d]
  Tensor scores =
      scale(matmul_nt(q_proj, keys), 1.0 / std::sqrt(double(attn_dim_)));
  Tensor alpha = row_softmax(scores);                     // [T x K']
  Tensor values = matmul(catalog_rows, wv_);              // [K' x D_a]
  Tensor bias = matmul(alpha, values);                    // [T x D_a]
  return {alpha, bias};
}

Tensor combine(const Tensor& h, const Tensor& b) { return add(h, b); }

}  // namespace dabias

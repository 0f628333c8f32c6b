// dabias/catalog.h

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

#ifndef DABIAS_CATALOG_H_
#define DABIAS_CATALOG_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dabias/dialog_act.h"
#include "dabias/lstm.h"
#include "dabias/params.h"
#include "dabias/tensor.h"

namespace dabias {

enum class CatalogType { kContactName, kDeviceName, kDeviceLocation };

const char* catalog_type_name(CatalogType t);
CatalogType catalog_type_from_name(const std::string& name);

// Slot strings that match catalog types in the selection rule.
inline const char* kSlotProperName = "ProperName";
inline const char* kSlotDeviceName = "DeviceName";
inline const char* kSlotDeviceLocation = "DeviceLocation";

struct CatalogEntity {
  std::string text;         // surface form
  std::vector<int> tokens;  // token ids of the surface form
  CatalogType type = CatalogType::kContactName;

  bool operator==(const CatalogEntity& o) const {
    return text == o.text && type == o.type;
  }
};

// The three typed entity lists for one user.
struct CatalogSet {
  std::vector<CatalogEntity> contact_names;
  std::vector<CatalogEntity> device_names;
  std::vector<CatalogEntity> device_locations;

  const std::vector<CatalogEntity>& by_type(CatalogType t) const;
  std::vector<CatalogEntity>& by_type(CatalogType t);
  int64_t total_size() const {
    return static_cast<int64_t>(contact_names.size() + device_names.size() +
                                device_locations.size());
  }
};

// Slot-driven catalog selection: ProperName -> contact names,
// DeviceName -> device names, DeviceLocation -> device locations, any other
// slot -> all three lists concatenated. With selection_enabled == false the
// rule is bypassed and all three lists are always used. The result is
// truncated to at most max_entities; when must_keep is given and would be
// truncated away, it replaces the last kept slot.
std::vector<CatalogEntity> select_catalogs(
    const DialogAct& da, const CatalogSet& catalogs, bool selection_enabled,
    int64_t max_entities, const CatalogEntity* must_keep = nullptr);

// Shared-embedding BiLSTM over entity tokens with the type embedding added
// to every token input; final forward and backward states are concatenated
// and projected to cat_dim.
class CatalogEncoder {
 public:
  CatalogEncoder() = default;
  CatalogEncoder(ParamStore& store, int64_t token_vocab, int64_t embed_dim,
                 int64_t hidden, int64_t cat_dim, Rng& rng);

  // One row [cat_dim] per entity, stacked to [K x cat_dim].
  // Entities are internally batched by length; each row is bitwise equal to
  // the single-entity path.
  Tensor encode(const std::vector<CatalogEntity>& entities) const;
  // Reference single-entity path (kept for tests).
  Tensor encode_one(const CatalogEntity& entity) const;

  int64_t cat_dim() const { return cat_dim_; }

 private:
  Tensor entity_inputs(const CatalogEntity& entity) const;  // [L x e]
  int64_t embed_dim_ = 0;
  int64_t hidden_ = 0;
  int64_t cat_dim_ = 0;
  Tensor token_table_;  // [V_tok x e], shared by both directions
  Tensor type_table_;   // [3 x e]
  LstmLayer fwd_;
  LstmLayer bwd_;
  Tensor proj_w_;  // [cat_dim x 2*hidden]
  Tensor proj_b_;  // [cat_dim]
};

// Single-head scaled dot-product cross-attention over catalog rows plus an
// optional learned no-bias row, producing a biasing vector per frame.
class BiasingNetwork {
 public:
  BiasingNetwork() = default;
  BiasingNetwork(ParamStore& store, int64_t audio_dim, int64_t cat_dim,
                 int64_t attn_dim, bool use_no_bias_row, Rng& rng);

  bool use_no_bias_row() const { return use_no_bias_; }

  // Appends the learned no-bias row (if enabled) to the encoded catalog.
  Tensor with_no_bias_row(const Tensor& catalog_rows) const;

  // Single query [D_a] against C^e [K' x D_c]:
  // alpha = softmax((C^e W^k)(q W^q)^T / sqrt(d)), b = alpha^T (C^e W^v).
  // mask, when given, removes padding rows from the softmax.
  std::pair<Tensor, Tensor> attend(const Tensor& query,
                                   const Tensor& catalog_rows,
                                   const std::vector<char>* mask =
                                       nullptr) const;

  // Whole query sequence [T x D_a] -> (alpha [T x K'], bias [T x D_a]).
  std::pair<Tensor, Tensor> attend_sequence(const Tensor& queries,
                                            const Tensor& catalog_rows) const;

  const Tensor& wq() const { return wq_; }
  const Tensor& wk() const { return wk_; }
  const Tensor& wv() const { return wv_; }
  Tensor& wv() { return wv_; }

 private:
  int64_t audio_dim_ = 0;
  int64_t cat_dim_ = 0;
  int64_t attn_dim_ = 0;
  bool use_no_bias_ = false;
  Tensor wq_;           // [D_a x d]
  Tensor wk_;           // [D_c x d]
  Tensor wv_;           // [D_c x D_a]
  Tensor no_bias_row_;  // [D_c]
};

// h ⊕ b, realized as elementwise addition.
Tensor combine(const Tensor& h, const Tensor& b);

}  // namespace dabias

#endif  // DABIAS_CATALOG_H_

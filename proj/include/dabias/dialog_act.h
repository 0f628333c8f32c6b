// dabias/dialog_act.h

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

#ifndef DABIAS_DIALOG_ACT_H_
#define DABIAS_DIALOG_ACT_H_

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dabias/params.h"
#include "dabias/tensor.h"

namespace dabias {

// A dialog act "action(slot)", e.g. SlotValueElicitation(ProperName).
struct DialogAct {
  std::string action;
  std::string slot;

  std::string str() const { return action + "(" + slot + ")"; }
  bool operator==(const DialogAct& o) const {
    return action == o.action && slot == o.slot;
  }
};

inline const char* kDefaultAction = "DefaultDialogAct";
inline const char* kDefaultSlot = "None";

inline DialogAct default_dialog_act() {
  return {kDefaultAction, kDefaultSlot};
}

// Parses "action(slot)"; whitespace around either part is trimmed.
// Throws ParseError on malformed input.
DialogAct parse_da(std::string_view text);

// Dense action/slot id maps with a reserved UNK id 0 for strings outside
// the inventory. The distinct act count is bounded by max_inventory.
class DaVocabulary {
 public:
  static constexpr int64_t kUnkId = 0;

  DaVocabulary() = default;
  DaVocabulary(std::vector<std::string> actions,
               std::vector<std::string> slots, int64_t max_inventory = 49);

  int64_t action_id(const std::string& a) const;
  int64_t slot_id(const std::string& s) const;
  int64_t action_count() const {  // including UNK
    return static_cast<int64_t>(actions_.size()) + 1;
  }
  int64_t slot_count() const { return static_cast<int64_t>(slots_.size()) + 1; }

  const std::vector<std::string>& actions() const { return actions_; }
  const std::vector<std::string>& slots() const { return slots_; }

 private:
  std::vector<std::string> actions_;
  std::vector<std::string> slots_;
  std::unordered_map<std::string, int64_t> action_ids_;
  std::unordered_map<std::string, int64_t> slot_ids_;
};

// Action and slot embedding tables of shared width, summed elementwise,
// then a feed-forward layer with ReLU. Output dimension is da_dim.
class DaEncoder {
 public:
  DaEncoder() = default;
  DaEncoder(ParamStore& store, const DaVocabulary& vocab, int64_t embed_dim,
            int64_t da_dim, Rng& rng);

  // relu(W (emb_action + emb_slot) + b) -> [da_dim]
  Tensor encode(const DialogAct& da, const DaVocabulary& vocab) const;

  int64_t da_dim() const { return da_dim_; }
  const Tensor& action_table() const { return action_table_; }
  const Tensor& slot_table() const { return slot_table_; }

 private:
  int64_t embed_dim_ = 0;
  int64_t da_dim_ = 0;
  Tensor action_table_;  // [A x e]
  Tensor slot_table_;    // [S x e]
  Tensor w_;             // [da_dim x e]
  Tensor b_;             // [da_dim]
};

// Concat(x_t, h_dae) with x first; both single-frame and whole-sequence
// forms. The sequence form concatenates along the feature axis.
Tensor early_fuse(const Tensor& x_t, const Tensor& h_dae);
Tensor early_fuse_sequence(const Tensor& frames, const Tensor& h_dae);

// relu(FFN(Concat(h_enc, h_dae))); output dimension equals the encoder
// output dimension.
class LateFusionNetwork {
 public:
  LateFusionNetwork() = default;
  LateFusionNetwork(ParamStore& store, int64_t audio_dim, int64_t da_dim,
                    Rng& rng);

  Tensor apply(const Tensor& h_enc_t, const Tensor& h_dae) const;     // [D_a]
  Tensor apply_sequence(const Tensor& h_enc, const Tensor& h_dae) const;

 private:
  int64_t audio_dim_ = 0;
  int64_t da_dim_ = 0;
  Tensor w_;  // [D_a x (D_a + da_dim)]
  Tensor b_;  // [D_a]
};

}  // namespace dabias

#endif  // DABIAS_DIALOG_ACT_H_

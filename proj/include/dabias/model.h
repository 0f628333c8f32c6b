// dabias/model.h

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

#ifndef DABIAS_MODEL_H_
#define DABIAS_MODEL_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dabias/catalog.h"
#include "dabias/corpus.h"
#include "dabias/dialog_act.h"
#include "dabias/rnnt.h"

namespace dabias {

enum class FusionMode { kNone, kEarly, kLate, kEarlyLate };

const char* fusion_mode_name(FusionMode m);
FusionMode fusion_mode_from_name(const std::string& name);

// All dimensions are configurable; defaults are the desk-scale setup
// (paper-scale values go through the same keys).
struct ModelConfig {
  // Feature stacking applied to raw corpus frames before the encoder; the
  // encoder input dim is raw_feat_dim * (stack_left + 1).
  int64_t raw_feat_dim = 64;
  int64_t stack_left = 2;
  int64_t downsample = 3;
  int64_t enc_layers = 2;
  int64_t enc_hidden = 64;
  int64_t audio_dim = 64;        // D_a
  int64_t pred_layers = 1;
  int64_t pred_hidden = 64;
  int64_t token_embed_dim = 32;
  int64_t joint_hidden = 64;
  int64_t vocab_size = 30;       // V; blank id == V

  FusionMode fusion = FusionMode::kNone;
  int64_t da_embed_dim = 16;     // shared action/slot embedding width
  int64_t da_dim = 16;           // d_da

  bool has_adapter = false;      // catalog encoder + biasing network present
  int64_t cat_embed_dim = 16;    // BiLSTM input size
  int64_t cat_hidden = 16;       // per direction
  int64_t cat_dim = 16;          // D_c
  int64_t attn_dim = 16;         // d
  bool no_bias_row = true;
  int64_t max_catalog = 50;      // K

  bool uses_da() const { return fusion != FusionMode::kNone; }
  bool uses_early() const {
    return fusion == FusionMode::kEarly || fusion == FusionMode::kEarlyLate;
  }
  bool uses_late() const {
    return fusion == FusionMode::kLate || fusion == FusionMode::kEarlyLate;
  }
  int64_t feat_dim() const { return raw_feat_dim * (stack_left + 1); }
  int64_t encoder_input_dim() const {
    return feat_dim() + (uses_early() ? da_dim : 0);
  }
};

struct ForwardOptions {
  bool use_bias = true;           // apply the adapter when present
  bool catalog_selection = true;  // slot-driven selection vs bypass
};

// The assembled DA-guided contextual transducer. Which sub-networks exist
// follows the config: a DA encoder iff fusion != none, a late-fusion
// network iff fusion is late or early-late (shared DA encoder feeds both
// paths in early-late), and catalog encoder + biasing network iff
// has_adapter.
class ContextualModel {
 public:
  ContextualModel(const ModelConfig& cfg, const DaVocabulary& da_vocab,
                  uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const DaVocabulary& da_vocab() const { return da_vocab_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // DA embedding for the utterance; computed once per forward pass and
  // shared between the early and late paths.
  Tensor da_embedding(const DialogAct& da) const;

  // Encoder side up to (and including) the biasing combine. Asserts the
  // fusion-mode provenance contract on the biasing query.
  Tensor encode_utterance(const Utterance& utt, const ForwardOptions& opts,
                          int64_t* fed_entities = nullptr) const;

  // Full lattice for the utterance under the configured paths.
  Tensor lattice(const Utterance& utt, const ForwardOptions& opts) const;

  // -log P(transcript | utterance inputs)
  Tensor loss(const Utterance& utt, const ForwardOptions& opts) const;

  // Greedy decode; deterministic, frame-synchronous.
  std::vector<int> decode(const Utterance& utt, const ForwardOptions& opts,
                          int max_symbols_per_frame = 5) const;

  const EncoderNetwork& encoder() const { return enc_; }
  const PredictionNetwork& prediction() const { return pred_; }
  const JointNetwork& joint() const { return joint_; }
  const DaEncoder& da_encoder() const { return da_enc_; }
  const LateFusionNetwork& late_fusion() const { return late_fusion_; }
  const CatalogEncoder& catalog_encoder() const { return cat_enc_; }
  const BiasingNetwork& biasing() const { return biasing_; }
  BiasingNetwork& biasing() { return biasing_; }

  int blank_id() const { return static_cast<int>(cfg_.vocab_size); }

  // The entities the biasing network sees for this utterance (selection or
  // bypass, truncated to K keeping the correct entity).
  std::vector<CatalogEntity> entities_for(const Utterance& utt,
                                          bool catalog_selection) const;

 private:
  Tensor stacked_input(const Utterance& utt) const;
  Provenance expected_query_provenance() const;

  ModelConfig cfg_;
  DaVocabulary da_vocab_;
  ParamStore params_;
  EncoderNetwork enc_;
  PredictionNetwork pred_;
  JointNetwork joint_;
  DaEncoder da_enc_;
  LateFusionNetwork late_fusion_;
  CatalogEncoder cat_enc_;
  BiasingNetwork biasing_;
};

// Parameter-name groups used by freeze masks and the two training stages.
bool is_transducer_param(const std::string& name);   // enc./pred./joint.
bool is_da_fusion_param(const std::string& name);    // da./fuse.
bool is_adapter_param(const std::string& name);      // cat./bias.

}  // namespace dabias

#endif  // DABIAS_MODEL_H_

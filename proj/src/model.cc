// dabias/model.cc

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

#include "dabias/model.h"

#include <cmath>

namespace dabias {

const char* fusion_mode_name(FusionMode m) {
  switch (m) {
    case FusionMode::kNone:
      return "none";
    case FusionMode::kEarly:
      return "early";
    case FusionMode::kLate:
      return "late";
    case FusionMode::kEarlyLate:
      return "early_late";
  }
  return "?";
}

FusionMode fusion_mode_from_name(const std::string& name) {
  if (name == "none") return FusionMode::kNone;
  if (name == "early") return FusionMode::kEarly;
  if (name == "late") return FusionMode::kLate;
  if (name == "early_late") return FusionMode::kEarlyLate;
  throw ConfigError("unknown fusion mode: " + name);
}

ContextualModel::ContextualModel(const ModelConfig& cfg,
                                 const DaVocabulary& da_vocab, uint64_t seed)
    : cfg_(cfg), da_vocab_(da_vocab) {
  Rng rng(derive_seed(seed, "model-init"));
  enc_ = EncoderNetwork(params_, cfg.encoder_input_dim(), cfg.enc_hidden,
                        cfg.enc_layers, cfg.audio_dim, rng);
  pred_ = PredictionNetwork(params_, cfg.vocab_size, cfg.token_embed_dim,
                            cfg.pred_hidden, cfg.pred_layers, cfg.audio_dim,
                            rng);
  joint_ = JointNetwork(params_, cfg.audio_dim, cfg.joint_hidden,
                        cfg.vocab_size, rng);
  if (cfg.uses_da())
    da_enc_ = DaEncoder(params_, da_vocab_, cfg.da_embed_dim, cfg.da_dim, rng);
  if (cfg.uses_late())
    late_fusion_ = LateFusionNetwork(params_, cfg.audio_dim, cfg.da_dim, rng);
  if (cfg.has_adapter) {
    cat_enc_ = CatalogEncoder(params_, kCharVocab, cfg.cat_embed_dim,
                              cfg.cat_hidden, cfg.cat_dim, rng);
    biasing_ = BiasingNetwork(params_, cfg.audio_dim, cfg.cat_dim,
                              cfg.attn_dim, cfg.no_bias_row, rng);
  }
}

Tensor ContextualModel::da_embedding(const DialogAct& da) const {
  if (!cfg_.uses_da())
    throw ConfigError("da_embedding requested with fusion mode none");
  return da_enc_.encode(da, da_vocab_);
}

Tensor ContextualModel::stacked_input(const Utterance& utt) const {
  if (utt.f_raw != cfg_.raw_feat_dim)
    throw ConfigError("utterance raw frame dim " + std::to_string(utt.f_raw) +
                      " does not match the model's raw_feat_dim " +
                      std::to_string(cfg_.raw_feat_dim));
  int64_t t_len = 0;
  std::vector<double> stacked =
      stack_downsample(utt.raw_frames, utt.t_raw, utt.f_raw, cfg_.stack_left,
                       cfg_.downsample, &t_len);
  return Tensor::from_values({t_len, cfg_.feat_dim()}, std::move(stacked));
}

Provenance ContextualModel::expected_query_provenance() const {
  switch (cfg_.fusion) {
    case FusionMode::kNone:
      return Provenance::kRawEncoder;
    case FusionMode::kEarly:
      return Provenance::kEarlyFusedEncoder;
    case FusionMode::kLate:
    case FusionMode::kEarlyLate:
      return Provenance::kLateFused;
  }
  return Provenance::kNone;
}

std::vector<CatalogEntity> ContextualModel::entities_for(
    const Utterance& utt, bool catalog_selection) const {
  DialogAct da = parse_da(utt.da);
  const CatalogEntity* correct = utt.correct_entity();
  return select_catalogs(da, utt.catalog, catalog_selection,
                         cfg_.max_catalog, correct);
}

Tensor ContextualModel::encode_utterance(const Utterance& utt,
                                         const ForwardOptions& opts,
                                         int64_t* fed_entities) const {
  Tensor feats = stacked_input(utt);
  Tensor h_dae;
  if (cfg_.uses_da()) {
    // Computed once; in early-late mode this same tensor feeds both fusion
    // paths (the DA encoder is shared).
    h_dae = da_embedding(parse_da(utt.da));
  }
  Tensor enc_in = feats;
  Provenance enc_prov = Provenance::kRawEncoder;
  if (cfg_.uses_early()) {
    if (!h_dae.defined())
      throw ConfigError("early fusion requires a dialog-act embedding");
    enc_in = early_fuse_sequence(feats, h_dae);
    enc_prov = Provenance::kEarlyFusedEncoder;
  }
  Tensor h_enc = enc_.forward(enc_in);
  h_enc.set_provenance(enc_prov);
  Tensor query = h_enc;
  if (cfg_.uses_late()) query = late_fusion_.apply_sequence(h_enc, h_dae);

  if (!cfg_.has_adapter || !opts.use_bias) {
    if (fed_entities) *fed_entities = 0;
    return query;
  }
  // Exactly one query path per configuration feeds the biasing network.
  if (query.provenance() != expected_query_provenance())
    throw ContractError(
        std::string("biasing query provenance does not match fusion mode ") +
        fusion_mode_name(cfg_.fusion));
  std::vector<CatalogEntity> entities =
      entities_for(utt, opts.catalog_selection);
  if (fed_entities) *fed_entities = static_cast<int64_t>(entities.size());
  Tensor rows = biasing_.with_no_bias_row(cat_enc_.encode(entities));
  auto [alpha, bias] = biasing_.attend_sequence(query, rows);
  (void)alpha;
  return combine(query, bias);
}

Tensor ContextualModel::lattice(const Utterance& utt,
                                const ForwardOptions& opts) const {
  Tensor h_enc = encode_utterance(utt, opts);
  Tensor h_pre = pred_.forward(utt.tokens);
  return build_lattice(h_enc, h_pre, joint_);
}

Tensor ContextualModel::loss(const Utterance& utt,
                             const ForwardOptions& opts) const {
  return rnnt_loss(lattice(utt, opts), utt.tokens, blank_id());
}

namespace {

// Frame-synchronous stepper over a precomputed encoder-side matrix.
struct ModelStepper {
  const PredictionNetwork& pred;
  const JointNetwork& joint;
  const Tensor& h_enc;  // [T x D_a]
  PredictionNetwork::State state;
  std::vector<double> buf;

  ModelStepper(const PredictionNetwork& p, const JointNetwork& j,
               const Tensor& h)
      : pred(p), joint(j), h_enc(h), state(p.start()) {}

  const std::vector<double>& logits(int64_t t) {
    Tensor lg = joint.logits(row_of(h_enc, t), state.out);
    buf = lg.values();
    return buf;
  }
  void advance(int token) { state = pred.advance(state, token); }
};

}  // namespace

std::vector<int> ContextualModel::decode(const Utterance& utt,
                                         const ForwardOptions& opts,
                                         int max_symbols_per_frame) const {
  Tensor h_enc = encode_utterance(utt, opts);
  ModelStepper stepper(pred_, joint_, h_enc);
  return greedy_decode_loop(h_enc.dim(0), max_symbols_per_frame, blank_id(),
                            stepper);
}

bool is_transducer_param(const std::string& name) {
  return name.rfind("enc.", 0) == 0 || name.rfind("pred.", 0) == 0 ||
         name.rfind("joint.", 0) == 0;
}

bool is_da_fusion_param(const std::string& name) {
  return name.rfind("da.", 0) == 0 || name.rfind("fuse.", 0) == 0;
}

bool is_adapter_param(const std::string& name) {
  return name.rfind("cat.", 0) == 0 || name.rfind("bias.", 0) == 0;
}

}  // namespace dabias

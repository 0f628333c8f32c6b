// dabias/trainer.cc

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

#include "dabias/trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dabias {

const char* stage_name(Stage s) {
  return s == Stage::kPretrain ? "pretrain" : "adapt";
}

Stage stage_from_name(const std::string& name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "adapt") return Stage::kAdapt;
  throw ConfigError("unknown stage: " + name);
}

const char* da_policy_name(DaPolicy p) {
  return p == DaPolicy::kFreeze ? "freeze" : "unfreeze";
}

DaPolicy da_policy_from_name(const std::string& name) {
  if (name == "freeze") return DaPolicy::kFreeze;
  if (name == "unfreeze") return DaPolicy::kUnfreeze;
  throw ConfigError("unknown da_freeze_policy: " + name);
}

double lr_at(int64_t step, const LrSchedule& s) {
  if (step < 0) throw ContractError("lr_at: negative step");
  if (step < s.warmup_steps) {
    double frac = static_cast<double>(step) / s.warmup_steps;
    return s.start + (s.peak - s.start) * frac;
  }
  if (step <= s.warmup_steps + s.hold_steps) return s.peak;
  double over = static_cast<double>(step - s.warmup_steps - s.hold_steps);
  return s.peak * std::pow(s.decay_rate, over / s.decay_interval);
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv) {
  TrainConfig cfg;
  cfg.stage = stage_from_name(kv.get_string("stage", "pretrain"));
  cfg.fusion_mode =
      fusion_mode_from_name(kv.get_string("fusion_mode", "none"));
  cfg.da_freeze_policy =
      da_policy_from_name(kv.get_string("da_freeze_policy", "freeze"));
  cfg.catalog_selection = kv.get_bool("catalog_selection", true);
  auto [mu, mg] = kv.get_ratio("mix_ratio", 1.5, 1.0);
  cfg.mix_user = mu;
  cfg.mix_general = mg;
  cfg.lr.start = kv.get_double("lr_start", cfg.lr.start);
  cfg.lr.peak = kv.get_double("lr_peak", cfg.lr.peak);
  cfg.lr.warmup_steps = kv.get_int64("warmup_steps", cfg.lr.warmup_steps);
  cfg.lr.hold_steps = kv.get_int64("hold_steps", cfg.lr.hold_steps);
  cfg.lr.decay_rate = kv.get_double("decay_rate", cfg.lr.decay_rate);
  cfg.lr.decay_interval =
      kv.get_int64("decay_interval", cfg.lr.decay_interval);
  cfg.adapt_lr = kv.get_double("adapt_lr", cfg.adapt_lr);
  cfg.batch_size = kv.get_int64("batch_size", cfg.batch_size);
  cfg.max_steps = kv.get_int64("max_steps", cfg.max_steps);
  cfg.early_stop_patience =
      kv.get_int64("early_stop_patience", cfg.early_stop_patience);
  cfg.eval_every = kv.get_int64("eval_every", cfg.eval_every);
  cfg.clip_norm = kv.get_double("clip_norm", cfg.clip_norm);
  cfg.seed = kv.get_uint64("seed", cfg.seed);
  ModelConfig& m = cfg.model;
  m.enc_layers = kv.get_int64("enc_layers", m.enc_layers);
  m.enc_hidden = kv.get_int64("enc_hidden", m.enc_hidden);
  m.audio_dim = kv.get_int64("audio_dim", m.audio_dim);
  m.pred_layers = kv.get_int64("pred_layers", m.pred_layers);
  m.pred_hidden = kv.get_int64("pred_hidden", m.pred_hidden);
  m.token_embed_dim = kv.get_int64("token_embed_dim", m.token_embed_dim);
  m.joint_hidden = kv.get_int64("joint_hidden", m.joint_hidden);
  m.vocab_size = kv.get_int64("vocab_size", m.vocab_size);
  m.da_embed_dim = kv.get_int64("da_embed_dim", m.da_embed_dim);
  m.da_dim = kv.get_int64("da_dim", m.da_dim);
  m.cat_embed_dim = kv.get_int64("cat_embed_dim", m.cat_embed_dim);
  m.cat_hidden = kv.get_int64("cat_hidden", m.cat_hidden);
  m.cat_dim = kv.get_int64("cat_dim", m.cat_dim);
  m.attn_dim = kv.get_int64("attn_dim", m.attn_dim);
  m.no_bias_row = kv.get_bool("no_bias_row", m.no_bias_row);
  m.max_catalog = kv.get_int64("max_catalog", m.max_catalog);
  m.fusion = cfg.fusion_mode;
  return cfg;
}

FreezeMask build_freeze_mask(const ParamStore& params, Stage stage,
                             DaPolicy policy) {
  FreezeMask mask;
  if (stage == Stage::kPretrain) return mask;
  for (const Parameter& p : params.items()) {
    if (is_transducer_param(p.name)) mask.insert(p.name);
    if (policy == DaPolicy::kFreeze && is_da_fusion_param(p.name))
      mask.insert(p.name);
  }
  return mask;
}

void apply_freeze_mask(ParamStore& params, const FreezeMask& mask) {
  for (Parameter& p : params.items())
    p.trainable = mask.count(p.name) == 0;
}

void AdamOptimizer::step(ParamStore& params, double lr) {
  if (slots_.empty()) slots_.resize(params.size());
  if (slots_.size() != params.size())
    throw ContractError("optimizer state does not match the parameter store");
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.items().size(); ++i) {
    Parameter& p = params.items()[i];
    if (!p.trainable || !p.tensor.has_grad()) continue;
    Slot& slot = slots_[i];
    const std::vector<double>& g = p.tensor.grad_view();
    std::vector<double>& w = p.tensor.values();
    if (slot.m.empty()) {
      slot.m.assign(g.size(), 0.0);
      slot.v.assign(g.size(), 0.0);
    }
    for (size_t k = 0; k < g.size(); ++k) {
      slot.m[k] = beta1_ * slot.m[k] + (1.0 - beta1_) * g[k];
      slot.v[k] = beta2_ * slot.v[k] + (1.0 - beta2_) * g[k] * g[k];
      double mhat = slot.m[k] / bc1;
      double vhat = slot.v[k] / bc2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double clip_gradients(ParamStore& params, double max_norm) {
  double sq = 0.0;
  for (Parameter& p : params.items()) {
    if (!p.trainable || !p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad_view()) sq += g * g;
  }
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    double scale = max_norm / norm;
    for (Parameter& p : params.items()) {
      if (!p.trainable || !p.tensor.has_grad()) continue;
      for (double& g : p.tensor.grad()) g *= scale;
    }
  }
  return norm;
}

MixSampler::MixSampler(int64_t user_count, int64_t general_count,
                       double ratio_user, double ratio_general, uint64_t seed)
    : p_user_(ratio_user / (ratio_user + ratio_general)),
      pick_rng_(derive_seed(seed, "mix-pick")),
      user_rng_(derive_seed(seed, "mix-user")),
      general_rng_(derive_seed(seed, "mix-general")) {
  if (user_count <= 0 || general_count <= 0)
    throw ContractError("mix_batches: both streams must be non-empty");
  if (ratio_user < 0 || ratio_general < 0 ||
      ratio_user + ratio_general <= 0)
    throw ContractError("mix_batches: bad ratio");
  user_order_.resize(user_count);
  general_order_.resize(general_count);
  for (int64_t i = 0; i < user_count; ++i) user_order_[i] = i;
  for (int64_t i = 0; i < general_count; ++i) general_order_[i] = i;
  user_rng_.shuffle(user_order_);
  general_rng_.shuffle(general_order_);
}

int64_t MixSampler::next_from(std::vector<int64_t>& order, size_t& pos,
                              Rng& rng) {
  if (pos >= order.size()) {
    rng.shuffle(order);
    pos = 0;
  }
  return order[pos++];
}

MixSampler::Draw MixSampler::next() {
  bool user = pick_rng_.uniform() < p_user_;
  if (user) return {true, next_from(user_order_, user_pos_, user_rng_)};
  return {false, next_from(general_order_, general_pos_, general_rng_)};
}

double mean_loss(const ContextualModel& model,
                 const std::vector<Utterance>& utts,
                 const ForwardOptions& opts, int threads) {
  if (utts.empty()) return 0.0;
  std::vector<double> losses(utts.size(), 0.0);
  int64_t n = static_cast<int64_t>(utts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads( \
    threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int64_t i = 0; i < n; ++i)
    losses[i] = model.loss(utts[i], opts).scalar_value();
  double total = 0.0;
  for (double l : losses) total += l;  // fixed order
  return total / static_cast<double>(n);
}

namespace {

// Snapshot/restore of trainable parameter values for best-checkpoint
// tracking during early stopping.
std::vector<std::vector<double>> snapshot_trainable(const ParamStore& params) {
  std::vector<std::vector<double>> snap;
  snap.reserve(params.size());
  for (const Parameter& p : params.items())
    snap.push_back(p.trainable ? p.tensor.values()
                               : std::vector<double>());
  return snap;
}

void restore_trainable(ParamStore& params,
                       const std::vector<std::vector<double>>& snap) {
  for (size_t i = 0; i < params.items().size(); ++i)
    if (!snap[i].empty()) params.items()[i].tensor.values() = snap[i];
}

struct Sampler {
  virtual ~Sampler() = default;
  virtual const Utterance& next() = 0;
};

// Stage 1: epoch shuffles over the whole train split.
struct EpochSampler : Sampler {
  const std::vector<Utterance>& utts;
  std::vector<int64_t> order;
  size_t pos = 0;
  Rng rng;
  EpochSampler(const std::vector<Utterance>& u, uint64_t seed)
      : utts(u), rng(derive_seed(seed, "batch-order")) {
    order.resize(utts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
  }
  const Utterance& next() override {
    if (pos >= order.size()) {
      rng.shuffle(order);
      pos = 0;
    }
    return utts[order[pos++]];
  }
};

// Stage 2: the 1.5:1 user:general mix.
struct MixedSampler : Sampler {
  std::vector<const Utterance*> user, general;
  MixSampler mix;
  MixedSampler(const std::vector<Utterance>& utts, double ratio_user,
               double ratio_general, uint64_t seed)
      : mix(1, 1, 1, 1, 0) {
    for (const Utterance& u : utts)
      (u.has_tag(kTagUserSpecific) ? user : general).push_back(&u);
    if (user.empty() || general.empty())
      throw ContractError(
          "adapt stage needs both user-specific and general train data");
    mix = MixSampler(static_cast<int64_t>(user.size()),
                     static_cast<int64_t>(general.size()), ratio_user,
                     ratio_general, seed);
  }
  const Utterance& next() override {
    MixSampler::Draw d = mix.next();
    return d.user ? *user[d.index] : *general[d.index];
  }
};

struct LoopConfig {
  const TrainConfig& cfg;
  ForwardOptions opts;
  bool use_schedule;  // stage 1 uses lr_at; stage 2 uses constant adapt_lr
};

TrainResult train_loop(ContextualModel& model, Sampler& sampler,
                       const std::vector<Utterance>& dev,
                       const LoopConfig& lc, TrainLogger log) {
  const TrainConfig& cfg = lc.cfg;
  AdamOptimizer adam;
  TrainResult result;
  double best_dev = std::numeric_limits<double>::infinity();
  auto best_snapshot = snapshot_trainable(model.params());
  int64_t bad_evals = 0;

  for (int64_t step = 0; step < cfg.max_steps; ++step) {
    model.params().zero_grads();
    double batch_loss = 0.0;
    for (int64_t b = 0; b < cfg.batch_size; ++b) {
      const Utterance& utt = sampler.next();
      Tape tape;
      TapeScope scope(&tape);
      Tensor loss = model.loss(utt, lc.opts);
      tape.backward(loss);
      batch_loss += loss.scalar_value();
    }
    batch_loss /= static_cast<double>(cfg.batch_size);
    if (!std::isfinite(batch_loss))
      throw TrainingError("training loss is not finite", step);
    if (step == 0) result.first_loss = batch_loss;
    result.final_train_loss = batch_loss;
    clip_gradients(model.params(), cfg.clip_norm);
    double lr = lc.use_schedule ? lr_at(step, cfg.lr) : cfg.adapt_lr;
    adam.step(model.params(), lr);
    result.steps = step + 1;

    if (!dev.empty() && cfg.eval_every > 0 &&
        (step + 1) % cfg.eval_every == 0) {
      double dev_loss = mean_loss(model, dev, lc.opts);
      if (log)
        log("step " + std::to_string(step + 1) + " train_loss " +
            std::to_string(batch_loss) + " dev_loss " +
            std::to_string(dev_loss) + " lr " + std::to_string(lr));
      if (dev_loss < best_dev) {
        best_dev = dev_loss;
        best_snapshot = snapshot_trainable(model.params());
        bad_evals = 0;
      } else {
        ++bad_evals;
        if (bad_evals >= cfg.early_stop_patience) {
          result.early_stopped = true;
          break;
        }
      }
    }
  }
  if (best_dev < std::numeric_limits<double>::infinity()) {
    restore_trainable(model.params(), best_snapshot);
    result.best_dev_loss = best_dev;
  } else {
    result.best_dev_loss = result.final_train_loss;
  }
  return result;
}

DaVocabulary vocab_from_corpus(const Corpus& corpus) {
  std::set<std::string> actions, slots;
  auto note = [&](const std::vector<Utterance>& utts) {
    for (const Utterance& u : utts) {
      DialogAct da = parse_da(u.da);
      actions.insert(da.action);
      slots.insert(da.slot);
    }
  };
  note(corpus.train);
  note(corpus.dev);
  return DaVocabulary(
      std::vector<std::string>(actions.begin(), actions.end()),
      std::vector<std::string>(slots.begin(), slots.end()));
}

}  // namespace

std::unique_ptr<ContextualModel> pretrain_stage1(const TrainConfig& cfg,
                                                 const Corpus& corpus,
                                                 TrainResult* result,
                                                 TrainLogger log) {
  if (cfg.stage != Stage::kPretrain)
    throw ConfigError("pretrain_stage1 requires stage=pretrain");
  if (corpus.train.empty())
    throw ContractError("pretrain: empty train split");
  ModelConfig mc = cfg.model;
  mc.fusion = cfg.fusion_mode;
  mc.has_adapter = false;
  mc.raw_feat_dim = corpus.spec.f_raw;
  mc.stack_left = corpus.spec.stack_left;
  mc.downsample = corpus.spec.downsample;
  auto model = std::make_unique<ContextualModel>(
      mc, vocab_from_corpus(corpus), cfg.seed);
  apply_freeze_mask(model->params(),
                    build_freeze_mask(model->params(), Stage::kPretrain,
                                      cfg.da_freeze_policy));
  EpochSampler sampler(corpus.train, cfg.seed);
  LoopConfig lc{cfg, ForwardOptions{/*use_bias=*/false,
                                    cfg.catalog_selection},
                /*use_schedule=*/true};
  TrainResult r = train_loop(*model, sampler, corpus.dev, lc, log);
  if (result) *result = r;
  return model;
}

std::unique_ptr<ContextualModel> adapt_stage2(const TrainConfig& cfg,
                                              const CheckpointData& stage1,
                                              const Corpus& corpus,
                                              TrainResult* result,
                                              TrainLogger log) {
  if (cfg.stage != Stage::kAdapt)
    throw ConfigError("adapt_stage2 requires stage=adapt");
  ModelConfig mc;
  try {
    mc = model_config_from_json(stage1.header.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad stage-1 checkpoint header: ") + e.what());
  }
  if (mc.has_adapter)
    throw ConfigError("stage-1 checkpoint already contains an adapter");
  // Adapter dimensions come from this run's config; everything else is
  // pinned by the stage-1 checkpoint.
  mc.has_adapter = true;
  mc.cat_embed_dim = cfg.model.cat_embed_dim;
  mc.cat_hidden = cfg.model.cat_hidden;
  mc.cat_dim = cfg.model.cat_dim;
  mc.attn_dim = cfg.model.attn_dim;
  mc.no_bias_row = cfg.model.no_bias_row;
  mc.max_catalog = cfg.model.max_catalog;
  auto model = std::make_unique<ContextualModel>(
      mc, da_vocab_from_checkpoint(stage1), cfg.seed);
  load_params_by_name(stage1, *model);
  apply_freeze_mask(model->params(),
                    build_freeze_mask(model->params(), Stage::kAdapt,
                                      cfg.da_freeze_policy));
  MixedSampler sampler(corpus.train, cfg.mix_user, cfg.mix_general, cfg.seed);
  LoopConfig lc{cfg, ForwardOptions{/*use_bias=*/true, cfg.catalog_selection},
                /*use_schedule=*/false};
  TrainResult r = train_loop(*model, sampler, corpus.dev, lc, log);
  if (result) *result = r;
  return model;
}

}  // namespace dabias

// dabias/trainer.h

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

#ifndef DABIAS_TRAINER_H_
#define DABIAS_TRAINER_H_

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dabias/checkpoint.h"
#include "dabias/config.h"
#include "dabias/corpus.h"
#include "dabias/model.h"

namespace dabias {

enum class Stage { kPretrain, kAdapt };
enum class DaPolicy { kFreeze, kUnfreeze };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);
const char* da_policy_name(DaPolicy p);
DaPolicy da_policy_from_name(const std::string& name);

// Learning-rate schedule: linear ramp start->peak over warmup_steps, flat
// for hold_steps, then exponential decay decay_rate^((step - warmup - hold)
// / decay_interval). lr_at(0) == start and lr_at(warmup_steps) == peak
// exactly.
struct LrSchedule {
  double start = 1e-4;
  double peak = 2e-3;
  int64_t warmup_steps = 300;
  int64_t hold_steps = 2000;
  double decay_rate = 0.99;
  int64_t decay_interval = 100;
};

double lr_at(int64_t step, const LrSchedule& s);

struct TrainConfig {
  Stage stage = Stage::kPretrain;
  FusionMode fusion_mode = FusionMode::kNone;
  DaPolicy da_freeze_policy = DaPolicy::kFreeze;
  bool catalog_selection = true;
  double mix_user = 1.5;     // user-specific share of the 1.5:1 mix
  double mix_general = 1.0;
  LrSchedule lr;
  double adapt_lr = 1e-3;
  int64_t batch_size = 8;
  int64_t max_steps = 1000;
  int64_t early_stop_patience = 5;
  int64_t eval_every = 50;
  double clip_norm = 5.0;
  uint64_t seed = 1;
  ModelConfig model;

  static TrainConfig from_config(const KeyValueConfig& kv);
};

// Set of parameter names the optimizer must not update.
using FreezeMask = std::set<std::string>;

// Stage-2 mask: all transducer parameters, plus the DA encoder and fusion
// networks iff the policy is freeze. Stage 1 freezes nothing.
FreezeMask build_freeze_mask(const ParamStore& params, Stage stage,
                             DaPolicy policy);
// Applies the mask to the trainable flags (the optimizer honors them).
void apply_freeze_mask(ParamStore& params, const FreezeMask& mask);

// Adam with bias correction; skips non-trainable parameters and parameters
// without gradients.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& params, double lr);
  int64_t steps_taken() const { return t_; }

 private:
  struct Slot {
    std::vector<double> m, v;
  };
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<Slot> slots_;
};

// Global-norm gradient clipping over trainable parameters; returns the norm
// before clipping.
double clip_gradients(ParamStore& params, double max_norm);

// Ratio-weighted sampling from two index pools; each pool cycles through a
// seeded shuffle and reshuffles per epoch. Deterministic per seed.
class MixSampler {
 public:
  MixSampler(int64_t user_count, int64_t general_count, double ratio_user,
             double ratio_general, uint64_t seed);

  struct Draw {
    bool user;
    int64_t index;
  };
  Draw next();

 private:
  int64_t next_from(std::vector<int64_t>& order, size_t& pos, Rng& rng);
  double p_user_;
  Rng pick_rng_;
  Rng user_rng_;
  Rng general_rng_;
  std::vector<int64_t> user_order_, general_order_;
  size_t user_pos_ = 0, general_pos_ = 0;
};

struct TrainResult {
  int64_t steps = 0;
  double first_loss = 0.0;
  double final_train_loss = 0.0;
  double best_dev_loss = 0.0;
  bool early_stopped = false;
};

using TrainLogger = std::function<void(const std::string&)>;

// Stage 1: train the (DA-aware) transducer on the train split; no catalogs.
std::unique_ptr<ContextualModel> pretrain_stage1(const TrainConfig& cfg,
                                                 const Corpus& corpus,
                                                 TrainResult* result = nullptr,
                                                 TrainLogger log = nullptr);

// Stage 2: extend the stage-1 checkpoint with the adapter and train catalog
// encoder + biasing network on the 1.5:1 mix with the transducer frozen;
// the DA encoder and fusion networks follow the freeze policy.
std::unique_ptr<ContextualModel> adapt_stage2(const TrainConfig& cfg,
                                              const CheckpointData& stage1,
                                              const Corpus& corpus,
                                              TrainResult* result = nullptr,
                                              TrainLogger log = nullptr);

// Mean transducer loss over a utterance list (forward only, parallel).
double mean_loss(const ContextualModel& model,
                 const std::vector<Utterance>& utts,
                 const ForwardOptions& opts, int threads = 0);

}  // namespace dabias

#endif  // DABIAS_TRAINER_H_

// dabias/checkpoint.h

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

#ifndef DABIAS_CHECKPOINT_H_
#define DABIAS_CHECKPOINT_H_

#include <memory>
#include <string>
#include <vector>

#include "dabias/model.h"
#include "json.hpp"

namespace dabias {

// Checkpoint file layout:
//   8-byte magic "DABIASCK"
//   u64 little-endian header length
//   header JSON (format version, step, seed, model dims, vocabularies,
//                parameter names/shapes/trainable flags in storage order)
//   per parameter, in header order: u64 LE count, count x f64 LE
// A save/load round trip is bitwise identical.
struct CheckpointData {
  nlohmann::ordered_json header;
  std::vector<std::pair<std::string, std::vector<double>>> arrays;

  int64_t step() const { return header.at("step").get<int64_t>(); }
  uint64_t seed() const { return header.at("seed").get<uint64_t>(); }
};

nlohmann::ordered_json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::ordered_json& j);

void save_checkpoint(const std::string& path, const ContextualModel& model,
                     int64_t step, uint64_t seed);

CheckpointData load_checkpoint(const std::string& path);

// Rebuilds the model exactly as described by the header; throws LoadError on
// any name or shape mismatch.
std::unique_ptr<ContextualModel> model_from_checkpoint(
    const CheckpointData& ckpt);

// Copies every stage-1 parameter (by name) into an adapter-extended model;
// shapes must match. Adapter parameters keep their fresh initialization.
void load_params_by_name(const CheckpointData& ckpt, ContextualModel& model);

DaVocabulary da_vocab_from_checkpoint(const CheckpointData& ckpt);

}  // namespace dabias

#endif  // DABIAS_CHECKPOINT_H_

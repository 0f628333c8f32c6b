// dabias/checkpoint.cc

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

#include "dabias/checkpoint.h"

#include <cstring>
#include <fstream>

#include "dabias/corpus.h"

namespace dabias {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'D', 'A', 'B', 'I', 'A', 'S', 'C', 'K'};
constexpr int kFormatVersion = 1;

void write_u64(std::ostream& out, uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i)
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

uint64_t read_u64(std::istream& in, const std::string& what) {
  char buf[8];
  in.read(buf, 8);
  if (!in) throw LoadError("checkpoint truncated while reading " + what);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

ordered_json model_config_to_json(const ModelConfig& cfg) {
  ordered_json j;
  j["raw_feat_dim"] = cfg.raw_feat_dim;
  j["stack_left"] = cfg.stack_left;
  j["downsample"] = cfg.downsample;
  j["enc_layers"] = cfg.enc_layers;
  j["enc_hidden"] = cfg.enc_hidden;
  j["audio_dim"] = cfg.audio_dim;
  j["pred_layers"] = cfg.pred_layers;
  j["pred_hidden"] = cfg.pred_hidden;
  j["token_embed_dim"] = cfg.token_embed_dim;
  j["joint_hidden"] = cfg.joint_hidden;
  j["vocab_size"] = cfg.vocab_size;
  j["fusion"] = fusion_mode_name(cfg.fusion);
  j["da_embed_dim"] = cfg.da_embed_dim;
  j["da_dim"] = cfg.da_dim;
  j["has_adapter"] = cfg.has_adapter;
  j["cat_embed_dim"] = cfg.cat_embed_dim;
  j["cat_hidden"] = cfg.cat_hidden;
  j["cat_dim"] = cfg.cat_dim;
  j["attn_dim"] = cfg.attn_dim;
  j["no_bias_row"] = cfg.no_bias_row;
  j["max_catalog"] = cfg.max_catalog;
  return j;
}

ModelConfig model_config_from_json(const ordered_json& j) {
  ModelConfig cfg;
  cfg.raw_feat_dim = j.at("raw_feat_dim").get<int64_t>();
  cfg.stack_left = j.at("stack_left").get<int64_t>();
  cfg.downsample = j.at("downsample").get<int64_t>();
  cfg.enc_layers = j.at("enc_layers").get<int64_t>();
  cfg.enc_hidden = j.at("enc_hidden").get<int64_t>();
  cfg.audio_dim = j.at("audio_dim").get<int64_t>();
  cfg.pred_layers = j.at("pred_layers").get<int64_t>();
  cfg.pred_hidden = j.at("pred_hidden").get<int64_t>();
  cfg.token_embed_dim = j.at("token_embed_dim").get<int64_t>();
  cfg.joint_hidden = j.at("joint_hidden").get<int64_t>();
  cfg.vocab_size = j.at("vocab_size").get<int64_t>();
  cfg.fusion = fusion_mode_from_name(j.at("fusion").get<std::string>());
  cfg.da_embed_dim = j.at("da_embed_dim").get<int64_t>();
  cfg.da_dim = j.at("da_dim").get<int64_t>();
  cfg.has_adapter = j.at("has_adapter").get<bool>();
  cfg.cat_embed_dim = j.at("cat_embed_dim").get<int64_t>();
  cfg.cat_hidden = j.at("cat_hidden").get<int64_t>();
  cfg.cat_dim = j.at("cat_dim").get<int64_t>();
  cfg.attn_dim = j.at("attn_dim").get<int64_t>();
  cfg.no_bias_row = j.at("no_bias_row").get<bool>();
  cfg.max_catalog = j.at("max_catalog").get<int64_t>();
  return cfg;
}

void save_checkpoint(const std::string& path, const ContextualModel& model,
                     int64_t step, uint64_t seed) {
  ordered_json header;
  header["format"] = "dabias-checkpoint";
  header["version"] = kFormatVersion;
  header["step"] = step;
  header["seed"] = seed;
  header["model"] = model_config_to_json(model.config());
  header["char_vocab"] = std::string(kCharset);
  header["da_actions"] = model.da_vocab().actions();
  header["da_slots"] = model.da_vocab().slots();
  ordered_json params = ordered_json::array();
  for (const Parameter& p : model.params().items()) {
    ordered_json pj;
    pj["name"] = p.name;
    pj["shape"] = p.tensor.shape();
    pj["trainable"] = p.trainable;
    params.push_back(pj);
  }
  header["params"] = params;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write checkpoint " + path);
  out.write(kMagic, 8);
  std::string hs = header.dump();
  write_u64(out, hs.size());
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const Parameter& p : model.params().items()) {
    const std::vector<double>& v = p.tensor.values();
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw LoadError("failed while writing checkpoint " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read checkpoint " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw LoadError(path + " is not a dabias checkpoint");
  uint64_t hlen = read_u64(in, "header length");
  std::string hs(hlen, '\0');
  in.read(hs.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw LoadError("checkpoint truncated while reading header");
  CheckpointData ckpt;
  try {
    ckpt.header = ordered_json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad checkpoint header: ") + e.what());
  }
  if (ckpt.header.value("format", "") != "dabias-checkpoint")
    throw LoadError(path + " has an unexpected header format");
  if (ckpt.header.value("version", -1) != kFormatVersion)
    throw LoadError(path + " has unsupported checkpoint version");
  for (const auto& pj : ckpt.header.at("params")) {
    std::string name = pj.at("name").get<std::string>();
    uint64_t count = read_u64(in, "array length of " + name);
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in)
      throw LoadError("checkpoint truncated while reading values of " + name);
    ckpt.arrays.emplace_back(std::move(name), std::move(v));
  }
  return ckpt;
}

DaVocabulary da_vocab_from_checkpoint(const CheckpointData& ckpt) {
  return DaVocabulary(
      ckpt.header.at("da_actions").get<std::vector<std::string>>(),
      ckpt.header.at("da_slots").get<std::vector<std::string>>());
}

void load_params_by_name(const CheckpointData& ckpt, ContextualModel& model) {
  for (const auto& [name, values] : ckpt.arrays) {
    Parameter* p = model.params().find(name);
    if (!p)
      throw LoadError("checkpoint parameter " + name +
                      " does not exist in the target model");
    if (p->tensor.values().size() != values.size())
      throw LoadError("checkpoint parameter " + name + " has " +
                      std::to_string(values.size()) +
                      " values but the model expects " +
                      std::to_string(p->tensor.values().size()));
    p->tensor.values() = values;
  }
}

std::unique_ptr<ContextualModel> model_from_checkpoint(
    const CheckpointData& ckpt) {
  ModelConfig cfg;
  DaVocabulary vocab;
  try {
    cfg = model_config_from_json(ckpt.header.at("model"));
    vocab = da_vocab_from_checkpoint(ckpt);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad checkpoint header: ") + e.what());
  }
  auto model =
      std::make_unique<ContextualModel>(cfg, vocab, ckpt.seed());
  if (model->params().size() != ckpt.arrays.size())
    throw LoadError("checkpoint lists " + std::to_string(ckpt.arrays.size()) +
                    " parameters but the model has " +
                    std::to_string(model->params().size()));
  load_params_by_name(ckpt, *model);
  // Restore the stored trainable flags.
  for (const auto& pj : ckpt.header.at("params")) {
    Parameter* p = model->params().find(pj.at("name").get<std::string>());
    if (p) p->trainable = pj.at("trainable").get<bool>();
  }
  return model;
}

}  // namespace dabias

// dabias/config.cc

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

#include "dabias/config.h"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dabias {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not key=value: \"" + t + "\"");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        " has an empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int64_t KeyValueConfig::get_int64(const std::string& key,
                                  int64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    int64_t v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects an integer, got \"" +
                      it->second + "\"");
  }
}

uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                    uint64_t fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    uint64_t v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key +
                      " expects an unsigned integer, got \"" + it->second +
                      "\"");
  }
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects a number, got \"" +
                      it->second + "\"");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " expects a boolean, got \"" + v +
                    "\"");
}

std::pair<double, double> KeyValueConfig::get_ratio(const std::string& key,
                                                    double fa,
                                                    double fb) const {
  auto it = values_.find(key);
  if (it == values_.end()) return {fa, fb};
  const std::string& v = it->second;
  size_t colon = v.find(':');
  if (colon == std::string::npos)
    throw ConfigError("config key " + key + " expects a:b, got \"" + v +
                      "\"");
  try {
    double a = std::stod(v.substr(0, colon));
    double b = std::stod(v.substr(colon + 1));
    if (a < 0 || b < 0 || (a == 0 && b == 0))
      throw std::invalid_argument("");
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " expects a ratio a:b, got \"" +
                      v + "\"");
  }
}

void KeyValueConfig::check_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_)
    if (!known.count(key))
      throw ConfigError("unknown config key: " + key);
}

const std::set<std::string>& all_known_config_keys() {
  static const std::set<std::string> keys = {
      // corpus spec
      "seed", "train_utterances", "dev_utterances", "test_utterances",
      "user_fraction", "catalog_contacts", "catalog_devices",
      "catalog_locations", "entity_min_len", "entity_max_len",
      "carrier_grammar", "frames_per_token", "noise_sigma", "f_raw",
      "stack_left", "downsample", "proto_confusability",
      "confusable_group_size",
      // training
      "stage", "fusion_mode", "da_freeze_policy", "catalog_selection",
      "mix_ratio", "lr_start", "lr_peak", "warmup_steps", "hold_steps",
      "decay_rate", "decay_interval", "adapt_lr", "batch_size", "max_steps",
      "early_stop_patience", "eval_every", "clip_norm",
      // model dims
      "enc_layers", "enc_hidden", "audio_dim", "pred_layers", "pred_hidden",
      "token_embed_dim", "joint_hidden", "vocab_size", "da_embed_dim",
      "da_dim", "cat_embed_dim", "cat_hidden", "cat_dim", "attn_dim",
      "no_bias_row", "max_catalog",
  };
  return keys;
}

}  // namespace dabias

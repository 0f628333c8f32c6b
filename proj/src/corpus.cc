// dabias/corpus.cc

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

#include "dabias/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "dabias/base64.h"
#include "dabias/rng.h"
#include "json.hpp"

namespace dabias {

using ordered_json = nlohmann::ordered_json;

// ---- characters ----

int char_to_id(char c) {
  if (c >= 'a' && c <= 'z') return c - 'a';
  if (c == ' ') return 26;
  throw IndexError(std::string("character '") + c +
                   "' outside the corpus charset");
}

char id_to_char(int id) {
  if (id < 0 || id >= kCharVocab)
    throw IndexError("character id " + std::to_string(id) +
                     " outside the corpus charset");
  return kCharset[id];
}

std::vector<int> tokenize(const std::string& text) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (char c : text) ids.push_back(char_to_id(c));
  return ids;
}

std::string detokenize(const std::vector<int>& tokens) {
  std::string s;
  s.reserve(tokens.size());
  for (int id : tokens) s.push_back(id_to_char(id));
  return s;
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

// ---- Utterance ----

bool Utterance::has_tag(const std::string& t) const {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

const CatalogEntity* Utterance::correct_entity() const {
  if (slots.empty()) return nullptr;
  const SlotSpan& span = slots.front();
  std::vector<std::string> ws = words();
  std::string surface;
  for (int i = span.start; i < span.end && i < static_cast<int>(ws.size());
       ++i) {
    if (!surface.empty()) surface += " ";
    surface += ws[i];
  }
  for (const CatalogEntity& e : catalog.by_type(span.type))
    if (e.text == surface) return &e;
  return nullptr;
}

// ---- FeatureSynth ----

FeatureSynth::FeatureSynth(const CorpusSpec& spec)
    : f_raw_(spec.f_raw),
      frames_per_token_(spec.frames_per_token),
      noise_sigma_(spec.noise_sigma) {
  Rng rng(derive_seed(spec.seed, "prototypes"));
  int64_t groups =
      (kCharVocab + spec.confusable_group_size - 1) / spec.confusable_group_size;
  auto unit = [&]() {
    std::vector<double> v(f_raw_);
    double norm2 = 0.0;
    for (double& x : v) {
      x = rng.gaussian();
      norm2 += x * x;
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
  };
  std::vector<std::vector<double>> bases;
  bases.reserve(groups);
  for (int64_t g = 0; g < groups; ++g) bases.push_back(unit());
  prototypes_.reserve(kCharVocab);
  for (int c = 0; c < kCharVocab; ++c) {
    std::vector<double> dev = unit();
    const std::vector<double>& base = bases[c / spec.confusable_group_size];
    std::vector<double> p(f_raw_);
    double norm2 = 0.0;
    for (int64_t i = 0; i < f_raw_; ++i) {
      p[i] = base[i] + spec.proto_confusability * dev[i];
      norm2 += p[i] * p[i];
    }
    double inv = 1.0 / std::sqrt(norm2);
    for (double& x : p) x *= inv;
    prototypes_.push_back(std::move(p));
  }
}

std::vector<double> FeatureSynth::frames(const std::vector<int>& tokens,
                                         Rng& rng) const {
  if (tokens.empty())
    throw ContractError("synth_features: empty token sequence");
  std::vector<double> out;
  out.reserve(tokens.size() * frames_per_token_ * f_raw_);
  for (int tok : tokens) {
    if (tok < 0 || tok >= kCharVocab)
      throw IndexError("synth_features: token id " + std::to_string(tok) +
                       " outside the charset");
    const std::vector<double>& proto = prototypes_[tok];
    for (int64_t r = 0; r < frames_per_token_; ++r)
      for (int64_t i = 0; i < f_raw_; ++i)
        out.push_back(proto[i] + noise_sigma_ * rng.gaussian());
  }
  return out;
}

int FeatureSynth::classify(const double* frame) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kCharVocab; ++c) {
    double d = 0.0;
    for (int64_t i = 0; i < f_raw_; ++i) {
      double diff = frame[i] - prototypes_[c][i];
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// ---- stacking ----

std::vector<double> stack_downsample(const std::vector<double>& raw,
                                     int64_t t_raw, int64_t f_raw,
                                     int64_t stack_left, int64_t downsample,
                                     int64_t* t_out) {
  if (t_raw < 1) throw DimensionError("stack_downsample: need t_raw >= 1");
  if (static_cast<int64_t>(raw.size()) != t_raw * f_raw)
    throw DimensionError("stack_downsample: frame buffer size mismatch");
  int64_t t_len = (t_raw + downsample - 1) / downsample;
  int64_t width = stack_left + 1;
  std::vector<double> out(static_cast<size_t>(t_len * width * f_raw), 0.0);
  for (int64_t j = 0; j < t_len; ++j) {
    for (int64_t s = 0; s < width; ++s) {
      int64_t src = downsample * j - stack_left + s;
      if (src < 0 || src >= t_raw) continue;  // zero padding
      std::copy(raw.begin() + src * f_raw, raw.begin() + (src + 1) * f_raw,
                out.begin() + (j * width + s) * f_raw);
    }
  }
  if (t_out) *t_out = t_len;
  return out;
}

Tensor stacked_features(const Utterance& utt, const CorpusSpec& spec) {
  int64_t t_len = 0;
  std::vector<double> stacked =
      stack_downsample(utt.raw_frames, utt.t_raw, utt.f_raw, spec.stack_left,
                       spec.downsample, &t_len);
  return Tensor::from_values({t_len, spec.stacked_dim()}, std::move(stacked));
}

// ---- generation ----

namespace {

struct Grammar {
  // {0} is replaced by the entity text; spans are derived from the word
  // position of {0} within the template.
  std::vector<std::string> turn1_contact{"call {0}", "drop in on {0}"};
  std::vector<std::string> turn1_device{"turn on {0}", "switch on {0}"};
  std::vector<std::string> turn1_location{"lights in {0}", "lights on in {0}"};
  std::vector<std::string> turn2{"i said {0}", "i meant {0}"};
  std::vector<std::string> turn3{"yes {0}", "okay yes {0}"};
  std::vector<std::string> general{
      "what time is it", "play some music", "stop the music", "good morning",
      "set a timer",     "next song",       "volume up",      "volume down",
      "pause",           "resume",          "tell me a joke", "weather today",
  };
};

const Grammar& grammar_for(const std::string& id) {
  static Grammar def;
  if (id != "default")
    throw ConfigError("unknown carrier grammar: " + id);
  return def;
}

std::string random_word(Rng& rng, const CorpusSpec& spec) {
  int64_t len =
      spec.entity_min_len +
      rng.uniform_int(spec.entity_max_len - spec.entity_min_len + 1);
  std::string w;
  for (int64_t i = 0; i < len; ++i)
    w.push_back(static_cast<char>('a' + rng.uniform_int(26)));
  return w;
}

std::string random_entity_text(Rng& rng, const CorpusSpec& spec,
                               CatalogType type) {
  int words = 1;
  if (type == CatalogType::kContactName)
    words = 2;
  else if (type == CatalogType::kDeviceName)
    words = 1 + static_cast<int>(rng.uniform_int(2));
  std::string text;
  for (int i = 0; i < words; ++i) {
    if (i) text += " ";
    text += random_word(rng, spec);
  }
  return text;
}

CatalogSet random_catalog(Rng& rng, const CorpusSpec& spec) {
  CatalogSet cat;
  auto fill = [&](std::vector<CatalogEntity>& list, CatalogType type,
                  int64_t count) {
    for (int64_t i = 0; i < count; ++i) {
      CatalogEntity e;
      e.type = type;
      e.text = random_entity_text(rng, spec, type);
      e.tokens = tokenize(e.text);
      list.push_back(std::move(e));
    }
  };
  fill(cat.contact_names, CatalogType::kContactName, spec.catalog_contacts);
  fill(cat.device_names, CatalogType::kDeviceName, spec.catalog_devices);
  fill(cat.device_locations, CatalogType::kDeviceLocation,
       spec.catalog_locations);
  return cat;
}

const char* slot_for_type(CatalogType t) {
  switch (t) {
    case CatalogType::kContactName:
      return kSlotProperName;
    case CatalogType::kDeviceName:
      return kSlotDeviceName;
    case CatalogType::kDeviceLocation:
      return kSlotDeviceLocation;
  }
  return "?";
}

// Fills transcript-derived fields from a template instantiated with the
// entity; the slot span covers the entity words.
void apply_template(Utterance& utt, const std::string& tmpl,
                    const CatalogEntity* entity) {
  std::string text = tmpl;
  size_t pos = text.find("{0}");
  if (entity) {
    if (pos == std::string::npos)
      throw ContractError("template without entity hole: " + tmpl);
    std::string prefix = text.substr(0, pos);
    text = prefix + entity->text + text.substr(pos + 3);
    int start_word = static_cast<int>(split_words(prefix).size());
    int entity_words = static_cast<int>(split_words(entity->text).size());
    utt.slots.push_back(
        {start_word, start_word + entity_words, entity->type});
  }
  utt.tokens = tokenize(text);
}

void synth_utterance_frames(Utterance& utt, const FeatureSynth& synth,
                            Rng& rng, const CorpusSpec& spec) {
  utt.raw_frames = synth.frames(utt.tokens, rng);
  utt.t_raw = static_cast<int64_t>(utt.tokens.size()) * spec.frames_per_token;
  utt.f_raw = spec.f_raw;
}

std::vector<Utterance> generate_split(const CorpusSpec& spec,
                                      const FeatureSynth& synth,
                                      const std::string& split_name,
                                      int64_t count) {
  const Grammar& g = grammar_for(spec.carrier_grammar);
  int64_t sessions =
      static_cast<int64_t>(std::floor(count * spec.user_fraction / 3.0));
  int64_t generals = count - sessions * 3;
  std::vector<Utterance> utts;
  utts.reserve(count);

  for (int64_t s = 0; s < sessions; ++s) {
    Rng rng(derive_seed(spec.seed, "session/" + split_name, s));
    CatalogSet catalog = random_catalog(rng, spec);
    CatalogType type = static_cast<CatalogType>(rng.uniform_int(3));
    const std::vector<CatalogEntity>& pool = catalog.by_type(type);
    const CatalogEntity& correct = pool[rng.uniform_int(pool.size())];
    const std::vector<std::string>* turn1 = nullptr;
    switch (type) {
      case CatalogType::kContactName:
        turn1 = &g.turn1_contact;
        break;
      case CatalogType::kDeviceName:
        turn1 = &g.turn1_device;
        break;
      case CatalogType::kDeviceLocation:
        turn1 = &g.turn1_location;
        break;
    }
    for (int turn = 1; turn <= 3; ++turn) {
      Utterance u;
      u.turn = turn;
      u.catalog = catalog;
      if (turn == 1) {
        u.da = default_dialog_act().str();
        apply_template(u, (*turn1)[rng.uniform_int(turn1->size())], &correct);
        u.tags = {kTagUserSpecific, kTagDefaultDa, kTagTurn1};
      } else if (turn == 2) {
        u.da = DialogAct{"SlotValueElicitation", slot_for_type(type)}.str();
        apply_template(u, g.turn2[rng.uniform_int(g.turn2.size())], &correct);
        u.tags = {kTagUserSpecific, kTagNonDefaultDa, kTagTurn2};
      } else {
        u.da = DialogAct{"Confirmation", slot_for_type(type)}.str();
        apply_template(u, g.turn3[rng.uniform_int(g.turn3.size())], &correct);
        u.tags = {kTagUserSpecific, kTagNonDefaultDa, kTagTurn3};
      }
      synth_utterance_frames(u, synth, rng, spec);
      utts.push_back(std::move(u));
    }
  }
  for (int64_t i = 0; i < generals; ++i) {
    Rng rng(derive_seed(spec.seed, "general/" + split_name, i));
    Utterance u;
    u.turn = 1;
    u.da = default_dialog_act().str();
    u.catalog = random_catalog(rng, spec);
    apply_template(u, g.general[rng.uniform_int(g.general.size())], nullptr);
    u.tags = {kTagGeneral};
    synth_utterance_frames(u, synth, rng, spec);
    utts.push_back(std::move(u));
  }

  Rng order_rng(derive_seed(spec.seed, "order/" + split_name));
  order_rng.shuffle(utts);
  for (size_t i = 0; i < utts.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%05zu", split_name.c_str(), i);
    utts[i].id = buf;
  }
  return utts;
}

}  // namespace

Corpus generate_corpus(const CorpusSpec& spec) {
  if (spec.entity_min_len < 1 || spec.entity_max_len < spec.entity_min_len)
    throw ConfigError("bad entity length range");
  if (spec.catalog_contacts < 1 || spec.catalog_devices < 1 ||
      spec.catalog_locations < 1)
    throw ConfigError("catalog sizes must be positive: a catalog must hold "
                      "the correct entity plus distractors");
  if (spec.frames_per_token < 1)
    throw ConfigError("frames_per_token must be >= 1");
  Corpus corpus;
  corpus.spec = spec;
  FeatureSynth synth(spec);
  corpus.train = generate_split(spec, synth, "train", spec.train_utterances);
  corpus.dev = generate_split(spec, synth, "dev", spec.dev_utterances);
  corpus.test = generate_split(spec, synth, "test", spec.test_utterances);
  return corpus;
}

SplitSets build_splits(const std::vector<Utterance>& test) {
  SplitSets sets;
  const char* names[] = {kTagUserSpecific, kTagGeneral,  kTagDefaultDa,
                         kTagNonDefaultDa, kTagTurn1,    kTagTurn2,
                         kTagTurn3};
  for (const char* name : names) sets.by_name[name] = {};
  for (const Utterance& u : test)
    for (const char* name : names)
      if (u.has_tag(name)) sets.by_name[name].push_back(&u);
  return sets;
}

// ---- IO ----

std::string doubles_to_base64(const std::vector<double>& v) {
  std::vector<uint8_t> bytes(v.size() * 8);
  for (size_t i = 0; i < v.size(); ++i) {
    uint64_t bits;
    std::memcpy(&bits, &v[i], 8);
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + b] = static_cast<uint8_t>((bits >> (8 * b)) & 0xff);
  }
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> base64_to_doubles(const std::string& s) {
  std::vector<uint8_t> bytes = base64_decode(s);
  if (bytes.size() % 8 != 0)
    throw ParseError("base64 payload is not a multiple of 8 bytes");
  std::vector<double> v(bytes.size() / 8);
  for (size_t i = 0; i < v.size(); ++i) {
    uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<uint64_t>(bytes[i * 8 + b]) << (8 * b);
    std::memcpy(&v[i], &bits, 8);
  }
  return v;
}

std::string utterance_to_json_line(const Utterance& utt) {
  ordered_json j;
  j["id"] = utt.id;
  j["tokens"] = utt.tokens;
  j["frames_b64"] = doubles_to_base64(utt.raw_frames);
  j["frames_shape"] = {utt.t_raw, utt.f_raw};
  j["da"] = utt.da;
  j["turn"] = utt.turn;
  ordered_json slots = ordered_json::array();
  for (const SlotSpan& s : utt.slots) {
    ordered_json js;
    js["start"] = s.start;
    js["end"] = s.end;
    js["type"] = catalog_type_name(s.type);
    slots.push_back(js);
  }
  j["slots"] = slots;
  ordered_json cat;
  for (CatalogType t : {CatalogType::kContactName, CatalogType::kDeviceName,
                        CatalogType::kDeviceLocation}) {
    ordered_json list = ordered_json::array();
    for (const CatalogEntity& e : utt.catalog.by_type(t)) list.push_back(e.text);
    cat[catalog_type_name(t)] = list;
  }
  j["catalog"] = cat;
  j["tags"] = utt.tags;
  return j.dump();
}

Utterance utterance_from_json_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad corpus line: ") + e.what());
  }
  Utterance u;
  try {
    u.id = j.at("id").get<std::string>();
    u.tokens = j.at("tokens").get<std::vector<int>>();
    u.raw_frames = base64_to_doubles(j.at("frames_b64").get<std::string>());
    auto shape = j.at("frames_shape").get<std::vector<int64_t>>();
    if (shape.size() != 2)
      throw ParseError("frames_shape must have two entries");
    u.t_raw = shape[0];
    u.f_raw = shape[1];
    if (static_cast<int64_t>(u.raw_frames.size()) != u.t_raw * u.f_raw)
      throw ParseError("frames_b64 length does not match frames_shape");
    u.da = j.at("da").get<std::string>();
    u.turn = j.at("turn").get<int>();
    for (const auto& js : j.at("slots")) {
      SlotSpan s;
      s.start = js.at("start").get<int>();
      s.end = js.at("end").get<int>();
      s.type = catalog_type_from_name(js.at("type").get<std::string>());
      u.slots.push_back(s);
    }
    const auto& cat = j.at("catalog");
    for (CatalogType t : {CatalogType::kContactName, CatalogType::kDeviceName,
                          CatalogType::kDeviceLocation}) {
      for (const auto& text : cat.at(catalog_type_name(t))) {
        CatalogEntity e;
        e.type = t;
        e.text = text.get<std::string>();
        e.tokens = tokenize(e.text);
        u.catalog.by_type(t).push_back(std::move(e));
      }
    }
    u.tags = j.at("tags").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad corpus line: ") + e.what());
  }
  return u;
}

namespace {

void save_split(const std::string& path, const std::vector<Utterance>& utts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path);
  for (const Utterance& u : utts) out << utterance_to_json_line(u) << "\n";
}

std::vector<Utterance> load_split(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path);
  std::vector<Utterance> utts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    utts.push_back(utterance_from_json_line(line));
  }
  return utts;
}

ordered_json spec_to_json(const CorpusSpec& s) {
  ordered_json j;
  j["seed"] = s.seed;
  j["train_utterances"] = s.train_utterances;
  j["dev_utterances"] = s.dev_utterances;
  j["test_utterances"] = s.test_utterances;
  j["user_fraction"] = s.user_fraction;
  j["catalog_contacts"] = s.catalog_contacts;
  j["catalog_devices"] = s.catalog_devices;
  j["catalog_locations"] = s.catalog_locations;
  j["entity_min_len"] = s.entity_min_len;
  j["entity_max_len"] = s.entity_max_len;
  j["carrier_grammar"] = s.carrier_grammar;
  j["frames_per_token"] = s.frames_per_token;
  j["noise_sigma"] = s.noise_sigma;
  j["f_raw"] = s.f_raw;
  j["stack_left"] = s.stack_left;
  j["downsample"] = s.downsample;
  j["proto_confusability"] = s.proto_confusability;
  j["confusable_group_size"] = s.confusable_group_size;
  return j;
}

CorpusSpec spec_from_json(const ordered_json& j) {
  CorpusSpec s;
  s.seed = j.at("seed").get<uint64_t>();
  s.train_utterances = j.at("train_utterances").get<int64_t>();
  s.dev_utterances = j.at("dev_utterances").get<int64_t>();
  s.test_utterances = j.at("test_utterances").get<int64_t>();
  s.user_fraction = j.at("user_fraction").get<double>();
  s.catalog_contacts = j.at("catalog_contacts").get<int64_t>();
  s.catalog_devices = j.at("catalog_devices").get<int64_t>();
  s.catalog_locations = j.at("catalog_locations").get<int64_t>();
  s.entity_min_len = j.at("entity_min_len").get<int64_t>();
  s.entity_max_len = j.at("entity_max_len").get<int64_t>();
  s.carrier_grammar = j.at("carrier_grammar").get<std::string>();
  s.frames_per_token = j.at("frames_per_token").get<int64_t>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.f_raw = j.at("f_raw").get<int64_t>();
  s.stack_left = j.at("stack_left").get<int64_t>();
  s.downsample = j.at("downsample").get<int64_t>();
  s.proto_confusability = j.at("proto_confusability").get<double>();
  s.confusable_group_size = j.at("confusable_group_size").get<int64_t>();
  return s;
}

}  // namespace

void save_corpus(const std::string& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  save_split(dir + "/train.jsonl", corpus.train);
  save_split(dir + "/dev.jsonl", corpus.dev);
  save_split(dir + "/test.jsonl", corpus.test);
  ordered_json manifest;
  manifest["format"] = "dabias-corpus";
  manifest["version"] = 1;
  manifest["spec"] = spec_to_json(corpus.spec);
  ordered_json splits;
  splits["train"] = {{"file", "train.jsonl"},
                     {"utterances", corpus.train.size()}};
  splits["dev"] = {{"file", "dev.jsonl"}, {"utterances", corpus.dev.size()}};
  splits["test"] = {{"file", "test.jsonl"},
                    {"utterances", corpus.test.size()}};
  manifest["splits"] = splits;
  std::ofstream out(dir + "/manifest.json", std::ios::binary);
  if (!out) throw LoadError("cannot write " + dir + "/manifest.json");
  out << manifest.dump(2) << "\n";
}

Corpus load_corpus(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json", std::ios::binary);
  if (!in) throw LoadError("cannot read " + dir + "/manifest.json");
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad corpus manifest: ") + e.what());
  }
  Corpus corpus;
  try {
    corpus.spec = spec_from_json(manifest.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("bad corpus manifest: ") + e.what());
  }
  corpus.train = load_split(dir + "/train.jsonl");
  corpus.dev = load_split(dir + "/dev.jsonl");
  corpus.test = load_split(dir + "/test.jsonl");
  return corpus;
}

}  // namespace dabias

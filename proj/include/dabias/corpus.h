// dabias/corpus.h

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

#ifndef DABIAS_CORPUS_H_
#define DABIAS_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dabias/catalog.h"
#include "dabias/tensor.h"

namespace dabias {

// ---- character tokenization ----
// 26 letters plus space; the model vocabulary keeps headroom above these.
constexpr int kCharVocab = 27;
inline const char* kCharset = "abcdefghijklmnopqrstuvwxyz ";

int char_to_id(char c);
char id_to_char(int id);
std::vector<int> tokenize(const std::string& text);
std::string detokenize(const std::vector<int>& tokens);
std::vector<std::string> split_words(const std::string& text);

// ---- corpus data model ----

// Word-index span [start, end) of the transcript covered by one entity.
struct SlotSpan {
  int start = 0;
  int end = 0;
  CatalogType type = CatalogType::kContactName;
};

// Split tag names used in the JSON-lines files.
inline const char* kTagUserSpecific = "user_specific";
inline const char* kTagGeneral = "general";
inline const char* kTagDefaultDa = "default_da";
inline const char* kTagNonDefaultDa = "non_default_da";
inline const char* kTagTurn1 = "turn1";
inline const char* kTagTurn2 = "turn2";
inline const char* kTagTurn3 = "turn3";

struct Utterance {
  std::string id;
  std::vector<int> tokens;          // character ids of the transcript
  std::vector<double> raw_frames;   // [t_raw x f_raw], row-major
  int64_t t_raw = 0;
  int64_t f_raw = 0;
  std::string da;                   // verbatim "Action(Slot)"
  int turn = 1;
  std::vector<SlotSpan> slots;
  CatalogSet catalog;
  std::vector<std::string> tags;

  bool has_tag(const std::string& t) const;
  std::string text() const { return detokenize(tokens); }
  std::vector<std::string> words() const { return split_words(text()); }
  // The catalog entity referenced by the first slot span, when any.
  const CatalogEntity* correct_entity() const;
};

struct CorpusSpec {
  uint64_t seed = 1;
  // counts per split (utterances)
  int64_t train_utterances = 400;
  int64_t dev_utterances = 100;
  int64_t test_utterances = 300;
  double user_fraction = 0.6;  // share of session (user-specific) utterances
  // catalog sizes per type
  int64_t catalog_contacts = 20;
  int64_t catalog_devices = 20;
  int64_t catalog_locations = 20;
  // entity word-length distribution (letters per word, inclusive)
  int64_t entity_min_len = 3;
  int64_t entity_max_len = 7;
  std::string carrier_grammar = "default";
  int64_t frames_per_token = 3;
  double noise_sigma = 0.3;
  int64_t f_raw = 64;
  int64_t stack_left = 2;
  int64_t downsample = 3;
  // prototype confusability: characters within a group differ by this
  // relative offset from a shared base direction
  double proto_confusability = 0.35;
  int64_t confusable_group_size = 3;

  int64_t stacked_dim() const { return f_raw * (stack_left + 1); }
};

struct Corpus {
  CorpusSpec spec;
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
  std::vector<Utterance> test;
};

// ---- feature synthesis ----

// Per-character unit-norm prototype vectors, deterministically derived from
// the corpus seed. Characters come in confusable groups: group members share
// a base direction and differ only by a scaled per-character offset.
class FeatureSynth {
 public:
  explicit FeatureSynth(const CorpusSpec& spec);

  // Frames for a token sequence: frames_per_token noisy copies of each
  // token's prototype. rng drives the noise only.
  std::vector<double> frames(const std::vector<int>& tokens, Rng& rng) const;

  const std::vector<double>& prototype(int token) const {
    return prototypes_[token];
  }
  // Nearest-prototype classification of one frame (test oracle support).
  int classify(const double* frame) const;

  int64_t f_raw() const { return f_raw_; }
  int64_t frames_per_token() const { return frames_per_token_; }

 private:
  int64_t f_raw_;
  int64_t frames_per_token_;
  double noise_sigma_;
  std::vector<std::vector<double>> prototypes_;  // [kCharVocab][f_raw]
};

// Frame stacking + downsampling: output frame j is the concatenation of raw
// frames (downsample*j - stack_left) .. (downsample*j) in left-to-current
// order, zero-padded where the index is out of range. Output has
// ceil(t_raw / downsample) frames of f_raw * (stack_left + 1) dims.
std::vector<double> stack_downsample(const std::vector<double>& raw,
                                     int64_t t_raw, int64_t f_raw,
                                     int64_t stack_left, int64_t downsample,
                                     int64_t* t_out);

// Stacked features of an utterance as a [T x F] tensor.
Tensor stacked_features(const Utterance& utt, const CorpusSpec& spec);

// ---- generation and splits ----

Corpus generate_corpus(const CorpusSpec& spec);

// Tag-based views over the test partition.
struct SplitSets {
  std::map<std::string, std::vector<const Utterance*>> by_name;
};
SplitSets build_splits(const std::vector<Utterance>& test);

// ---- JSON-lines IO ----
// One utterance per line; field names: id, tokens, frames_b64, frames_shape,
// da, turn, slots, catalog, tags. A manifest.json next to the three split
// files echoes the CorpusSpec.

void save_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(const std::string& dir);

std::string utterance_to_json_line(const Utterance& utt);
Utterance utterance_from_json_line(const std::string& line);

}  // namespace dabias

#endif  // DABIAS_CORPUS_H_

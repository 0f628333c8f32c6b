// dabias/metrics.h

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

#ifndef DABIAS_METRICS_H_
#define DABIAS_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dabias/corpus.h"
#include "dabias/model.h"
#include "json.hpp"

namespace dabias {

struct WerStats {
  int64_t sub = 0;
  int64_t ins = 0;
  int64_t del = 0;
  int64_t ref_len = 0;

  int64_t errors() const { return sub + ins + del; }
  double wer() const;  // errors / ref_len; throws on ref_len == 0
  bool defined() const { return ref_len > 0; }
  WerStats& operator+=(const WerStats& o);
};

enum class EditOp { kMatch, kSub, kIns, kDel };

// Minimal-edit alignment with unit costs and deterministic tie-breaking:
// on equal cost the backtrace prefers substitution (or match) over
// insertion over deletion. Insertions consume hypothesis tokens only.
std::vector<EditOp> align_tokens(const std::vector<std::string>& ref,
                                 const std::vector<std::string>& hyp);

// Throws ContractError on an empty reference (WER undefined).
WerStats wer(const std::vector<std::string>& ref,
             const std::vector<std::string>& hyp);

// 100 * (wer_baseline - wer_model) / wer_baseline; negative for
// degradations. Throws ContractError on a zero baseline.
double werr_pct(double wer_baseline, double wer_model);

// Scores only reference positions inside the spans (word indices): matches,
// substitutions and deletions at those positions; insertions are attributed
// to a span only when they fall strictly inside its aligned region.
std::map<CatalogType, WerStats> slot_wer(const std::vector<std::string>& ref,
                                         const std::vector<std::string>& hyp,
                                         const std::vector<SlotSpan>& spans);

struct ReportRow {
  std::string split;
  std::string metric;
  std::optional<double> model_wer;
  std::optional<double> baseline_wer;
  std::optional<double> werr;  // percent
  int64_t n_utterances = 0;
  int64_t n_ref_tokens = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  nlohmann::ordered_json meta;  // config echo, seeds, checkpoint paths

  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
  const ReportRow* find(const std::string& split,
                        const std::string& metric) const;
};

// Decodes both models over the test set (utterance-parallel; threads == 0
// means all cores) and aggregates WER/WERR per split, slot type and turn,
// plus the cross-turn WERR mean. Empty splits are omitted with a warning on
// stderr.
EvalReport evaluate_models(const ContextualModel& model,
                           const ForwardOptions& model_opts,
                           const ContextualModel& baseline,
                           const ForwardOptions& baseline_opts,
                           const std::vector<Utterance>& test,
                           int threads = 0);

// Reads DA_BIAS_THREADS (a positive integer) if set; 0 otherwise.
int eval_threads_from_env();

}  // namespace dabias

#endif  // DABIAS_METRICS_H_

// dabias/metrics.cc

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

#include "dabias/metrics.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dabias {

using ordered_json = nlohmann::ordered_json;

double WerStats::wer() const {
  if (ref_len <= 0)
    throw ContractError("WER undefined: empty reference");
  return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

WerStats& WerStats::operator+=(const WerStats& o) {
  sub += o.sub;
  ins += o.ins;
  del += o.del;
  ref_len += o.ref_len;
  return *this;
}

std::vector<EditOp> align_tokens(const std::vector<std::string>& ref,
                                 const std::vector<std::string>& hyp) {
  size_t n = ref.size(), m = hyp.size();
  std::vector<int> cost((n + 1) * (m + 1), 0);
  auto c = [&](size_t i, size_t j) -> int& { return cost[i * (m + 1) + j]; };
  for (size_t i = 0; i <= n; ++i) c(i, 0) = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) c(0, j) = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j) {
      int diag = c(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      int ins = c(i, j - 1) + 1;
      int del = c(i - 1, j) + 1;
      c(i, j) = std::min(diag, std::min(ins, del));
    }
  std::vector<EditOp> ops;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        c(i, j) == c(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      ops.push_back(ref[i - 1] == hyp[j - 1] ? EditOp::kMatch : EditOp::kSub);
      --i;
      --j;
    } else if (j > 0 && c(i, j) == c(i, j - 1) + 1) {
      ops.push_back(EditOp::kIns);
      --j;
    } else {
      ops.push_back(EditOp::kDel);
      --i;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

WerStats wer(const std::vector<std::string>& ref,
             const std::vector<std::string>& hyp) {
  if (ref.empty())
    throw ContractError("WER undefined: empty reference");
  WerStats stats;
  stats.ref_len = static_cast<int64_t>(ref.size());
  for (EditOp op : align_tokens(ref, hyp)) {
    if (op == EditOp::kSub) ++stats.sub;
    if (op == EditOp::kIns) ++stats.ins;
    if (op == EditOp::kDel) ++stats.del;
  }
  return stats;
}

double werr_pct(double wer_baseline, double wer_model) {
  if (wer_baseline <= 0.0)
    throw ContractError("WERR undefined: baseline WER is zero");
  return 100.0 * (wer_baseline - wer_model) / wer_baseline;
}

std::map<CatalogType, WerStats> slot_wer(const std::vector<std::string>& ref,
                                         const std::vector<std::string>& hyp,
                                         const std::vector<SlotSpan>& spans) {
  for (const SlotSpan& s : spans)
    if (s.start < 0 || s.end <= s.start ||
        s.end > static_cast<int>(ref.size()))
      throw ContractError("slot span [" + std::to_string(s.start) + ", " +
                          std::to_string(s.end) +
                          ") is invalid for a reference of " +
                          std::to_string(ref.size()) + " tokens");
  std::map<CatalogType, WerStats> stats;
  for (const SlotSpan& s : spans)
    stats[s.type].ref_len += s.end - s.start;
  std::vector<EditOp> ops = align_tokens(ref, hyp);
  int i = 0;  // reference tokens consumed
  for (EditOp op : ops) {
    switch (op) {
      case EditOp::kMatch:
        ++i;
        break;
      case EditOp::kSub:
        for (const SlotSpan& s : spans)
          if (i >= s.start && i < s.end) stats[s.type].sub++;
        ++i;
        break;
      case EditOp::kDel:
        for (const SlotSpan& s : spans)
          if (i >= s.start && i < s.end) stats[s.type].del++;
        ++i;
        break;
      case EditOp::kIns:
        // Between ref positions i-1 and i; strictly inside a span only.
        for (const SlotSpan& s : spans)
          if (i > s.start && i < s.end) stats[s.type].ins++;
        break;
    }
  }
  return stats;
}

int eval_threads_from_env() {
  const char* v = std::getenv("DA_BIAS_THREADS");
  if (!v || !*v) return 0;
  int n = std::atoi(v);
  return n > 0 ? n : 0;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct DecodedPair {
  std::vector<std::string> ref;
  std::vector<std::string> model_hyp;
  std::vector<std::string> baseline_hyp;
};

}  // namespace

std::string EvalReport::to_csv() const {
  std::string out =
      "split,metric,model_wer,baseline_wer,werr_pct,n_utterances,"
      "n_ref_tokens\n";
  for (const ReportRow& r : rows) {
    out += r.split + "," + r.metric + ",";
    out += (r.model_wer ? fmt_double(*r.model_wer) : std::string()) + ",";
    out += (r.baseline_wer ? fmt_double(*r.baseline_wer) : std::string()) +
           ",";
    out += (r.werr ? fmt_double(*r.werr) : std::string()) + ",";
    out += std::to_string(r.n_utterances) + "," +
           std::to_string(r.n_ref_tokens) + "\n";
  }
  return out;
}

ordered_json EvalReport::to_json() const {
  ordered_json j;
  j["meta"] = meta;
  ordered_json arr = ordered_json::array();
  for (const ReportRow& r : rows) {
    ordered_json rj;
    rj["split"] = r.split;
    rj["metric"] = r.metric;
    if (r.model_wer) rj["model_wer"] = *r.model_wer;
    if (r.baseline_wer) rj["baseline_wer"] = *r.baseline_wer;
    if (r.werr) rj["werr_pct"] = *r.werr;
    rj["n_utterances"] = r.n_utterances;
    rj["n_ref_tokens"] = r.n_ref_tokens;
    arr.push_back(rj);
  }
  j["rows"] = arr;
  return j;
}

const ReportRow* EvalReport::find(const std::string& split,
                                  const std::string& metric) const {
  for (const ReportRow& r : rows)
    if (r.split == split && r.metric == metric) return &r;
  return nullptr;
}

EvalReport evaluate_models(const ContextualModel& model,
                           const ForwardOptions& model_opts,
                           const ContextualModel& baseline,
                           const ForwardOptions& baseline_opts,
                           const std::vector<Utterance>& test,
                           int threads) {
  int64_t n = static_cast<int64_t>(test.size());
  std::vector<DecodedPair> decoded(test.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads( \
    threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int64_t i = 0; i < n; ++i) {
    const Utterance& utt = test[i];
    decoded[i].ref = utt.words();
    decoded[i].model_hyp =
        split_words(detokenize(model.decode(utt, model_opts)));
    decoded[i].baseline_hyp =
        split_words(detokenize(baseline.decode(utt, baseline_opts)));
  }
  (void)threads;

  EvalReport report;
  auto add_row = [&](const std::string& split, const std::string& metric,
                     const WerStats& ms, const WerStats& bs, int64_t utts) {
    if (ms.ref_len == 0) {
      std::cerr << "warning: split " << split << "/" << metric
                << " is empty; metric omitted\n";
      return;
    }
    ReportRow row;
    row.split = split;
    row.metric = metric;
    row.model_wer = ms.wer();
    row.baseline_wer = bs.wer();
    if (*row.baseline_wer > 0.0)
      row.werr = werr_pct(*row.baseline_wer, *row.model_wer);
    else
      std::cerr << "warning: baseline WER is zero on " << split
                << "; WERR omitted\n";
    row.n_utterances = utts;
    row.n_ref_tokens = ms.ref_len;
    report.rows.push_back(row);
  };

  const char* split_names[] = {kTagUserSpecific, kTagGeneral, kTagDefaultDa,
                               kTagNonDefaultDa, kTagTurn1,   kTagTurn2,
                               kTagTurn3};
  for (const char* split : split_names) {
    WerStats ms, bs;
    int64_t utts = 0;
    for (size_t i = 0; i < test.size(); ++i) {
      if (!test[i].has_tag(split)) continue;
      ++utts;
      ms += wer(decoded[i].ref, decoded[i].model_hyp);
      bs += wer(decoded[i].ref, decoded[i].baseline_hyp);
    }
    add_row(split, "wer", ms, bs, utts);
  }

  // Slot-level scoring over the user-specific subset.
  {
    std::map<CatalogType, WerStats> ms, bs;
    std::map<CatalogType, int64_t> utts;
    for (size_t i = 0; i < test.size(); ++i) {
      if (test[i].slots.empty()) continue;
      auto m1 = slot_wer(decoded[i].ref, decoded[i].model_hyp, test[i].slots);
      auto b1 =
          slot_wer(decoded[i].ref, decoded[i].baseline_hyp, test[i].slots);
      for (auto& [type, st] : m1) {
        ms[type] += st;
        utts[type] += 1;
      }
      for (auto& [type, st] : b1) bs[type] += st;
    }
    for (CatalogType type :
         {CatalogType::kContactName, CatalogType::kDeviceName,
          CatalogType::kDeviceLocation}) {
      add_row(kTagUserSpecific,
              std::string("slot_wer:") + catalog_type_name(type), ms[type],
              bs[type], utts[type]);
    }
  }

  // Cross-turn mean of the turn-wise WERRs.
  {
    double werr_sum = 0.0;
    int64_t turns = 0, utts = 0, ref_tokens = 0;
    for (const char* split : {kTagTurn1, kTagTurn2, kTagTurn3}) {
      const ReportRow* row = report.find(split, "wer");
      if (!row || !row->werr) continue;
      werr_sum += *row->werr;
      ++turns;
      utts += row->n_utterances;
      ref_tokens += row->n_ref_tokens;
    }
    if (turns > 0) {
      ReportRow row;
      row.split = "turn_avg";
      row.metric = "werr_mean";
      row.werr = werr_sum / static_cast<double>(turns);
      row.n_utterances = utts;
      row.n_ref_tokens = ref_tokens;
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace dabias

// dabias/tests/test_util.h

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

#ifndef DABIAS_TESTS_TEST_UTIL_H_
#define DABIAS_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dabias/rng.h"
#include "dabias/tensor.h"

namespace dabias {
namespace testing {

inline Tensor random_tensor(std::vector<int64_t> shape, Rng& rng,
                            double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Tape gradient vs central finite differences for one coordinate of one
// tensor. forward() must rebuild the whole forward pass from current values
// and return the scalar loss.
inline double grad_vs_fd_rel_err(const std::function<Tensor()>& forward,
                                 Tensor param, int64_t idx,
                                 double h = 1e-5) {
  param.zero_grad();
  {
    Tape tape;
    TapeScope scope(&tape);
    Tensor loss = forward();
    tape.backward(loss);
  }
  double g = param.has_grad() ? param.grad_view()[idx] : 0.0;
  double orig = param.values()[idx];
  param.values()[idx] = orig + h;
  double fp = forward().scalar_value();
  param.values()[idx] = orig - h;
  double fm = forward().scalar_value();
  param.values()[idx] = orig;
  double fd = (fp - fm) / (2.0 * h);
  double denom = std::max({std::abs(g), std::abs(fd), 1e-6});
  return std::abs(g - fd) / denom;
}

// Independent exhaustive RNN-T oracle: enumerates every monotonic
// blank/emit alignment and logsumexps the path scores in long double.
// lattice is [t_len x u_cap x v_len] row-major; targets length U.
inline double rnnt_loss_brute_force(const std::vector<double>& lattice,
                                    int64_t t_len, int64_t u_cap,
                                    int64_t v_len,
                                    const std::vector<int>& targets,
                                    int blank_id) {
  int64_t u_len = static_cast<int64_t>(targets.size());
  auto at = [&](int64_t t, int64_t u, int64_t v) {
    return lattice[(t * u_cap + u) * v_len + v];
  };
  std::vector<long double> terms;
  std::function<void(int64_t, int64_t, long double)> walk =
      [&](int64_t t, int64_t u, long double acc) {
        if (t == t_len - 1 && u == u_len) {
          terms.push_back(acc + at(t, u, blank_id));
          return;
        }
        if (t + 1 < t_len) walk(t + 1, u, acc + at(t, u, blank_id));
        if (u < u_len) walk(t, u + 1, acc + at(t, u, targets[u]));
      };
  walk(0, 0, 0.0L);
  long double mx = terms[0];
  for (long double x : terms) mx = std::max(mx, x);
  long double s = 0.0L;
  for (long double x : terms) s += std::exp(x - mx);
  return static_cast<double>(-(mx + std::log(s)));
}

// ---- exhaustive edit-path oracle ----

enum class OracleOp { kDiag, kIns, kDel };

struct OraclePath {
  int cost = 0;
  std::vector<OracleOp> ops;  // forward order
};

// Enumerates all monotone alignment paths; returns the minimal-cost path
// that a backtrace preferring substitution over insertion over deletion
// would pick (the lexicographically smallest op sequence read from the
// end, with diag < ins < del).
inline OraclePath canonical_edit_path(const std::vector<std::string>& ref,
                                      const std::vector<std::string>& hyp) {
  std::vector<OraclePath> all;
  std::vector<OracleOp> cur;
  std::function<void(size_t, size_t, int)> walk = [&](size_t i, size_t j,
                                                      int cost) {
    if (i == ref.size() && j == hyp.size()) {
      all.push_back({cost, cur});
      return;
    }
    if (i < ref.size() && j < hyp.size()) {
      cur.push_back(OracleOp::kDiag);
      walk(i + 1, j + 1, cost + (ref[i] == hyp[j] ? 0 : 1));
      cur.pop_back();
    }
    if (j < hyp.size()) {
      cur.push_back(OracleOp::kIns);
      walk(i, j + 1, cost + 1);
      cur.pop_back();
    }
    if (i < ref.size()) {
      cur.push_back(OracleOp::kDel);
      walk(i + 1, j, cost + 1);
      cur.pop_back();
    }
  };
  walk(0, 0, 0);
  auto reversed_less = [](const std::vector<OracleOp>& a,
                          const std::vector<OracleOp>& b) {
    size_t na = a.size(), nb = b.size();
    for (size_t k = 0; k < std::min(na, nb); ++k) {
      OracleOp x = a[na - 1 - k], y = b[nb - 1 - k];
      if (x != y) return static_cast<int>(x) < static_cast<int>(y);
    }
    return na < nb;
  };
  const OraclePath* best = &all[0];
  for (const OraclePath& p : all) {
    if (p.cost < best->cost ||
        (p.cost == best->cost && reversed_less(p.ops, best->ops)))
      best = &p;
  }
  return *best;
}

inline std::vector<std::string> random_words(Rng& rng, int64_t count,
                                             int64_t alphabet) {
  std::vector<std::string> out;
  for (int64_t i = 0; i < count; ++i)
    out.push_back(std::string(1, static_cast<char>('a' + rng.uniform_int(
                                                             alphabet))));
  return out;
}

}  // namespace testing
}  // namespace dabias

#endif  // DABIAS_TESTS_TEST_UTIL_H_

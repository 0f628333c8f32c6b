// dabias/tensor.cc

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

#include "dabias/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "dabias/kernels.h"

namespace dabias {

namespace {

int64_t product(const std::vector<int64_t>& shape) {
  int64_t p = 1;
  for (int64_t d : shape) p *= d;
  return p;
}

thread_local Tape* g_active_tape = nullptr;

// Accumulate helper: returns the grad buffer of t, allocating zeros if
// needed. Only called for tensors that require grad.
inline double* grad_buf(Tensor& t) { return t.grad().data(); }

inline bool want_grad(const Tensor& a) {
  return g_active_tape != nullptr && a.requires_grad();
}
inline bool want_grad(const Tensor& a, const Tensor& b) {
  return g_active_tape != nullptr && (a.requires_grad() || b.requires_grad());
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor Tensor::zeros(std::vector<int64_t> shape, bool requires_grad) {
  auto d = std::make_shared<TensorData>();
  int64_t n = product(shape);
  if (n < 0) throw DimensionError("negative dimension in " + shape_str(shape));
  d->shape = std::move(shape);
  d->values.assign(static_cast<size_t>(n), 0.0);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::from_values(std::vector<int64_t> shape,
                           std::vector<double> values, bool requires_grad) {
  if (product(shape) != static_cast<int64_t>(values.size()))
    throw DimensionError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
  auto d = std::make_shared<TensorData>();
  d->shape = std::move(shape);
  d->values = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return from_values({1}, {v}, requires_grad);
}

double Tensor::scalar_value() const {
  if (numel() != 1)
    throw ContractError("scalar_value on tensor of shape " +
                        shape_str(shape()));
  return d_->values[0];
}

std::vector<double>& Tensor::grad() {
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  return d_->grad;
}

// ---- Tape ----

void Tape::record(const Tensor& result, std::vector<Tensor> parents,
                  std::function<void()> backward_fn) {
  records_.push_back({result, std::move(parents), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1)
    throw ContractError("backward: loss must be scalar, got shape " +
                        shape_str(loss.shape()));
  // Mark the records on a path to the loss so that gradients of unreachable
  // tensors stay untouched.
  std::unordered_set<const TensorData*> reachable;
  reachable.insert(loss.node());
  std::vector<char> active(records_.size(), 0);
  for (size_t idx = records_.size(); idx-- > 0;) {
    Record& r = records_[idx];
    if (!reachable.count(r.result.node())) continue;
    active[idx] = 1;
    for (const Tensor& p : r.parents) reachable.insert(p.node());
  }
  Tensor seed = loss;
  seed.grad()[0] += 1.0;
  for (size_t idx = records_.size(); idx-- > 0;) {
    if (active[idx]) records_[idx].fn();
  }
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape* tape) : prev_(g_active_tape) {
  g_active_tape = tape;
}

TapeScope::~TapeScope() { g_active_tape = prev_; }

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2)
    throw DimensionError("matmul: first operand must be 2-D, got " +
                         shape_str(a.shape()));
  bool vec = b.ndim() == 1;
  if (!vec && b.ndim() != 2)
    throw DimensionError("matmul: second operand must be 1-D or 2-D, got " +
                         shape_str(b.shape()));
  int64_t m = a.dim(0), k = a.dim(1);
  int64_t n = vec ? 1 : b.dim(1);
  int64_t bk = b.dim(0);
  if (k != bk)
    throw DimensionError("matmul: inner dimensions differ, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor c = vec ? Tensor::zeros({m}) : Tensor::zeros({m, n});
  kernels::matmul(a.data(), b.data(), c.data(), m, k, n);
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    g_active_tape->record(c, {a, b}, [ac, bc, cc, m, k, n]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad())  // dA += dC * B^T
        kernels::matmul_nt_acc(dc, bc.data(), grad_buf(ac), m, n, k);
      if (bc.requires_grad())  // dB += A^T * dC
        kernels::matmul_tn_acc(ac.data(), dc, grad_buf(bc), m, k, n);
    });
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2)
    throw DimensionError("matmul_nt: operands must be 2-D, got " +
                         shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  int64_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k)
    throw DimensionError("matmul_nt: inner dimensions differ, " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor c = Tensor::zeros({m, n});
  kernels::matmul_nt(a.data(), b.data(), c.data(), m, k, n);
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    g_active_tape->record(c, {a, b}, [ac, bc, cc, m, k, n]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad())  // dA += dC * B
        kernels::matmul_acc(dc, bc.data(), grad_buf(ac), m, n, k);
      if (bc.requires_grad())  // dB += dC^T * A
        kernels::matmul_tn_acc(dc, ac.data(), grad_buf(bc), m, n, k);
    });
  }
  return c;
}

Tensor transpose(const Tensor& a) {
  if (a.ndim() != 2)
    throw DimensionError("transpose: operand must be 2-D, got " +
                         shape_str(a.shape()));
  int64_t m = a.dim(0), n = a.dim(1);
  Tensor c = Tensor::zeros({n, m});
  const double* ap = a.data();
  double* cp = c.data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) cp[j * m + i] = ap[i * n + j];
  if (want_grad(a)) {
    c.set_requires_grad(true);
    Tensor ac = a, cc = c;
    g_active_tape->record(c, {a}, [ac, cc, m, n]() mutable {
      const double* dc = cc.grad().data();
      double* da = grad_buf(ac);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) da[i * n + j] += dc[j * m + i];
    });
  }
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor c = Tensor::zeros(a.shape());
  kernels::add(a.data(), b.data(), c.data(), a.numel());
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    int64_t n = a.numel();
    g_active_tape->record(c, {a, b}, [ac, bc, cc, n]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad()) kernels::axpy(1.0, dc, grad_buf(ac), n);
      if (bc.requires_grad()) kernels::axpy(1.0, dc, grad_buf(bc), n);
    });
  }
  return c;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor c = Tensor::zeros(a.shape());
  kernels::mul(a.data(), b.data(), c.data(), a.numel());
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    int64_t n = a.numel();
    g_active_tape->record(c, {a, b}, [ac, bc, cc, n]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad()) {
        double* da = grad_buf(ac);
        const double* bp = bc.data();
        for (int64_t i = 0; i < n; ++i) da[i] += dc[i] * bp[i];
      }
      if (bc.requires_grad()) {
        double* db = grad_buf(bc);
        const double* ap = ac.data();
        for (int64_t i = 0; i < n; ++i) db[i] += dc[i] * ap[i];
      }
    });
  }
  return c;
}

Tensor scale(const Tensor& a, double cfac) {
  Tensor c = Tensor::zeros(a.shape());
  kernels::scale(cfac, a.data(), c.data(), a.numel());
  if (want_grad(a)) {
    c.set_requires_grad(true);
    Tensor ac = a, cc = c;
    int64_t n = a.numel();
    g_active_tape->record(c, {a}, [ac, cc, cfac, n]() mutable {
      kernels::axpy(cfac, cc.grad().data(), grad_buf(ac), n);
    });
  }
  return c;
}

Tensor relu(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape());
  kernels::relu(x.data(), y.data(), x.numel());
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t n = x.numel();
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      kernels::acc_relu_bwd(xc.data(), yc.grad().data(), grad_buf(xc), n);
    });
  }
  return y;
}

Tensor tanh_t(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape());
  kernels::tanh_(x.data(), y.data(), x.numel());
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t n = x.numel();
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      kernels::acc_tanh_bwd(yc.data(), yc.grad().data(), grad_buf(xc), n);
    });
  }
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = Tensor::zeros(x.shape());
  kernels::sigmoid(x.data(), y.data(), x.numel());
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t n = x.numel();
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      kernels::acc_sigmoid_bwd(yc.data(), yc.grad().data(), grad_buf(xc), n);
    });
  }
  return y;
}

Tensor concat(const Tensor& a, const Tensor& b, int axis) {
  if (a.ndim() != b.ndim())
    throw DimensionError("concat: rank mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  if (a.ndim() == 1) {
    if (axis != 0) throw DimensionError("concat: 1-D tensors use axis 0");
    int64_t na = a.numel(), nb = b.numel();
    Tensor c = Tensor::zeros({na + nb});
    std::copy(a.data(), a.data() + na, c.data());
    std::copy(b.data(), b.data() + nb, c.data() + na);
    if (want_grad(a, b)) {
      c.set_requires_grad(true);
      Tensor ac = a, bc = b, cc = c;
      g_active_tape->record(c, {a, b}, [ac, bc, cc, na, nb]() mutable {
        const double* dc = cc.grad().data();
        if (ac.requires_grad()) kernels::axpy(1.0, dc, grad_buf(ac), na);
        if (bc.requires_grad()) kernels::axpy(1.0, dc + na, grad_buf(bc), nb);
      });
    }
    return c;
  }
  if (a.ndim() != 2)
    throw DimensionError("concat: only 1-D and 2-D supported, got " +
                         shape_str(a.shape()));
  if (axis != 0 && axis != 1)
    throw DimensionError("concat: axis must be 0 or 1 for 2-D");
  int other = 1 - axis;
  if (a.dim(other) != b.dim(other))
    throw DimensionError("concat: incompatible shapes " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()) +
                         " along axis " + std::to_string(axis));
  int64_t m_a = a.dim(0), n_a = a.dim(1), m_b = b.dim(0), n_b = b.dim(1);
  Tensor c = axis == 0 ? Tensor::zeros({m_a + m_b, n_a})
                       : Tensor::zeros({m_a, n_a + n_b});
  if (axis == 0) {
    std::copy(a.data(), a.data() + a.numel(), c.data());
    std::copy(b.data(), b.data() + b.numel(), c.data() + a.numel());
  } else {
    int64_t nc = n_a + n_b;
    for (int64_t i = 0; i < m_a; ++i) {
      std::copy(a.data() + i * n_a, a.data() + (i + 1) * n_a,
                c.data() + i * nc);
      std::copy(b.data() + i * n_b, b.data() + (i + 1) * n_b,
                c.data() + i * nc + n_a);
    }
  }
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    g_active_tape->record(
        c, {a, b}, [ac, bc, cc, axis, m_a, n_a, m_b, n_b]() mutable {
          const double* dc = cc.grad().data();
          if (axis == 0) {
            if (ac.requires_grad())
              kernels::axpy(1.0, dc, grad_buf(ac), m_a * n_a);
            if (bc.requires_grad())
              kernels::axpy(1.0, dc + m_a * n_a, grad_buf(bc), m_b * n_b);
          } else {
            int64_t nc = n_a + n_b;
            if (ac.requires_grad()) {
              double* da = grad_buf(ac);
              for (int64_t i = 0; i < m_a; ++i)
                kernels::axpy(1.0, dc + i * nc, da + i * n_a, n_a);
            }
            if (bc.requires_grad()) {
              double* db = grad_buf(bc);
              for (int64_t i = 0; i < m_a; ++i)
                kernels::axpy(1.0, dc + i * nc + n_a, db + i * n_b, n_b);
            }
          }
        });
  }
  return c;
}

Tensor repeat_row(const Tensor& v, int64_t m) {
  if (v.ndim() != 1)
    throw DimensionError("repeat_row: operand must be 1-D, got " +
                         shape_str(v.shape()));
  int64_t n = v.numel();
  Tensor c = Tensor::zeros({m, n});
  for (int64_t i = 0; i < m; ++i)
    std::copy(v.data(), v.data() + n, c.data() + i * n);
  if (want_grad(v)) {
    c.set_requires_grad(true);
    Tensor vc = v, cc = c;
    g_active_tape->record(c, {v}, [vc, cc, m, n]() mutable {
      kernels::colsum_acc(cc.grad().data(), grad_buf(vc), m, n);
    });
  }
  return c;
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  if (a.ndim() != 2 || v.ndim() != 1 || a.dim(1) != v.numel())
    throw DimensionError("add_rowvec: need [m x n] and [n], got " +
                         shape_str(a.shape()) + " and " +
                         shape_str(v.shape()));
  int64_t m = a.dim(0), n = a.dim(1);
  Tensor c = Tensor::zeros({m, n});
  const double* ap = a.data();
  const double* vp = v.data();
  double* cp = c.data();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) cp[i * n + j] = ap[i * n + j] + vp[j];
  if (want_grad(a, v)) {
    c.set_requires_grad(true);
    Tensor ac = a, vc = v, cc = c;
    g_active_tape->record(c, {a, v}, [ac, vc, cc, m, n]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad()) kernels::axpy(1.0, dc, grad_buf(ac), m * n);
      if (vc.requires_grad()) kernels::colsum_acc(dc, grad_buf(vc), m, n);
    });
  }
  return c;
}

Tensor grid_add(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.dim(1) != b.dim(1))
    throw DimensionError("grid_add: need [p x h] and [q x h], got " +
                         shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  int64_t p = a.dim(0), q = b.dim(0), h = a.dim(1);
  Tensor c = Tensor::zeros({p * q, h});
  const double* ap = a.data();
  const double* bp = b.data();
  double* cp = c.data();
  for (int64_t i = 0; i < p; ++i) {
    const double* arow = ap + i * h;
    for (int64_t j = 0; j < q; ++j) {
      const double* brow = bp + j * h;
      double* crow = cp + (i * q + j) * h;
      for (int64_t x = 0; x < h; ++x) crow[x] = arow[x] + brow[x];
    }
  }
  if (want_grad(a, b)) {
    c.set_requires_grad(true);
    Tensor ac = a, bc = b, cc = c;
    g_active_tape->record(c, {a, b}, [ac, bc, cc, p, q, h]() mutable {
      const double* dc = cc.grad().data();
      if (ac.requires_grad()) {
        double* da = grad_buf(ac);
        for (int64_t i = 0; i < p; ++i)
          for (int64_t j = 0; j < q; ++j)
            kernels::axpy(1.0, dc + (i * q + j) * h, da + i * h, h);
      }
      if (bc.requires_grad()) {
        double* db = grad_buf(bc);
        for (int64_t i = 0; i < p; ++i)
          for (int64_t j = 0; j < q; ++j)
            kernels::axpy(1.0, dc + (i * q + j) * h, db + j * h, h);
      }
    });
  }
  return c;
}

Tensor stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows: no rows");
  int64_t n = rows[0].numel();
  for (const Tensor& r : rows)
    if (r.ndim() != 1 || r.numel() != n)
      throw DimensionError("stack_rows: rows must be 1-D of equal length");
  int64_t m = static_cast<int64_t>(rows.size());
  Tensor c = Tensor::zeros({m, n});
  for (int64_t i = 0; i < m; ++i)
    std::copy(rows[i].data(), rows[i].data() + n, c.data() + i * n);
  bool any_grad = false;
  for (const Tensor& r : rows) any_grad = any_grad || r.requires_grad();
  if (g_active_tape && any_grad) {
    c.set_requires_grad(true);
    std::vector<Tensor> parents = rows;
    Tensor cc = c;
    g_active_tape->record(c, parents, [parents, cc, n]() mutable {
      const double* dc = cc.grad().data();
      for (size_t i = 0; i < parents.size(); ++i) {
        if (!parents[i].requires_grad()) continue;
        kernels::axpy(1.0, dc + static_cast<int64_t>(i) * n,
                      grad_buf(parents[i]), n);
      }
    });
  }
  return c;
}

Tensor row_of(const Tensor& a, int64_t i) {
  if (a.ndim() != 2)
    throw DimensionError("row_of: operand must be 2-D, got " +
                         shape_str(a.shape()));
  int64_t m = a.dim(0), n = a.dim(1);
  if (i < 0 || i >= m)
    throw IndexError("row_of: row " + std::to_string(i) +
                     " out of range for " + shape_str(a.shape()));
  Tensor c = Tensor::zeros({n});
  std::copy(a.data() + i * n, a.data() + (i + 1) * n, c.data());
  if (want_grad(a)) {
    c.set_requires_grad(true);
    Tensor ac = a, cc = c;
    g_active_tape->record(c, {a}, [ac, cc, i, n]() mutable {
      kernels::axpy(1.0, cc.grad().data(), grad_buf(ac) + i * n, n);
    });
  }
  return c;
}

Tensor gather_rows(const Tensor& a, const std::vector<int64_t>& indices) {
  if (a.ndim() != 2)
    throw DimensionError("gather_rows: operand must be 2-D, got " +
                         shape_str(a.shape()));
  int64_t m = a.dim(0), n = a.dim(1);
  int64_t len = static_cast<int64_t>(indices.size());
  for (int64_t idx : indices)
    if (idx < 0 || idx >= m)
      throw IndexError("gather_rows: index " + std::to_string(idx) +
                       " out of range for " + std::to_string(m) + " rows");
  Tensor c = Tensor::zeros({len, n});
  for (int64_t i = 0; i < len; ++i)
    std::copy(a.data() + indices[i] * n, a.data() + (indices[i] + 1) * n,
              c.data() + i * n);
  if (want_grad(a)) {
    c.set_requires_grad(true);
    Tensor ac = a, cc = c;
    std::vector<int64_t> idxs = indices;
    g_active_tape->record(c, {a}, [ac, cc, idxs, n]() mutable {
      const double* dc = cc.grad().data();
      double* da = grad_buf(ac);
      for (size_t i = 0; i < idxs.size(); ++i)
        kernels::axpy(1.0, dc + static_cast<int64_t>(i) * n,
                      da + idxs[i] * n, n);
    });
  }
  return c;
}

Tensor embedding_lookup(const Tensor& table, int64_t id) {
  if (table.ndim() != 2)
    throw DimensionError("embedding_lookup: table must be 2-D, got " +
                         shape_str(table.shape()));
  int64_t v = table.dim(0), e = table.dim(1);
  if (id < 0 || id >= v)
    throw IndexError("embedding_lookup: id " + std::to_string(id) +
                     " out of range [0, " + std::to_string(v) + ")");
  Tensor c = Tensor::zeros({e});
  std::copy(table.data() + id * e, table.data() + (id + 1) * e, c.data());
  if (want_grad(table)) {
    c.set_requires_grad(true);
    Tensor tc = table, cc = c;
    g_active_tape->record(c, {table}, [tc, cc, id, e]() mutable {
      kernels::axpy(1.0, cc.grad().data(), grad_buf(tc) + id * e, e);
    });
  }
  return c;
}

Tensor softmax(const Tensor& x) {
  if (x.ndim() != 1 || x.numel() < 1)
    throw DimensionError("softmax: need non-empty 1-D input, got " +
                         shape_str(x.shape()));
  Tensor y = Tensor::zeros(x.shape());
  kernels::row_softmax(x.data(), y.data(), 1, x.numel());
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t n = x.numel();
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      kernels::acc_row_softmax_bwd(yc.data(), yc.grad().data(), grad_buf(xc),
                                   1, n);
    });
  }
  return y;
}

Tensor masked_softmax(const Tensor& x, const std::vector<char>& mask) {
  if (x.ndim() != 1 || x.numel() < 1)
    throw DimensionError("masked_softmax: need non-empty 1-D input, got " +
                         shape_str(x.shape()));
  if (static_cast<int64_t>(mask.size()) != x.numel())
    throw DimensionError("masked_softmax: mask length " +
                         std::to_string(mask.size()) + " vs input " +
                         shape_str(x.shape()));
  int64_t n = x.numel();
  bool any = false;
  for (char m : mask) any = any || m;
  if (!any) throw ContractError("masked_softmax: all entries masked out");
  Tensor y = Tensor::zeros(x.shape());
  const double* xp = x.data();
  double* yp = y.data();
  double mx = -std::numeric_limits<double>::infinity();
  for (int64_t i = 0; i < n; ++i)
    if (mask[i] && xp[i] > mx) mx = xp[i];
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    yp[i] = mask[i] ? std::exp(xp[i] - mx) : 0.0;
    s += yp[i];
  }
  double inv = 1.0 / s;
  for (int64_t i = 0; i < n; ++i) yp[i] *= inv;
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      // masked entries have y == 0, so the usual rule zeroes them out
      kernels::acc_row_softmax_bwd(yc.data(), yc.grad().data(), grad_buf(xc),
                                   1, n);
    });
  }
  return y;
}

namespace {
std::pair<int64_t, int64_t> rows_cols(const Tensor& x, const char* op) {
  if (x.ndim() < 1)
    throw DimensionError(std::string(op) + ": need at least 1-D input");
  int64_t cols = x.dim(static_cast<int>(x.ndim()) - 1);
  if (cols < 1)
    throw DimensionError(std::string(op) + ": empty last axis in " +
                         shape_str(x.shape()));
  return {x.numel() / cols, cols};
}
}  // namespace

Tensor row_softmax(const Tensor& x) {
  auto [rows, cols] = rows_cols(x, "row_softmax");
  Tensor y = Tensor::zeros(x.shape());
  kernels::row_softmax(x.data(), y.data(), rows, cols);
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t r = rows, c = cols;
    g_active_tape->record(y, {x}, [xc, yc, r, c]() mutable {
      kernels::acc_row_softmax_bwd(yc.data(), yc.grad().data(), grad_buf(xc),
                                   r, c);
    });
  }
  return y;
}

Tensor row_log_softmax(const Tensor& x) {
  auto [rows, cols] = rows_cols(x, "row_log_softmax");
  Tensor y = Tensor::zeros(x.shape());
  kernels::row_log_softmax(x.data(), y.data(), rows, cols);
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t r = rows, c = cols;
    g_active_tape->record(y, {x}, [xc, yc, r, c]() mutable {
      kernels::acc_row_log_softmax_bwd(yc.data(), yc.grad().data(),
                                       grad_buf(xc), r, c);
    });
  }
  return y;
}

Tensor sum(const Tensor& x) {
  Tensor y = Tensor::scalar(kernels::sum(x.data(), x.numel()));
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    int64_t n = x.numel();
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      double d = yc.grad()[0];
      double* dx = grad_buf(xc);
      for (int64_t i = 0; i < n; ++i) dx[i] += d;
    });
  }
  return y;
}

Tensor reshape(const Tensor& x, std::vector<int64_t> new_shape) {
  int64_t n = 1;
  for (int64_t d : new_shape) n *= d;
  if (n != x.numel())
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) +
                         " as " + shape_str(new_shape));
  Tensor y = Tensor::from_values(new_shape, x.values());
  if (want_grad(x)) {
    y.set_requires_grad(true);
    Tensor xc = x, yc = y;
    g_active_tape->record(y, {x}, [xc, yc, n]() mutable {
      kernels::axpy(1.0, yc.grad().data(), grad_buf(xc), n);
    });
  }
  return y;
}

}  // namespace dabias

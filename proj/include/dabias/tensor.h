// dabias/tensor.h

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

#ifndef DABIAS_TENSOR_H_
#define DABIAS_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dabias/error.h"

namespace dabias {

// Which forward path produced a tensor; the model forward pass asserts that
// the biasing query comes from the path selected by the fusion mode.
enum class Provenance : uint8_t {
  kNone = 0,
  kRawEncoder,
  kEarlyFusedEncoder,
  kLateFused,
};

struct TensorData {
  std::vector<int64_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until the first accumulation
  bool requires_grad = false;
  Provenance provenance = Provenance::kNone;
};

// Value handle over shared storage. Row-major, 64-bit floats throughout.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int64_t> shape, bool requires_grad = false);
  static Tensor from_values(std::vector<int64_t> shape,
                            std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return d_ != nullptr; }
  const std::vector<int64_t>& shape() const { return d_->shape; }
  int64_t ndim() const { return static_cast<int64_t>(d_->shape.size()); }
  int64_t dim(int i) const { return d_->shape[i]; }
  int64_t numel() const { return static_cast<int64_t>(d_->values.size()); }

  std::vector<double>& values() { return d_->values; }
  const std::vector<double>& values() const { return d_->values; }
  double* data() { return d_->values.data(); }
  const double* data() const { return d_->values.data(); }

  double scalar_value() const;

  bool requires_grad() const { return d_->requires_grad; }
  void set_requires_grad(bool v) { d_->requires_grad = v; }

  Provenance provenance() const { return d_->provenance; }
  void set_provenance(Provenance p) { d_->provenance = p; }

  bool has_grad() const { return !d_->grad.empty(); }
  // Grad buffer, allocated (zero-filled) on first use.
  std::vector<double>& grad();
  const std::vector<double>& grad_view() const { return d_->grad; }
  void zero_grad() { d_->grad.clear(); }

  TensorData* node() const { return d_.get(); }

  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

 private:
  explicit Tensor(std::shared_ptr<TensorData> d) : d_(std::move(d)) {}
  std::shared_ptr<TensorData> d_;
};

// Ordered record of forward operations. Replaying the records in reverse
// accumulates gradients additively into every requires_grad tensor reachable
// from the loss; unreachable tensors are left untouched.
class Tape {
 public:
  void record(const Tensor& result, std::vector<Tensor> parents,
              std::function<void()> backward_fn);
  // loss must be scalar; seeds d(loss)/d(loss) += 1 and replays.
  void backward(const Tensor& loss);
  void clear() { records_.clear(); }
  size_t size() const { return records_.size(); }

 private:
  struct Record {
    Tensor result;
    std::vector<Tensor> parents;
    std::function<void()> fn;
  };
  std::vector<Record> records_;
};

// Thread-local active tape. Ops record onto it when set; without an active
// tape all ops are pure forward evaluation (safe to run concurrently).
Tape* active_tape();

class TapeScope {
 public:
  explicit TapeScope(Tape* tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// ---- differentiable ops ----
// Binary ops require exactly matching shapes; there is no broadcasting
// beyond scalar-times-tensor. Shape alignment is done with the explicit
// ops below (repeat_row, add_rowvec, grid_add).

// a [m x k] * b [k x n] -> [m x n]; b may be a vector [k] -> result [m].
Tensor matmul(const Tensor& a, const Tensor& b);
// a [m x k] * b [n x k]^T -> [m x n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor relu(const Tensor& x);
Tensor tanh_t(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Concatenate along axis; all other dims must match. 1-D or 2-D.
Tensor concat(const Tensor& a, const Tensor& b, int axis);
// v [n] stacked m times -> [m x n]
Tensor repeat_row(const Tensor& v, int64_t m);
// A [m x n] + v [n] broadcast over rows
Tensor add_rowvec(const Tensor& a, const Tensor& v);
// A [p x h], B [q x h] -> [(p*q) x h], row i*q+j = A[i] + B[j]
Tensor grid_add(const Tensor& a, const Tensor& b);
// rows: each [n] -> [m x n]
Tensor stack_rows(const std::vector<Tensor>& rows);
// A [m x n], row index -> [n]
Tensor row_of(const Tensor& a, int64_t i);
// A [m x n], indices into rows -> [len x n]
Tensor gather_rows(const Tensor& a, const std::vector<int64_t>& indices);

// table [V x e], 0 <= id < V -> [e]
Tensor embedding_lookup(const Tensor& table, int64_t id);

// x [n] -> [n]; max-subtracted, outputs sum to 1.
Tensor softmax(const Tensor& x);
// Masked variant: entries with mask[i] == 0 get probability exactly 0 and
// are excluded from the normalization (used for padding entities).
Tensor masked_softmax(const Tensor& x, const std::vector<char>& mask);
// softmax / log-softmax along the last axis of an n-D tensor.
Tensor row_softmax(const Tensor& x);
Tensor row_log_softmax(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor reshape(const Tensor& x, std::vector<int64_t> new_shape);

}  // namespace dabias

#endif  // DABIAS_TENSOR_H_

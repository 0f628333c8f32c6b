// dabias/params.h

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

#ifndef DABIAS_PARAMS_H_
#define DABIAS_PARAMS_H_

#include <string>
#include <unordered_map>
#include <vector>

#include "dabias/error.h"
#include "dabias/rng.h"
#include "dabias/tensor.h"

namespace dabias {

struct Parameter {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

// Ordered, name-unique parameter registry. Insertion order defines the
// checkpoint layout and the optimizer iteration order.
class ParamStore {
 public:
  // Registers a zero tensor with requires_grad set. Throws on duplicates.
  Tensor add(const std::string& name, std::vector<int64_t> shape);
  // Uniform(-k, k) init.
  Tensor add_uniform(const std::string& name, std::vector<int64_t> shape,
                     double k, Rng& rng);

  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  Parameter* find(const std::string& name);
  bool contains(const std::string& name) const {
    return index_.count(name) > 0;
  }

  std::vector<Parameter>& items() { return items_; }
  const std::vector<Parameter>& items() const { return items_; }
  size_t size() const { return items_.size(); }

  void zero_grads();
  int64_t total_values() const;

 private:
  std::vector<Parameter> items_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace dabias

#endif  // DABIAS_PARAMS_H_

// dabias/params.cc

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

#include "dabias/params.h"

namespace dabias {

Tensor ParamStore::add(const std::string& name, std::vector<int64_t> shape) {
  if (index_.count(name))
    throw ContractError("duplicate parameter name: " + name);
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  index_[name] = items_.size();
  items_.push_back({name, t, true});
  return t;
}

Tensor ParamStore::add_uniform(const std::string& name,
                               std::vector<int64_t> shape, double k,
                               Rng& rng) {
  Tensor t = add(name, std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-k, k);
  return t;
}

Parameter& ParamStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ContractError("unknown parameter name: " + name);
  return items_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ContractError("unknown parameter name: " + name);
  return items_[it->second];
}

Parameter* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &items_[it->second];
}

void ParamStore::zero_grads() {
  for (Parameter& p : items_) p.tensor.zero_grad();
}

int64_t ParamStore::total_values() const {
  int64_t n = 0;
  for (const Parameter& p : items_) n += p.tensor.numel();
  return n;
}

}  // namespace dabias

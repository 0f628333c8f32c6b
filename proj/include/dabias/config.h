// dabias/config.h

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

#ifndef DABIAS_CONFIG_H_
#define DABIAS_CONFIG_H_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "dabias/error.h"

namespace dabias {

// Flat key=value config file: one pair per line, '#' starts a comment,
// whitespace around keys and values is trimmed. One file can drive every
// subcommand; each reads only its keys, but all keys must be known.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text);

  // Command-line overrides land on top of the file values.
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  int64_t get_int64(const std::string& key, int64_t fallback) const;
  uint64_t get_uint64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // "a:b" ratio pair of positive numbers
  std::pair<double, double> get_ratio(const std::string& key, double fa,
                                      double fb) const;

  const std::map<std::string, std::string>& entries() const {
    return values_;
  }

  // Throws ConfigError naming the first key outside the known set.
  void check_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

// Every key any subcommand understands.
const std::set<std::string>& all_known_config_keys();

}  // namespace dabias

#endif  // DABIAS_CONFIG_H_

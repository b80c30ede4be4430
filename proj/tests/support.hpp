/*
 Copyright 2026 The hmts Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <random>

#include "hmts/hmts.hpp"

namespace hmts::testing {

// Derived once per test binary; building it takes a few seconds.
inline const ModCodTable& shipped_table() {
  static const ModCodTable table = build_modcod_table(kTableAlphas, shipped_references());
  return table;
}

inline std::vector<Receiver> receivers_from(std::initializer_list<double> snrs) {
  std::vector<Receiver> out;
  int i = 0;
  for (double s : snrs) out.push_back({"rec" + std::to_string(++i), s});
  return out;
}

}  // namespace hmts::testing

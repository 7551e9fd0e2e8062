// Copyright 2026 The idnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The golden DSL corpus under tests/data, shared by the unit and acceptance
// suites.

#ifndef IDNV_TESTS_GOLDEN_H_
#define IDNV_TESTS_GOLDEN_H_

#include <set>
#include <string>
#include <vector>

#include "idnv/taxonomy.h"

namespace idnv::testing {

struct GoldenCheck {
  int cases = 0;
  std::set<std::string> productions;  // Grammar features seen in the corpus.
  std::vector<std::string> problems;  // Empty when the corpus round trips.
};

// Every production the corpus has to exercise.
const std::set<std::string>& RequiredProductions();

// Renders golden_intents.idl parsed against `tax` and compares it with
// golden_intents.canonical. Each intent must also survive parse(render(i)).
GoldenCheck CheckGoldenCorpus(const std::string& data_dir,
                              const LabelTaxonomy& tax);

}  // namespace idnv::testing

#endif  // IDNV_TESTS_GOLDEN_H_

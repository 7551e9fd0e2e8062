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

// Intent DSL:
//
//   intent <id> { from <epg> to <epg> (allow|block)
//                 [tcp|udp] [port <n>[,<n>...]]
//                 [via <NF>[,<NF>...]] [bw <mbps>] }
//
// '#' starts a comment that runs to the end of the line.

#ifndef IDNV_INTENT_PARSER_H_
#define IDNV_INTENT_PARSER_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/taxonomy.h"

namespace idnv {

// Errors carry "syntax error at line L, column C: expected ..." or
// "semantic error at line L, column C: ..." messages.
absl::StatusOr<std::vector<NetworkIntent>> ParseIntentFile(
    absl::string_view source, const LabelTaxonomy& tax);

// Canonical single-line rendering; ParseIntentFile(RenderIntent(x)) == {x}.
std::string RenderIntent(const NetworkIntent& intent);
std::string RenderIntents(const std::vector<NetworkIntent>& intents);

// Shortest text that parses back to the same double.
std::string FormatNumber(double value);

}  // namespace idnv

#endif  // IDNV_INTENT_PARSER_H_

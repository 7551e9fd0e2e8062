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

// Restricted-template normalizer from English sentences to NetworkIntent,
// and the I = I' consistency check built on it. Accepted shapes:
//
//   The [tcp|udp] traffic from <EPG> to <EPG> is allowed|blocked
//       [on port <n>[,<n>...]] [through <NF>[ and <NF>...]] [with <x> Mbps]
//   Allow|Block [tcp|udp] traffic from <EPG> to <EPG> [on port ...] ...
//
// "through" and "with" clauses are only accepted for allowed traffic. A
// trailing period is optional.

#ifndef IDNV_NL_NORMALIZER_H_
#define IDNV_NL_NORMALIZER_H_

#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/taxonomy.h"

namespace idnv {

// Raw slots captured by a template match, before label resolution.
struct TemplateFields {
  std::string src;
  std::string dst;
  Action action = Action::kAllow;
  Proto proto = Proto::kAny;
  std::vector<uint16_t> ports;
  std::vector<std::string> chain;
  std::optional<double> bandwidth_mbps;
};

// InvalidArgument("unrecognized template ...") when nothing matches.
absl::StatusOr<TemplateFields> MatchTemplate(absl::string_view sentence);

// NotFound("unknown entity ...") when a label or function is not registered.
absl::StatusOr<NetworkIntent> NormalizeNl(const UserIntent& user,
                                          const LabelTaxonomy& tax);

// Renders `intent` in the first template shape.
std::string RenderSentence(const NetworkIntent& intent);

struct CheckResult {
  bool pass = true;
  std::string field;
  std::string expected;
  std::string got;
};

// Compares the template parse of `user.text` with the template parse of the
// rendered `intent`, field by field. FailedPrecondition when the sentence is
// out of grammar or `intent.origin` does not name `user`.
absl::StatusOr<CheckResult> CheckIEqualsIPrime(const UserIntent& user,
                                               const NetworkIntent& intent,
                                               const LabelTaxonomy& tax);

// Reads "<id>: <sentence>" lines; blank lines and '#' comments are skipped.
absl::StatusOr<std::vector<UserIntent>> ParseUserIntentFile(
    absl::string_view source);

}  // namespace idnv

#endif  // IDNV_NL_NORMALIZER_H_

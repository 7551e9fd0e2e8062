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

#include "idnv/nl_normalizer.h"

#include <algorithm>
#include <charconv>
#include <regex>
#include <set>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "idnv/intent_parser.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

constexpr char kEpg[] = R"(([A-Za-z0-9_\-]+(?:\.(?:[A-Za-z0-9_\-]+|\*))*))";
constexpr char kTail[] =
    R"((?: on port (\d+(?:,\d+)*))?(?: through ([A-Za-z]+(?: and [A-Za-z]+)*))?)"
    R"((?: with (\d+(?:\.\d+)?) Mbps)?\.?)";

const std::regex& PassiveTemplate() {
  static const std::regex* re = new std::regex(
      absl::StrCat(R"(^The (?:(tcp|udp) )?traffic from )", kEpg, " to ", kEpg,
                   R"( is (allowed|blocked))", kTail, "$"));
  return *re;
}

const std::regex& ImperativeTemplate() {
  static const std::regex* re = new std::regex(
      absl::StrCat(R"(^(Allow|Block) (?:(tcp|udp) )?traffic from )", kEpg,
                   " to ", kEpg, kTail, "$"));
  return *re;
}

absl::Status Unrecognized(absl::string_view sentence) {
  return absl::InvalidArgumentError(
      absl::StrCat("unrecognized template: \"", sentence, "\""));
}

// Fills everything after the action from the shared tail groups.
absl::Status FillTail(const std::smatch& m, size_t first,
                      absl::string_view sentence, TemplateFields& out) {
  if (m[first].matched) {
    for (absl::string_view p : absl::StrSplit(m[first].str(), ',')) {
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), value);
      if (ec != std::errc() || value < 1 || value > 65535) {
        return Unrecognized(sentence);
      }
      out.ports.push_back(static_cast<uint16_t>(value));
    }
  }
  if (m[first + 1].matched) {
    for (absl::string_view nf : absl::StrSplit(m[first + 1].str(), " and ")) {
      out.chain.emplace_back(nf);
    }
  }
  if (m[first + 2].matched) {
    out.bandwidth_mbps = std::stod(m[first + 2].str());
  }
  if (out.action == Action::kBlock &&
      (!out.chain.empty() || out.bandwidth_mbps.has_value())) {
    return Unrecognized(sentence);
  }
  return absl::OkStatus();
}

Proto ProtoFromText(const std::ssub_match& m) {
  if (!m.matched) return Proto::kAny;
  return m.str() == "tcp" ? Proto::kTcp : Proto::kUdp;
}

}  // namespace

absl::StatusOr<TemplateFields> MatchTemplate(absl::string_view sentence) {
  std::string text(absl::StripAsciiWhitespace(sentence));
  std::smatch m;
  TemplateFields out;
  if (std::regex_match(text, m, PassiveTemplate())) {
    out.proto = ProtoFromText(m[1]);
    out.src = m[2].str();
    out.dst = m[3].str();
    out.action = m[4].str() == "allowed" ? Action::kAllow : Action::kBlock;
    RETURN_IF_ERROR(FillTail(m, 5, sentence, out));
    return out;
  }
  if (std::regex_match(text, m, ImperativeTemplate())) {
    out.action = m[1].str() == "Allow" ? Action::kAllow : Action::kBlock;
    out.proto = ProtoFromText(m[2]);
    out.src = m[3].str();
    out.dst = m[4].str();
    RETURN_IF_ERROR(FillTail(m, 5, sentence, out));
    return out;
  }
  return Unrecognized(sentence);
}

absl::StatusOr<NetworkIntent> NormalizeNl(const UserIntent& user,
                                          const LabelTaxonomy& tax) {
  ASSIGN_OR_RETURN(TemplateFields f, MatchTemplate(user.text));
  NetworkIntent intent;
  intent.id = user.id;
  intent.origin = user.id;
  for (auto [expr, ref] :
       {std::pair{&f.src, &intent.src}, std::pair{&f.dst, &intent.dst}}) {
    absl::StatusOr<EndpointGroupRef> parsed = ParseEpgExpr(*expr, tax);
    if (!parsed.ok()) {
      return absl::NotFoundError(absl::StrCat("unknown entity '", *expr,
                                              "': ", parsed.status().message()));
    }
    *ref = *std::move(parsed);
  }
  intent.action = f.action;
  intent.classifier.proto = f.proto;
  intent.classifier.ports.insert(f.ports.begin(), f.ports.end());
  for (const std::string& name : f.chain) {
    std::optional<NfKind> kind = NfKind::FromName(name);
    if (!kind.has_value()) {
      return absl::NotFoundError(absl::StrCat("unknown entity '", name, "'"));
    }
    intent.chain.push_back(*kind);
  }
  intent.bandwidth_mbps = f.bandwidth_mbps;
  RETURN_IF_ERROR(intent.Validate());
  return intent;
}

std::string RenderSentence(const NetworkIntent& intent) {
  std::string out = "The ";
  if (intent.classifier.proto != Proto::kAny) {
    absl::StrAppend(&out, ProtoName(intent.classifier.proto), " ");
  }
  absl::StrAppend(&out, "traffic from ", intent.src.ToString(), " to ",
                  intent.dst.ToString(), " is ",
                  intent.action == Action::kAllow ? "allowed" : "blocked");
  if (!intent.classifier.ports.empty()) {
    absl::StrAppend(&out, " on port ",
                    absl::StrJoin(intent.classifier.ports, ","));
  }
  if (!intent.chain.empty()) {
    absl::StrAppend(&out, " through ", ChainToString(intent.chain, " and "));
  }
  if (intent.bandwidth_mbps.has_value()) {
    absl::StrAppend(&out, " with ", FormatNumber(*intent.bandwidth_mbps),
                    " Mbps");
  }
  return out;
}

absl::StatusOr<CheckResult> CheckIEqualsIPrime(const UserIntent& user,
                                               const NetworkIntent& intent,
                                               const LabelTaxonomy& tax) {
  if (!intent.origin.has_value() || *intent.origin != user.id) {
    return absl::FailedPreconditionError(
        absl::StrCat("intent ", intent.id, " does not originate from ",
                     user.id));
  }
  absl::StatusOr<NetworkIntent> expected = NormalizeNl(user, tax);
  if (!expected.ok()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "not comparable: ", expected.status().message()));
  }
  UserIntent rendered{.id = user.id, .text = RenderSentence(intent)};
  absl::StatusOr<NetworkIntent> got = NormalizeNl(rendered, tax);
  CheckResult result;
  auto fail = [&](std::string field, std::string want, std::string have) {
    result = {false, std::move(field), std::move(want), std::move(have)};
    return result;
  };
  if (!got.ok()) {
    return fail("sentence", user.text, rendered.text);
  }
  const NetworkIntent& e = *expected;
  const NetworkIntent& g = *got;
  if (!(e.src == g.src)) return fail("src", e.src.ToString(), g.src.ToString());
  if (!(e.dst == g.dst)) return fail("dst", e.dst.ToString(), g.dst.ToString());
  if (e.action != g.action) {
    return fail("action", std::string(ActionName(e.action)),
                std::string(ActionName(g.action)));
  }
  if (!(e.classifier == g.classifier)) {
    return fail("classifier", e.classifier.ToString(), g.classifier.ToString());
  }
  if (e.chain != g.chain) {
    return fail("chain", ChainToString(e.chain), ChainToString(g.chain));
  }
  if (e.bandwidth_mbps != g.bandwidth_mbps) {
    auto bw = [](const std::optional<double>& v) {
      return v.has_value() ? FormatNumber(*v) : std::string("none");
    };
    return fail("bandwidth", bw(e.bandwidth_mbps), bw(g.bandwidth_mbps));
  }
  return result;
}

absl::StatusOr<std::vector<UserIntent>> ParseUserIntentFile(
    absl::string_view source) {
  std::vector<UserIntent> out;
  int64_t seq = 0;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(source, '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    size_t colon = line.find(':');
    if (colon == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": expected '<id>: <sentence>'"));
    }
    UserIntent u;
    u.id = std::string(absl::StripAsciiWhitespace(line.substr(0, colon)));
    u.text = std::string(absl::StripAsciiWhitespace(line.substr(colon + 1)));
    u.submitted_at = seq++;
    if (u.id.empty() || u.text.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": empty id or sentence"));
    }
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace idnv

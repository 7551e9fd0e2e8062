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

#include "golden.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "idnv/intent_parser.h"

namespace idnv::testing {
namespace {

bool ReadAll(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream s;
  s << in.rdbuf();
  *out = s.str();
  return true;
}

void NoteEpg(const EndpointGroupRef& epg, std::set<std::string>& seen) {
  if (epg.terms.size() > 1) seen.insert("epg-conjunction");
  for (const EpgTerm& t : epg.terms) {
    seen.insert(t.wildcard ? "epg-wildcard" : "epg-label");
    seen.insert(t.depth == 1 ? "epg-root-label" : "epg-child-label");
  }
}

// Features visible only in the source text.
void NoteSource(const std::string& src, std::set<std::string>& seen) {
  for (absl::string_view line : absl::StrSplit(src, '\n')) {
    absl::string_view code = line.substr(0, line.find('#'));
    if (line.find('#') != absl::string_view::npos) {
      seen.insert(code.find_first_not_of(" \t") == absl::string_view::npos
                      ? "comment-line"
                      : "comment-trailing");
    }
    if (code.find('\t') != absl::string_view::npos) seen.insert("layout-tabs");
  }
  if (src.find("{\n") != std::string::npos) seen.insert("layout-multiline");
}

}  // namespace

const std::set<std::string>& RequiredProductions() {
  static const auto* kAll = new std::set<std::string>{
      "action-allow",     "action-block",      "proto-tcp",
      "proto-udp",        "proto-any",         "port-single",
      "port-list",        "via-single",        "via-list",
      "bw-integer",       "bw-fraction",       "epg-label",
      "epg-root-label",   "epg-child-label",   "epg-wildcard",
      "epg-conjunction",  "comment-line",      "comment-trailing",
      "layout-tabs",      "layout-multiline",  "all-clauses"};
  return *kAll;
}

GoldenCheck CheckGoldenCorpus(const std::string& data_dir,
                              const LabelTaxonomy& tax) {
  GoldenCheck out;
  std::string src, canonical;
  if (!ReadAll(data_dir + "/golden_intents.idl", &src) ||
      !ReadAll(data_dir + "/golden_intents.canonical", &canonical)) {
    out.problems.push_back("cannot read corpus under " + data_dir);
    return out;
  }
  auto parsed = ParseIntentFile(src, tax);
  if (!parsed.ok()) {
    out.problems.push_back(std::string(parsed.status().message()));
    return out;
  }
  out.cases = static_cast<int>(parsed->size());

  std::string rendered = RenderIntents(*parsed);
  if (rendered != canonical) {
    std::vector<std::string> want = absl::StrSplit(canonical, '\n');
    std::vector<std::string> got = absl::StrSplit(rendered, '\n');
    for (size_t k = 0; k < std::max(want.size(), got.size()); ++k) {
      std::string w = k < want.size() ? want[k] : "<none>";
      std::string g = k < got.size() ? got[k] : "<none>";
      if (w != g) {
        out.problems.push_back(
            absl::StrCat("line ", k + 1, ": want '", w, "' got '", g, "'"));
      }
    }
  }

  // The canonical text must parse back to the same values.
  auto reparsed = ParseIntentFile(canonical, tax);
  if (!reparsed.ok()) {
    out.problems.push_back(absl::StrCat("canonical text does not parse: ",
                                        reparsed.status().message()));
  } else if (*reparsed != *parsed) {
    out.problems.push_back("canonical text parses to different intents");
  }

  for (const NetworkIntent& i : *parsed) {
    auto one = ParseIntentFile(RenderIntent(i), tax);
    if (!one.ok() || one->size() != 1 || (*one)[0] != i) {
      out.problems.push_back("parse(render(" + i.id + ")) differs");
    }
    out.productions.insert(i.action == Action::kAllow ? "action-allow"
                                                      : "action-block");
    out.productions.insert(i.classifier.proto == Proto::kTcp   ? "proto-tcp"
                           : i.classifier.proto == Proto::kUdp ? "proto-udp"
                                                               : "proto-any");
    if (i.classifier.ports.size() == 1) out.productions.insert("port-single");
    if (i.classifier.ports.size() > 1) out.productions.insert("port-list");
    if (i.chain.size() == 1) out.productions.insert("via-single");
    if (i.chain.size() > 1) out.productions.insert("via-list");
    if (i.bandwidth_mbps.has_value()) {
      out.productions.insert(*i.bandwidth_mbps == static_cast<long>(
                                                      *i.bandwidth_mbps)
                                 ? "bw-integer"
                                 : "bw-fraction");
    }
    if (i.classifier.proto != Proto::kAny && !i.classifier.ports.empty() &&
        !i.chain.empty() && i.bandwidth_mbps.has_value()) {
      out.productions.insert("all-clauses");
    }
    NoteEpg(i.src, out.productions);
    NoteEpg(i.dst, out.productions);
  }
  NoteSource(src, out.productions);
  for (const std::string& p : RequiredProductions()) {
    if (!out.productions.count(p)) {
      out.problems.push_back("production not covered: " + p);
    }
  }
  return out;
}

}  // namespace idnv::testing

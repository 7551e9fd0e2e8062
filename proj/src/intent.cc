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

#include "idnv/intent.h"

#include <algorithm>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace idnv {
namespace {

struct NfRegistry {
  std::vector<std::string> names = {"LB", "IDS", "WEB", "DNS", "DDOS", "FW"};
};

NfRegistry& Registry() {
  static NfRegistry* registry = new NfRegistry();
  return *registry;
}

}  // namespace

absl::string_view ProtoName(Proto p) {
  switch (p) {
    case Proto::kAny:
      return "any";
    case Proto::kTcp:
      return "tcp";
    case Proto::kUdp:
      return "udp";
  }
  return "any";
}

absl::string_view ActionName(Action a) {
  return a == Action::kAllow ? "allow" : "block";
}

bool Classifier::MatchesProto(Proto p) const {
  return proto == Proto::kAny || p == Proto::kAny || p == proto;
}

bool Classifier::MatchesPort(uint16_t port) const {
  if (ports.empty()) return true;
  return ports.contains(port) != ports_negated;
}

std::optional<uint16_t> Classifier::FirstCommonPort(
    const Classifier& other) const {
  const bool explicit_here = !ports.empty() && !ports_negated;
  const bool explicit_there = !other.ports.empty() && !other.ports_negated;
  if (explicit_here || explicit_there) {
    const Classifier& probe = explicit_here ? *this : other;
    const Classifier& against = explicit_here ? other : *this;
    for (uint16_t p : probe.ports) {
      if (against.MatchesPort(p)) return p;
    }
    return std::nullopt;
  }
  for (uint32_t p = 1; p <= 65535; ++p) {
    if (MatchesPort(p) && other.MatchesPort(p)) return static_cast<uint16_t>(p);
  }
  return std::nullopt;
}

std::optional<Proto> Classifier::FirstCommonProto(
    const Classifier& other) const {
  for (Proto p : {Proto::kTcp, Proto::kUdp}) {
    if (MatchesProto(p) && other.MatchesProto(p)) return p;
  }
  return std::nullopt;
}

std::string Classifier::ToString() const {
  std::string out(ProtoName(proto));
  out += ':';
  if (ports.empty()) {
    out += '*';
  } else {
    if (ports_negated) out += '!';
    out += absl::StrJoin(ports, ",");
  }
  return out;
}

NfKind NfKind::LB() { return NfKind(0); }
NfKind NfKind::IDS() { return NfKind(1); }
NfKind NfKind::WEB() { return NfKind(2); }
NfKind NfKind::DNS() { return NfKind(3); }
NfKind NfKind::DDOS() { return NfKind(4); }
NfKind NfKind::FW() { return NfKind(5); }

std::optional<NfKind> NfKind::FromName(absl::string_view name) {
  const auto& names = Registry().names;
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return NfKind(static_cast<int>(it - names.begin()));
}

NfKind NfKind::Register(absl::string_view name) {
  if (auto existing = FromName(name); existing.has_value()) return *existing;
  Registry().names.emplace_back(name);
  return NfKind(static_cast<int>(Registry().names.size()) - 1);
}

std::vector<NfKind> NfKind::All() {
  std::vector<NfKind> out;
  for (size_t i = 0; i < Registry().names.size(); ++i) {
    out.push_back(NfKind(static_cast<int>(i)));
  }
  return out;
}

const std::string& NfKind::name() const { return Registry().names[rank_]; }

std::string ChainToString(const std::vector<NfKind>& chain,
                          absl::string_view sep) {
  return absl::StrJoin(chain, absl::string_view(sep.data(), sep.size()),
                       [](std::string* out, NfKind k) { out->append(k.name()); });
}

absl::Status NetworkIntent::Validate() const {
  if (id.empty()) return absl::InvalidArgumentError("intent id is empty");
  if (src.terms.empty() || dst.terms.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("intent ", id, ": empty endpoint group"));
  }
  if (action == Action::kBlock && !chain.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("intent ", id, ": block intents cannot carry a chain"));
  }
  if (action == Action::kBlock && bandwidth_mbps.has_value()) {
    return absl::InvalidArgumentError(
        absl::StrCat("intent ", id, ": block intents cannot carry bandwidth"));
  }
  if (bandwidth_mbps.has_value() && !(*bandwidth_mbps > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("intent ", id, ": bandwidth must be positive"));
  }
  if (classifier.ports.contains(0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("intent ", id, ": port out of range"));
  }
  std::set<NfKind> seen;
  for (NfKind k : chain) {
    if (!seen.insert(k).second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "intent ", id, ": duplicate network function ", k.name()));
    }
  }
  return absl::OkStatus();
}

absl::Status IntentTable::Insert(NetworkIntent intent) {
  if (entries_.contains(intent.id)) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate intent id ", intent.id));
  }
  order_.push_back(intent.id);
  std::string id = intent.id;
  entries_.emplace(std::move(id), std::move(intent));
  ++generation_;
  return absl::OkStatus();
}

absl::Status IntentTable::Replace(NetworkIntent intent) {
  auto it = entries_.find(intent.id);
  if (it == entries_.end()) {
    return absl::NotFoundError(absl::StrCat("no intent ", intent.id));
  }
  it->second = std::move(intent);
  ++generation_;
  return absl::OkStatus();
}

absl::Status IntentTable::Remove(absl::string_view id) {
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    return absl::NotFoundError(absl::StrCat("no intent ", std::string(id)));
  }
  entries_.erase(it);
  order_.erase(std::find(order_.begin(), order_.end(), id));
  ++generation_;
  return absl::OkStatus();
}

const NetworkIntent* IntentTable::Find(absl::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const NetworkIntent*> IntentTable::InOrder() const {
  std::vector<const NetworkIntent*> out;
  out.reserve(order_.size());
  for (const std::string& id : order_) out.push_back(&entries_.find(id)->second);
  return out;
}

absl::Status UserIntentTable::Insert(UserIntent intent) {
  if (intent.text.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("user intent ", intent.id, " has empty text"));
  }
  if (Find(intent.id) != nullptr) {
    return absl::AlreadyExistsError(
        absl::StrCat("duplicate user intent id ", intent.id));
  }
  entries_.push_back(std::move(intent));
  ++generation_;
  return absl::OkStatus();
}

const UserIntent* UserIntentTable::Find(absl::string_view id) const {
  for (const UserIntent& u : entries_) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

}  // namespace idnv

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

// Intent forms: user intents (natural-language sentences) and network
// intents (the tuple form carried through the rest of the pipeline).

#ifndef IDNV_INTENT_H_
#define IDNV_INTENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/string_view.h"
#include "idnv/taxonomy.h"

namespace idnv {

enum class Proto { kAny, kTcp, kUdp };
enum class Action { kAllow, kBlock };

absl::string_view ProtoName(Proto p);   // "any", "tcp", "udp"
absl::string_view ActionName(Action a);  // "allow", "block"

// Traffic classifier. An empty port set means any port. A negated set
// matches every port except the listed ones; it only appears on residual
// edges produced by conflict resolution and never in intent files.
struct Classifier {
  Proto proto = Proto::kAny;
  std::set<uint16_t> ports;
  bool ports_negated = false;

  bool AnyPort() const { return ports.empty(); }
  bool MatchesProto(Proto p) const;
  bool MatchesPort(uint16_t port) const;
  bool Matches(Proto p, uint16_t port) const {
    return MatchesProto(p) && MatchesPort(port);
  }
  bool RestrictsPorts() const { return !ports.empty(); }

  // Smallest port matched by both, if the two classifiers intersect.
  std::optional<uint16_t> FirstCommonPort(const Classifier& other) const;
  // A concrete protocol matched by both, preferring TCP.
  std::optional<Proto> FirstCommonProto(const Classifier& other) const;
  bool Intersects(const Classifier& other) const {
    return FirstCommonProto(other).has_value() &&
           FirstCommonPort(other).has_value();
  }

  // "tcp:80,443", "any:*", "udp:!53".
  std::string ToString() const;

  friend bool operator==(const Classifier&, const Classifier&) = default;
};

// Network function kinds come from a process-wide registry. Registration
// order doubles as the tie-break order when merging chains.
class NfKind {
 public:
  static NfKind LB();
  static NfKind IDS();
  static NfKind WEB();
  static NfKind DNS();
  static NfKind DDOS();
  static NfKind FW();

  static std::optional<NfKind> FromName(absl::string_view name);
  static NfKind Register(absl::string_view name);
  static std::vector<NfKind> All();

  const std::string& name() const;
  int rank() const { return rank_; }

  friend auto operator<=>(NfKind, NfKind) = default;

 private:
  explicit NfKind(int rank) : rank_(rank) {}
  int rank_;
};

std::string ChainToString(const std::vector<NfKind>& chain,
                          absl::string_view sep = ",");

struct NetworkIntent {
  std::string id;
  std::optional<std::string> origin;  // UserIntent id, for NL intents.
  EndpointGroupRef src;
  EndpointGroupRef dst;
  Classifier classifier;
  Action action = Action::kAllow;
  std::vector<NfKind> chain;
  std::optional<double> bandwidth_mbps;

  // Sum of endpoint-group depths, plus one when ports are restricted.
  int Specificity() const {
    return src.Depth() + dst.Depth() + (classifier.RestrictsPorts() ? 1 : 0);
  }

  absl::Status Validate() const;

  friend bool operator==(const NetworkIntent&, const NetworkIntent&) = default;
};

struct UserIntent {
  std::string id;
  std::string text;
  int64_t submitted_at = 0;
};

// Ordered id -> NetworkIntent table. Every mutation bumps `generation`.
class IntentTable {
 public:
  absl::Status Insert(NetworkIntent intent);
  absl::Status Replace(NetworkIntent intent);
  absl::Status Remove(absl::string_view id);

  const NetworkIntent* Find(absl::string_view id) const;
  const std::map<std::string, NetworkIntent, std::less<>>& entries() const {
    return entries_;
  }
  // Intents in insertion order.
  std::vector<const NetworkIntent*> InOrder() const;
  uint64_t generation() const { return generation_; }
  size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, NetworkIntent, std::less<>> entries_;
  std::vector<std::string> order_;
  uint64_t generation_ = 0;
};

class UserIntentTable {
 public:
  absl::Status Insert(UserIntent intent);
  const UserIntent* Find(absl::string_view id) const;
  const std::vector<UserIntent>& entries() const { return entries_; }
  uint64_t generation() const { return generation_; }

 private:
  std::vector<UserIntent> entries_;
  uint64_t generation_ = 0;
};

}  // namespace idnv

#endif  // IDNV_INTENT_H_

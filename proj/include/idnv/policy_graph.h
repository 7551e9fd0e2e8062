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

// Policy graph abstraction: endpoint-group nodes joined by classified edges
// that carry an action and a network-function chain. Conflicts are found
// extensionally against the host inventory and resolved point by point.

#ifndef IDNV_POLICY_GRAPH_H_
#define IDNV_POLICY_GRAPH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/taxonomy.h"
#include "json.hpp"

namespace idnv {

struct PgaEdge {
  std::string id;         // Unique within a graph.
  std::string intent_id;  // Provenance.
  EndpointGroupRef src;
  EndpointGroupRef dst;
  Classifier classifier;
  Action action = Action::kAllow;
  std::vector<NfKind> chain;
  std::optional<double> bandwidth_mbps;
  int specificity = 0;
  int64_t sequence = 0;  // Submission order; only FirstWriterWins reads it.

  // All fields except `sequence`, in a fixed layout.
  std::string CanonicalString() const;
  friend bool operator==(const PgaEdge&, const PgaEdge&) = default;
};

PgaEdge EdgeFromIntent(const NetworkIntent& intent, int64_t sequence);

struct PolicyGraph {
  std::vector<PgaEdge> edges;

  static PolicyGraph FromIntents(const std::vector<NetworkIntent>& intents);

  // Sorts edges by id.
  void Canonicalize();
  std::string CanonicalString() const;
  // One node per endpoint group (lexicographic), one edge per PgaEdge
  // labelled "action/proto:ports/chain".
  std::string ToDot() const;
};

struct OverlapWitness {
  std::string src_host;
  std::string dst_host;
  Proto proto = Proto::kTcp;
  uint16_t port = 0;

  friend bool operator==(const OverlapWitness&, const OverlapWitness&) = default;
};

// Present iff both endpoint-group pairs share members and the classifiers
// intersect. Hosts are the first shared members in inventory order.
std::optional<OverlapWitness> EdgesOverlap(const PgaEdge& a, const PgaEdge& b,
                                           const HostInventory& inv,
                                           const LabelTaxonomy& tax);

enum class ConflictKind { kAction, kChainOrder, kBandwidth };
absl::string_view ConflictKindName(ConflictKind kind);

struct Resolution {
  std::string winner;
  std::string rule;
};

struct Conflict {
  ConflictKind kind = ConflictKind::kAction;
  std::string left;   // Lexicographically smaller edge id.
  std::string right;
  OverlapWitness witness;
  std::optional<Resolution> resolution;
};

// {"kind", "left", "right", "witness": {...}, "resolution": {...}}.
nlohmann::ordered_json ConflictToJson(const Conflict& c);

// True when the union of both chains' orders has a cycle.
bool ChainsContradict(const std::vector<NfKind>& a,
                      const std::vector<NfKind>& b);

// Merges chains given in precedence order by a stable topological sort of
// the union order, registry order breaking ties. A chain whose constraints
// would close a cycle keeps its functions but loses its ordering; the number
// of such chains is written to `discarded` when non-null.
std::vector<NfKind> MergeChains(
    const std::vector<const std::vector<NfKind>*>& by_precedence,
    int* discarded = nullptr);

// Pairwise conflicts, sorted by (left, right, kind).
std::vector<Conflict> DetectConflicts(const std::vector<PgaEdge>& edges,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax);

enum class ResolutionPolicy {
  kSpecificityThenDeny,
  kDenyOverrides,
  kFirstWriterWins,
};
absl::string_view ResolutionPolicyName(ResolutionPolicy policy);
// Accepts "specificity-then-deny" as well as "SpecificityThenDeny".
std::optional<ResolutionPolicy> ResolutionPolicyFromName(absl::string_view name);

// True when `f` takes precedence over `e` on a point where their actions
// differ. Only meaningful when f.action != e.action.
bool Beats(const PgaEdge& f, const PgaEdge& e, ResolutionPolicy policy);

struct ResolveResult {
  std::vector<PgaEdge> edges;  // Conflict-free, sorted by id.
  std::vector<Conflict> log;   // Input conflicts with resolution filled in.
};

// Every point (src host, dst host, proto, port) keeps the action of the edges
// that are not beaten there by an opposite-action edge. Surviving allow edges
// that disagree on the chain get the merged chain on the shared points. Edges
// that lose part of their coverage are replaced by residual pieces whose
// endpoint groups are narrowed with explicit host lists; edges that lose all
// of it are dropped. Fails with FailedPrecondition ("unresolvable conflict")
// when FirstWriterWins meets two opposite actions with the same sequence.
absl::StatusOr<ResolveResult> Resolve(const std::vector<Conflict>& conflicts,
                                      const std::vector<PgaEdge>& edges,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax,
                                      ResolutionPolicy policy);

struct ComposeResult {
  PolicyGraph graph;
  std::vector<Conflict> log;
};

// Union of both edge sets (identical edges deduplicated), then detection and
// resolution. Edges sharing an id must be identical.
absl::StatusOr<ComposeResult> Compose(const PolicyGraph& g1,
                                      const PolicyGraph& g2,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax,
                                      ResolutionPolicy policy);

}  // namespace idnv

#endif  // IDNV_POLICY_GRAPH_H_

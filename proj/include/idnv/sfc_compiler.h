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

// Compiles a conflict-free policy graph into logical rules (match plus a
// waypoint path) and projects those into per-switch flow tables.

#ifndef IDNV_SFC_COMPILER_H_
#define IDNV_SFC_COMPILER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/policy_graph.h"
#include "idnv/taxonomy.h"
#include "idnv/topology.h"

namespace idnv {

// Links and NF instances a single intent must avoid. Filled in by the
// remediation loop.
struct Exclusions {
  std::set<LinkKey> links;
  std::set<std::pair<std::string, std::string>> nf_instances;  // (kind, sw)

  bool empty() const { return links.empty() && nf_instances.empty(); }
  bool ExcludesLink(absl::string_view a, absl::string_view b) const {
    return links.contains(MakeLinkKey(a, b));
  }
  bool ExcludesNf(NfKind kind, absl::string_view sw) const {
    return nf_instances.contains({kind.name(), std::string(sw)});
  }
};

struct Waypoint {
  NfKind kind;
  std::string at_switch;
  size_t hop = 0;  // Index into the rule path.

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

// Hop distance from every switch to `to`; unreachable switches are absent.
std::map<std::string, int> HopDistances(const Topology& t, absl::string_view to,
                                        const Exclusions* excl = nullptr);

// Shortest hop path from a to b, taking the smallest next-hop id on ties.
// FailedPrecondition "Unreachable: a -> b" when disconnected.
absl::StatusOr<std::vector<std::string>> ShortestPath(
    const Topology& t, absl::string_view a, absl::string_view b,
    const Exclusions* excl = nullptr);

// Greedy placement: each chain element takes the instance minimising
// dist(previous, instance) + dist(instance, dst), smaller switch id on ties.
// NotFound "MissingNF: <kind>" or FailedPrecondition "Unreachable: ...".
// The returned waypoints have hop = 0; ComputePath fills it in.
absl::StatusOr<std::vector<Waypoint>> PlaceChain(
    const Topology& t, const std::vector<NfKind>& chain,
    absl::string_view src_sw, absl::string_view dst_sw,
    const Exclusions* excl = nullptr);

// Concatenated shortest paths between [src, w1, ..., wk, dst] with repeated
// consecutive switches collapsed. Sets each waypoint's hop index.
absl::StatusOr<std::vector<std::string>> ComputePath(
    const Topology& t, absl::string_view src_sw,
    std::vector<Waypoint>& waypoints, absl::string_view dst_sw,
    const Exclusions* excl = nullptr);

struct LogicalRule {
  std::string rule_id;
  std::string intent_id;
  std::string edge_id;
  std::vector<Ipv4> src_ips;  // Sorted.
  std::vector<Ipv4> dst_ips;  // Sorted.
  Classifier classifier;
  Action action = Action::kAllow;
  std::string src_switch;
  std::string dst_switch;
  // Allow: src_switch .. dst_switch. Block: just src_switch.
  std::vector<std::string> path;
  std::vector<Waypoint> waypoints;
  std::optional<double> bandwidth_mbps;
  int specificity = 0;
  int priority = 0;

  bool Matches(Ipv4 src, Ipv4 dst, Proto proto, uint16_t port) const;
  std::vector<NfKind> ChainKinds() const;
  std::string ToString() const;

  friend bool operator==(const LogicalRule&, const LogicalRule&) = default;
};

// Checks the rule invariants: connected path between the attach switches and
// waypoints on the path in chain order, each hosted where it claims.
absl::Status ValidateRule(const LogicalRule& rule, const Topology& t);

// Highest priority first, rule id breaking ties; this is also the data plane
// lookup order.
bool RuleOrder(const LogicalRule& a, const LogicalRule& b);

// The first rule in RuleOrder matching the header, or nullptr.
const LogicalRule* MatchingRule(const std::vector<LogicalRule>& rules,
                                Ipv4 src, Ipv4 dst, Proto proto,
                                uint16_t port);

enum class FailureKind { kMissingNf, kUnreachable, kAmbiguousPath };
absl::string_view FailureKindName(FailureKind kind);

struct CompileFailure {
  FailureKind kind = FailureKind::kUnreachable;
  std::string intent_id;
  std::string edge_id;
  std::string detail;
  std::optional<NfKind> nf;      // kMissingNf.
  std::optional<LinkKey> leg;    // kUnreachable: the disconnected anchors.
};

struct CompileOptions {
  // Every rule gets the same priority; lookup falls back to rule order.
  bool uniform_priority = false;
  std::map<std::string, Exclusions, std::less<>> exclusions;  // By intent.
};

struct CompileResult {
  std::vector<LogicalRule> rules;  // In rule id order.
  std::vector<CompileFailure> failures;
};

inline constexpr int kBasePriority = 1000;
int RulePriority(int specificity, Action action);

// One rule per (source attach switch, destination attach switch) group of
// every edge, in edge order. Rule ids are r00001, r00002, ... Failures are
// collected per edge; the other edges still compile.
CompileResult CompileLogical(const std::vector<PgaEdge>& edges,
                             const HostInventory& inv,
                             const LabelTaxonomy& tax, const Topology& t,
                             const CompileOptions& options = {});

struct FlowMatch {
  std::optional<int> in_port;
  std::vector<Ipv4> src_ips;
  std::vector<Ipv4> dst_ips;
  Classifier classifier;

  bool Matches(int in_port, Ipv4 src, Ipv4 dst, Proto proto,
               uint16_t port) const;
  std::string ToString() const;

  friend bool operator==(const FlowMatch&, const FlowMatch&) = default;
};

enum class FlowAction { kForward, kDrop };

struct FlowEntry {
  std::string switch_id;
  int priority = 0;
  FlowMatch match;
  FlowAction action = FlowAction::kDrop;
  int out_port = 0;
  // Functions applied at this hop.
  std::vector<NfKind> nfs;
  std::string rule_id;

  // "prio match action # rule_id" without the switch column.
  std::string ToString() const;

  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

// Table order: priority desc, rule id, in_port entries first, then match.
bool EntryOrder(const FlowEntry& a, const FlowEntry& b);

struct SwitchConfig {
  std::string switch_id;
  std::vector<FlowEntry> entries;  // Kept in EntryOrder; default is drop.

  void Sort();
  std::string Dump() const;

  friend bool operator==(const SwitchConfig&, const SwitchConfig&) = default;
};

using SwitchConfigs = std::map<std::string, SwitchConfig>;

// Every topology switch gets a table. Allow rules install one forward entry
// per hop and one delivery entry per destination host on the last hop; block
// rules install a drop at the source switch.
SwitchConfigs CompilePhysical(const std::vector<LogicalRule>& rules,
                              const Topology& t, const HostInventory& inv);

// All tables, one "sw prio match action # rule_id" line per entry.
std::string DumpConfigs(const SwitchConfigs& configs);

struct LinkViolation {
  LinkKey link;
  double reserved_mbps = 0;
  double capacity_mbps = 0;
  std::vector<std::string> intent_ids;
};

struct FeasibilityReport {
  std::vector<LinkViolation> violations;
  std::vector<CompileFailure> failures;

  bool clean() const { return violations.empty() && failures.empty(); }
};

// Bandwidth is reserved once per (intent, link) across its allow rules.
FeasibilityReport CheckExternalFeasibility(
    const std::vector<LogicalRule>& rules,
    const std::vector<CompileFailure>& failures, const Topology& t);

}  // namespace idnv

#endif  // IDNV_SFC_COMPILER_H_

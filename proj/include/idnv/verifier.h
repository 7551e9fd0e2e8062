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

// Full-life-cycle verification: six checks along the chain from user intent
// to observed forwarding, the remediation loop, and the consolidated report.

#ifndef IDNV_VERIFIER_H_
#define IDNV_VERIFIER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/dataplane_sim.h"
#include "idnv/intent.h"
#include "idnv/policy_graph.h"
#include "idnv/sfc_compiler.h"
#include "idnv/taxonomy.h"
#include "idnv/topology.h"
#include "json.hpp"

namespace idnv {

enum class CheckId {
  kIEqIPrime,
  kRInternalConflictFree,
  kREqIPrime,
  kRExternalFeasible,
  kROffEqRPrime,
  kROnEqF,
};
inline constexpr CheckId kAllChecks[] = {
    CheckId::kIEqIPrime,         CheckId::kRInternalConflictFree,
    CheckId::kREqIPrime,         CheckId::kRExternalFeasible,
    CheckId::kROffEqRPrime,      CheckId::kROnEqF};
absl::string_view CheckIdName(CheckId id);

enum class Locus { kInternal, kExternal };
enum class Mode { kOffline, kOnline };
enum class Purpose { kFeasibility, kValidity };

struct CheckClass {
  Locus locus;
  Mode mode;
  Purpose purpose;
  friend bool operator==(const CheckClass&, const CheckClass&) = default;
};
// Fixed per check.
CheckClass ClassOf(CheckId id);

enum class Severity { kError, kWarning };

struct Finding {
  CheckId check = CheckId::kIEqIPrime;
  Severity severity = Severity::kError;
  std::string subject;  // Intent, rule, switch or link, depending on check.
  std::string detail;
  std::string switch_id;  // Offline findings.
  std::string rule_id;    // Offline findings.
  CheckClass taxonomy;

  nlohmann::ordered_json ToJson() const;
};

Finding MakeFinding(CheckId check, Severity severity, std::string subject,
                    std::string detail);
bool HasErrors(const std::vector<Finding>& findings);

// IEqIPrime for one normalized sentence.
std::vector<Finding> CheckUserIntents(
    const std::vector<UserIntent>& users,
    const std::vector<NetworkIntent>& normalized, const LabelTaxonomy& tax);

// RInternalConflictFree: the composed graph has no conflicts left.
std::vector<Finding> CheckConflictFree(const PolicyGraph& g,
                                       const HostInventory& inv,
                                       const LabelTaxonomy& tax);

// REqIPrime: every intent is either carried by rules that keep its action,
// classifier and chain order, or was overridden by a logged resolution; and
// every rule traces back to an edge and an intent.
std::vector<Finding> CheckRulesMatchIntents(
    const std::vector<NetworkIntent>& intents, const PolicyGraph& g,
    const std::vector<Conflict>& log, const CompileResult& compiled,
    const HostInventory& inv, const LabelTaxonomy& tax);

// RExternalFeasible.
std::vector<Finding> CheckExternal(const FeasibilityReport& report);

// The three feasibility checks after composition.
std::vector<Finding> VerifyFeasibility(
    const std::vector<NetworkIntent>& intents, const PolicyGraph& g,
    const std::vector<Conflict>& log, const CompileResult& compiled,
    const Topology& t, const HostInventory& inv, const LabelTaxonomy& tax);

// ROffEqRPrime: the snapshot against a fresh projection of `rules`, entry by
// entry keyed on (rule id, in_port, match). One finding per missing, extra or
// altered entry.
std::vector<Finding> VerifyOffline(const std::vector<LogicalRule>& rules,
                                   const Topology& t, const HostInventory& inv,
                                   const SwitchConfigs& snapshot);

struct Compliance {
  int packets_checked = 0;
  int packets_compliant = 0;
  friend bool operator==(const Compliance&, const Compliance&) = default;
};

struct OnlineResult {
  std::vector<Finding> findings;
  // Keyed by the intent of the rule that governs each packet, or by the
  // generating intent when no rule matches.
  std::map<std::string, Compliance> compliance;
};

// True when the record honours the contract of `rule` (nullptr: no rule
// matches, so the packet must die at its ingress for want of a match).
bool RecordComplies(const BehaviorRecord& rec, const LogicalRule* rule);

// ROnEqF. One error per intent with more than `tolerance` of its packets
// non-compliant. FailedPrecondition "StaleBehaviorTable" when the table was
// recorded at another epoch.
absl::StatusOr<OnlineResult> VerifyOnline(const std::vector<LogicalRule>& rules,
                                          const BehaviorTable& table,
                                          uint64_t current_epoch,
                                          double tolerance = 0);

enum class RemediationStatus { kNothingToDo, kResolved, kExhausted };
absl::string_view RemediationStatusName(RemediationStatus s);

struct RemediationAction {
  int attempt = 0;
  std::string kind;  // "reinstall" or "recompile".
  std::string subject;
  std::string detail;
};

struct RemediationLog {
  std::vector<RemediationAction> actions;
  std::vector<int> errors_per_round;  // Round 0 is the initial verification.
  RemediationStatus status = RemediationStatus::kNothingToDo;
  std::vector<std::string> failing_intents;  // Set when exhausted.

  nlohmann::ordered_json ToJson() const;
};

struct CycleOptions {
  ResolutionPolicy policy = ResolutionPolicy::kSpecificityThenDeny;
  int max_retries = 0;
  int packets_per_intent = 4;
  uint64_t seed = 11;
  bool capacity_enforcement = false;
  double mbps_per_packet = 1.0;
  double tolerance = 0;
};

enum class Verdict { kPass, kFail, kIncomplete };
absl::string_view VerdictName(Verdict v);

struct CheckRun {
  CheckId id;
  bool executed = false;
  int subjects = 0;
};

struct VerificationReport {
  std::map<std::string, uint64_t> generations;
  std::vector<CheckRun> checks;
  std::vector<Conflict> conflicts;
  std::vector<Finding> findings;
  std::map<std::string, Compliance> compliance;
  RemediationLog remediation;
  Verdict verdict = Verdict::kIncomplete;
  std::string error;  // Set when incomplete.
  std::map<std::string, double> timings_ms;

  // Stable field order; every duration sits under "timings".
  nlohmann::ordered_json ToJson() const;
  int ExitCode() const;
};

// One verification cycle with its tables. The stages run in the order of
// the public methods; FullCycle strings them together.
class VerificationEngine {
 public:
  VerificationEngine(Environment env, Topology topology, CycleOptions options);

  // Parses the intent file and, when given, the natural-language intents
  // (normalized and checked for I = I').
  absl::Status LoadIntents(absl::string_view dsl,
                           std::optional<absl::string_view> user_source);
  absl::Status LoadIntents(std::vector<NetworkIntent> intents);
  absl::Status Compose();
  void Compile();
  // Installs the projection and then applies `faults` in order.
  absl::Status Deploy(const std::vector<FaultSpec>& faults);
  // Replaces the packets VerifyValidity injects. Without this the engine
  // samples its own from the seed on first use.
  void SetWorkload(std::vector<WorkloadItem> workload) {
    workload_ = std::move(workload);
  }
  // Offline check, fresh workload, online check.
  absl::StatusOr<std::vector<Finding>> VerifyValidity();
  // Repairs what the findings point at and re-verifies, at most
  // `max_retries` times.
  absl::StatusOr<RemediationLog> FeedbackLoop(std::vector<Finding> findings,
                                              int max_retries);

  const std::vector<NetworkIntent>& intents() const { return intents_; }
  const PolicyGraph& graph() const { return graph_; }
  const std::vector<Conflict>& conflicts() const { return conflicts_; }
  const CompileResult& compiled() const { return compiled_; }
  const SwitchConfigs& expected_tables() const { return expected_; }
  const SimNetwork& network() const { return net_; }
  SimNetwork& mutable_network() { return net_; }
  const BehaviorTable& behavior() const { return behavior_; }
  const std::vector<WorkloadItem>& workload() const { return workload_; }
  const std::map<std::string, Compliance>& compliance() const {
    return compliance_;
  }
  const std::vector<Finding>& front_findings() const { return front_; }
  const std::vector<Finding>& feasibility_findings() const {
    return feasibility_;
  }
  const std::vector<Finding>& validity_findings() const { return validity_; }
  // Front, feasibility and latest validity findings.
  std::vector<Finding> AllFindings() const;
  const std::map<CheckId, int>& subjects() const { return subjects_; }
  std::map<std::string, uint64_t> Generations() const;
  std::map<std::string, double>& timings_ms() { return timings_; }

 private:
  Environment env_;
  Topology topology_;
  CycleOptions options_;
  std::vector<UserIntent> users_;
  std::vector<NetworkIntent> intents_;
  uint64_t intent_generation_ = 0;
  PolicyGraph graph_;
  std::vector<Conflict> conflicts_;
  CompileOptions compile_options_;
  CompileResult compiled_;
  uint64_t rule_generation_ = 0;
  SwitchConfigs expected_;
  SimNetwork net_;
  uint64_t snapshot_epoch_ = 0;
  std::vector<WorkloadItem> workload_;
  BehaviorTable behavior_;
  std::map<std::string, Compliance> compliance_;
  std::vector<Finding> front_;        // IEqIPrime and RInternalConflictFree.
  std::vector<Finding> feasibility_;  // REqIPrime and RExternalFeasible.
  std::vector<Finding> validity_;     // ROffEqRPrime and ROnEqF.
  std::map<CheckId, int> subjects_;
  std::map<std::string, double> timings_;
};

struct CycleInputs {
  Environment env;
  Topology topology;
  std::string intent_source;
  std::optional<std::string> user_intent_source;
  std::vector<FaultSpec> faults;
};

// parse -> (normalize, I = I') -> compose -> compile -> feasibility ->
// install -> faults -> offline -> workload -> online -> feedback loop.
// A hard error at any stage returns a partial report marked incomplete.
VerificationReport FullCycle(const CycleInputs& inputs,
                             const CycleOptions& options);

}  // namespace idnv

#endif  // IDNV_VERIFIER_H_

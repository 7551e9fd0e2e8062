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

// In-process data plane. Packets follow first-match lookups through the
// installed tables; faults can be injected into those tables.

#ifndef IDNV_DATAPLANE_SIM_H_
#define IDNV_DATAPLANE_SIM_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/sfc_compiler.h"
#include "idnv/taxonomy.h"
#include "idnv/topology.h"
#include "json.hpp"

namespace idnv {

inline constexpr int kDefaultTtl = 32;

struct Packet {
  uint64_t pkt_id = 0;
  Ipv4 src_ip;
  Ipv4 dst_ip;
  Proto proto = Proto::kTcp;  // Concrete: tcp or udp.
  uint16_t dst_port = 0;
  int ttl = kDefaultTtl;
};

enum class Outcome {
  kDelivered,
  kDroppedByRule,
  kDroppedNoMatch,
  kDroppedTtl,
  kDroppedCapacity,
  // Left the network towards a host other than the destination.
  kMisdelivered,
};

struct BehaviorRecord {
  uint64_t pkt_id = 0;
  std::optional<std::string> intent_id;
  // Header of the injected packet, kept for the online check.
  Ipv4 src_ip;
  Ipv4 dst_ip;
  Proto proto = Proto::kTcp;
  uint16_t dst_port = 0;
  std::vector<std::string> path;
  std::vector<NfKind> nfs;
  Outcome outcome = Outcome::kDroppedNoMatch;
  // Switch for rule and no-match drops, "a-b" for capacity drops, host id
  // for misdelivery.
  std::string at;

  // "Delivered", "DroppedByRule(s1)", "DroppedCapacity(s1-s2)", ...
  std::string OutcomeString() const;
};

struct BehaviorTable {
  uint64_t epoch = 0;
  std::vector<BehaviorRecord> records;

  // Header pkt_id,intent_id,outcome,path,nfs; lists are '/'-joined.
  std::string ToCsv() const;
};

struct WorkloadItem {
  Packet packet;
  std::string ingress;
  std::optional<std::string> intent_id;
};

// Ports drawn for intents that match any port.
inline constexpr uint16_t kSamplePorts[] = {53, 80, 443, 8080};

// `per_intent` packets for every intent, each between a random pair of
// distinct member hosts, with a protocol and port the classifier accepts.
// Intents without such a pair get none. Packet ids run from `first_id`.
std::vector<WorkloadItem> SampleIntentTraffic(
    const std::vector<NetworkIntent>& intents, const HostInventory& inv,
    const LabelTaxonomy& tax, int per_intent, std::mt19937_64& rng,
    uint64_t first_id = 1);

enum class FaultKind { kDropEntry, kCorruptOutPort, kShufflePriority };
absl::string_view FaultKindName(FaultKind kind);

struct FaultSpec {
  FaultKind kind = FaultKind::kDropEntry;
  std::string switch_id;
  std::string rule_id;
  int wrong_port = 0;  // 0: pick one from the seed.
  int delta = 0;       // 0: pick one from the seed.
  uint64_t seed = 0;

  nlohmann::ordered_json ToJson() const;
};

// A JSON list of {"kind", "switch", "rule_id", "wrong_port"?, "delta"?,
// "seed"?} objects.
absl::StatusOr<std::vector<FaultSpec>> ParseFaultScript(
    const nlohmann::ordered_json& j);

struct CapacityAccounting {
  bool enabled = false;
  // Each packet consumes this much of a link's capacity within one workload.
  double mbps_per_packet = 1.0;
};

class SimNetwork {
 public:
  SimNetwork(Topology topology, HostInventory inventory, uint64_t seed = 0);

  // Replaces every table; switches absent from `configs` fall back to the
  // default drop. NotFound "UnknownSwitch: <id>" on foreign switches.
  absl::Status Install(const SwitchConfigs& configs);
  // Replaces only the listed tables.
  absl::Status Reinstall(const SwitchConfigs& configs);
  SwitchConfigs Snapshot() const;

  BehaviorRecord ForwardOne(absl::string_view ingress, const Packet& pkt) const;
  BehaviorTable InjectWorkload(const std::vector<WorkloadItem>& workload,
                               const CapacityAccounting& capacity = {}) const;

  // Mutates the first entry of `rule_id` on the switch. NotFound
  // "NoSuchEntry: ..." when there is none.
  absl::Status InjectFault(const FaultSpec& fault);

  uint64_t epoch() const { return epoch_; }
  const std::vector<FaultSpec>& fault_log() const { return fault_log_; }
  const Topology& topology() const { return topology_; }
  const HostInventory& inventory() const { return inventory_; }

 private:
  absl::Status Check(const SwitchConfigs& configs) const;

  Topology topology_;
  HostInventory inventory_;
  uint64_t seed_;
  uint64_t epoch_ = 0;
  SwitchConfigs tables_;
  std::vector<FaultSpec> fault_log_;
};

}  // namespace idnv

#endif  // IDNV_DATAPLANE_SIM_H_

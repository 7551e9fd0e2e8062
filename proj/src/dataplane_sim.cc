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

#include "idnv/dataplane_sim.h"

#include <algorithm>
#include <map>
#include <random>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace idnv {

std::string BehaviorRecord::OutcomeString() const {
  switch (outcome) {
    case Outcome::kDelivered:
      return "Delivered";
    case Outcome::kDroppedByRule:
      return absl::StrCat("DroppedByRule(", at, ")");
    case Outcome::kDroppedNoMatch:
      return absl::StrCat("DroppedNoMatch(", at, ")");
    case Outcome::kDroppedTtl:
      return "DroppedTtl";
    case Outcome::kDroppedCapacity:
      return absl::StrCat("DroppedCapacity(", at, ")");
    case Outcome::kMisdelivered:
      return absl::StrCat("Misdelivered(", at, ")");
  }
  return "?";
}

std::string BehaviorTable::ToCsv() const {
  std::string out = "pkt_id,intent_id,outcome,path,nfs\n";
  for (const BehaviorRecord& r : records) {
    absl::StrAppend(&out, r.pkt_id, ",", r.intent_id.value_or(""), ",",
                    r.OutcomeString(), ",", absl::StrJoin(r.path, "/"), ",",
                    ChainToString(r.nfs, "/"), "\n");
  }
  return out;
}

std::vector<WorkloadItem> SampleIntentTraffic(
    const std::vector<NetworkIntent>& intents, const HostInventory& inv,
    const LabelTaxonomy& tax, int per_intent, std::mt19937_64& rng,
    uint64_t first_id) {
  std::vector<WorkloadItem> out;
  uint64_t id = first_id;
  for (const NetworkIntent& intent : intents) {
    HostSet src = EpgMemberBits(intent.src, inv, tax);
    HostSet dst = EpgMemberBits(intent.dst, inv, tax);
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t s = src.find_first(); s != HostSet::npos; s = src.find_next(s)) {
      for (size_t d = dst.find_first(); d != HostSet::npos;
           d = dst.find_next(d)) {
        if (s != d) pairs.push_back({s, d});
      }
    }
    if (pairs.empty()) continue;
    const Classifier& c = intent.classifier;
    std::vector<uint16_t> ports;
    if (c.RestrictsPorts() && !c.ports_negated) {
      ports.assign(c.ports.begin(), c.ports.end());
    } else {
      for (uint16_t p : kSamplePorts) {
        if (c.MatchesPort(p)) ports.push_back(p);
      }
    }
    if (ports.empty()) continue;
    for (int k = 0; k < per_intent; ++k) {
      auto [s, d] = pairs[std::uniform_int_distribution<size_t>(
          0, pairs.size() - 1)(rng)];
      Proto proto = c.proto;
      if (proto == Proto::kAny) {
        proto = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                    ? Proto::kTcp
                    : Proto::kUdp;
      }
      uint16_t port =
          ports[std::uniform_int_distribution<size_t>(0, ports.size() - 1)(rng)];
      WorkloadItem item;
      item.packet = Packet{id++, inv.hosts()[s].ip, inv.hosts()[d].ip, proto,
                           port};
      item.ingress = inv.hosts()[s].attach_switch;
      item.intent_id = intent.id;
      out.push_back(std::move(item));
    }
  }
  return out;
}

absl::string_view FaultKindName(FaultKind kind) {
  switch (kind) {
    case FaultKind::kDropEntry:
      return "DropEntry";
    case FaultKind::kCorruptOutPort:
      return "CorruptOutPort";
    case FaultKind::kShufflePriority:
      return "ShufflePriority";
  }
  return "?";
}

nlohmann::ordered_json FaultSpec::ToJson() const {
  nlohmann::ordered_json j;
  j["kind"] = std::string(FaultKindName(kind));
  j["switch"] = switch_id;
  j["rule_id"] = rule_id;
  if (kind == FaultKind::kCorruptOutPort) j["wrong_port"] = wrong_port;
  if (kind == FaultKind::kShufflePriority) j["delta"] = delta;
  if (seed != 0) j["seed"] = seed;
  return j;
}

absl::StatusOr<std::vector<FaultSpec>> ParseFaultScript(
    const nlohmann::ordered_json& j) {
  if (!j.is_array()) {
    return absl::InvalidArgumentError("fault script must be a list");
  }
  std::vector<FaultSpec> out;
  try {
    for (const auto& f : j) {
      FaultSpec spec;
      std::string kind = f.at("kind").get<std::string>();
      if (kind == "DropEntry") {
        spec.kind = FaultKind::kDropEntry;
      } else if (kind == "CorruptOutPort") {
        spec.kind = FaultKind::kCorruptOutPort;
      } else if (kind == "ShufflePriority") {
        spec.kind = FaultKind::kShufflePriority;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown fault kind '", kind, "'"));
      }
      spec.switch_id = f.at("switch").get<std::string>();
      spec.rule_id = f.at("rule_id").get<std::string>();
      spec.wrong_port = f.value("wrong_port", 0);
      spec.delta = f.value("delta", 0);
      spec.seed = f.value("seed", uint64_t{0});
      out.push_back(std::move(spec));
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed fault script: ", e.what()));
  }
  return out;
}

SimNetwork::SimNetwork(Topology topology, HostInventory inventory,
                       uint64_t seed)
    : topology_(std::move(topology)),
      inventory_(std::move(inventory)),
      seed_(seed) {
  (void)topology_.AttachHosts(inventory_);
  for (const std::string& sw : topology_.switches()) {
    tables_[sw].switch_id = sw;
  }
}

absl::Status SimNetwork::Check(const SwitchConfigs& configs) const {
  for (const auto& [sw, config] : configs) {
    if (!topology_.HasSwitch(sw)) {
      return absl::NotFoundError(absl::StrCat("UnknownSwitch: ", sw));
    }
  }
  return absl::OkStatus();
}

absl::Status SimNetwork::Install(const SwitchConfigs& configs) {
  if (absl::Status s = Check(configs); !s.ok()) return s;
  for (auto& [sw, table] : tables_) {
    auto it = configs.find(sw);
    table = it == configs.end() ? SwitchConfig{sw, {}} : it->second;
    table.switch_id = sw;
  }
  ++epoch_;
  return absl::OkStatus();
}

absl::Status SimNetwork::Reinstall(const SwitchConfigs& configs) {
  if (absl::Status s = Check(configs); !s.ok()) return s;
  for (const auto& [sw, config] : configs) {
    tables_[sw] = config;
    tables_[sw].switch_id = sw;
  }
  ++epoch_;
  return absl::OkStatus();
}

SwitchConfigs SimNetwork::Snapshot() const { return tables_; }

BehaviorRecord SimNetwork::ForwardOne(absl::string_view ingress,
                                      const Packet& pkt) const {
  BehaviorRecord rec;
  rec.pkt_id = pkt.pkt_id;
  rec.src_ip = pkt.src_ip;
  rec.dst_ip = pkt.dst_ip;
  rec.proto = pkt.proto;
  rec.dst_port = pkt.dst_port;
  int in_port = 0;
  if (const Host* h = inventory_.FindByIp(pkt.src_ip); h != nullptr) {
    in_port = topology_.PortToHost(ingress, h->id).value_or(0);
  }
  std::string sw(ingress);
  int ttl = pkt.ttl;
  while (true) {
    rec.path.push_back(sw);
    auto table = tables_.find(sw);
    const FlowEntry* hit = nullptr;
    if (table != tables_.end()) {
      for (const FlowEntry& e : table->second.entries) {
        if (e.match.Matches(in_port, pkt.src_ip, pkt.dst_ip, pkt.proto,
                            pkt.dst_port)) {
          hit = &e;
          break;
        }
      }
    }
    if (hit == nullptr) {
      rec.outcome = Outcome::kDroppedNoMatch;
      rec.at = sw;
      return rec;
    }
    if (hit->action == FlowAction::kDrop) {
      rec.outcome = Outcome::kDroppedByRule;
      rec.at = sw;
      return rec;
    }
    for (NfKind k : hit->nfs) {
      if (topology_.HostsNf(sw, k)) rec.nfs.push_back(k);
    }
    std::optional<PortPeer> peer = topology_.PeerAt(sw, hit->out_port);
    if (!peer.has_value()) {
      rec.outcome = Outcome::kDroppedNoMatch;
      rec.at = sw;
      return rec;
    }
    if (peer->is_host) {
      const Host* dst = inventory_.FindByIp(pkt.dst_ip);
      if (dst != nullptr && dst->id == peer->id) {
        rec.outcome = Outcome::kDelivered;
      } else {
        rec.outcome = Outcome::kMisdelivered;
        rec.at = peer->id;
      }
      return rec;
    }
    if (--ttl <= 0) {
      rec.outcome = Outcome::kDroppedTtl;
      return rec;
    }
    in_port = topology_.PortToSwitch(peer->id, sw).value_or(0);
    sw = peer->id;
  }
}

BehaviorTable SimNetwork::InjectWorkload(
    const std::vector<WorkloadItem>& workload,
    const CapacityAccounting& capacity) const {
  BehaviorTable table;
  table.epoch = epoch_;
  std::map<LinkKey, double> used;
  for (const WorkloadItem& item : workload) {
    BehaviorRecord rec = ForwardOne(item.ingress, item.packet);
    rec.intent_id = item.intent_id;
    if (capacity.enabled) {
      // Charge each traversed link; the first one out of budget drops the
      // packet there.
      for (size_t i = 0; i + 1 < rec.path.size(); ++i) {
        LinkKey key = MakeLinkKey(rec.path[i], rec.path[i + 1]);
        const Link* link = topology_.FindLink(key.first, key.second);
        if (link == nullptr) continue;
        double& u = used[key];
        if (u + capacity.mbps_per_packet > link->capacity_mbps) {
          rec.path.resize(i + 1);
          rec.outcome = Outcome::kDroppedCapacity;
          rec.at = absl::StrCat(key.first, "-", key.second);
          break;
        }
        u += capacity.mbps_per_packet;
      }
    }
    table.records.push_back(std::move(rec));
  }
  return table;
}

absl::Status SimNetwork::InjectFault(const FaultSpec& fault) {
  auto table = tables_.find(fault.switch_id);
  FlowEntry* target = nullptr;
  if (table != tables_.end()) {
    for (FlowEntry& e : table->second.entries) {
      if (e.rule_id == fault.rule_id) {
        target = &e;
        break;
      }
    }
  }
  if (target == nullptr) {
    return absl::NotFoundError(absl::StrCat("NoSuchEntry: ", fault.rule_id,
                                            " on ", fault.switch_id));
  }
  FaultSpec applied = fault;
  std::mt19937_64 rng(seed_ ^ (fault.seed * 0x9e3779b97f4a7c15ULL));
  switch (fault.kind) {
    case FaultKind::kDropEntry:
      table->second.entries.erase(table->second.entries.begin() +
                                  (target - table->second.entries.data()));
      break;
    case FaultKind::kCorruptOutPort: {
      int ports = topology_.PortCount(fault.switch_id);
      if (applied.wrong_port == 0) {
        std::vector<int> choices;
        for (int p = 1; p <= ports; ++p) {
          if (p != target->out_port) choices.push_back(p);
        }
        if (choices.empty()) {
          return absl::FailedPreconditionError(absl::StrCat(
              "no alternative port on ", fault.switch_id));
        }
        applied.wrong_port = choices[std::uniform_int_distribution<size_t>(
            0, choices.size() - 1)(rng)];
      }
      if (applied.wrong_port < 1 || applied.wrong_port > ports) {
        return absl::InvalidArgumentError(absl::StrCat(
            "port ", applied.wrong_port, " does not exist on ",
            fault.switch_id));
      }
      target->action = FlowAction::kForward;
      target->out_port = applied.wrong_port;
      break;
    }
    case FaultKind::kShufflePriority:
      if (applied.delta == 0) {
        int d = std::uniform_int_distribution<int>(1, 20)(rng);
        applied.delta = (rng() & 1) ? d : -d;
      }
      target->priority += applied.delta;
      table->second.Sort();
      break;
  }
  fault_log_.push_back(applied);
  ++epoch_;
  return absl::OkStatus();
}

}  // namespace idnv

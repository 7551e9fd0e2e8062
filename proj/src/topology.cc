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

#include "idnv/topology.h"

#include <algorithm>

#include "absl/strings/str_cat.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

const std::vector<std::string>& Empty() {
  static const auto* kEmpty = new std::vector<std::string>();
  return *kEmpty;
}

void InsertSorted(std::vector<std::string>& v, const std::string& s) {
  auto it = std::lower_bound(v.begin(), v.end(), s);
  if (it == v.end() || *it != s) v.insert(it, s);
}

}  // namespace

LinkKey MakeLinkKey(absl::string_view a, absl::string_view b) {
  if (b < a) std::swap(a, b);
  return {std::string(a), std::string(b)};
}

absl::StatusOr<Topology> Topology::FromJson(const nlohmann::ordered_json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("topology must be an object");
  }
  Topology t;
  try {
    for (const auto& s : j.value("switches", nlohmann::ordered_json::array())) {
      RETURN_IF_ERROR(t.AddSwitch(s.get<std::string>()));
    }
    for (const auto& l : j.value("links", nlohmann::ordered_json::array())) {
      RETURN_IF_ERROR(t.AddLink(l.at("a").get<std::string>(),
                                l.at("b").get<std::string>(),
                                l.at("capacity").get<double>()));
    }
    for (const auto& n : j.value("nfs", nlohmann::ordered_json::array())) {
      std::string kind = n.at("kind").get<std::string>();
      std::optional<NfKind> k = NfKind::FromName(kind);
      if (!k.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown network function '", kind, "'"));
      }
      RETURN_IF_ERROR(t.AddNf(*k, n.at("switch").get<std::string>()));
    }
  } catch (const nlohmann::ordered_json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed topology: ", e.what()));
  }
  return t;
}

absl::Status Topology::AddSwitch(const std::string& id) {
  if (id.empty()) return absl::InvalidArgumentError("empty switch id");
  if (info_.contains(id)) {
    return absl::AlreadyExistsError(absl::StrCat("duplicate switch '", id, "'"));
  }
  info_.emplace(id, SwitchInfo{});
  InsertSorted(switch_ids_, id);
  return absl::OkStatus();
}

absl::Status Topology::AddLink(const std::string& a, const std::string& b,
                               double capacity_mbps) {
  if (!HasSwitch(a) || !HasSwitch(b)) {
    return absl::InvalidArgumentError(
        absl::StrCat("link ", a, "-", b, " names an unknown switch"));
  }
  if (a == b) {
    return absl::InvalidArgumentError(absl::StrCat("self-loop on ", a));
  }
  if (!(capacity_mbps > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("link ", a, "-", b, " needs a positive capacity"));
  }
  LinkKey key = MakeLinkKey(a, b);
  if (link_index_.contains(key)) {
    return absl::AlreadyExistsError(absl::StrCat("duplicate link ", a, "-", b));
  }
  link_index_[key] = links_.size();
  links_.push_back({a, b, capacity_mbps});
  InsertSorted(info_.find(a)->second.neighbors, b);
  InsertSorted(info_.find(b)->second.neighbors, a);
  return absl::OkStatus();
}

absl::Status Topology::AddNf(NfKind kind, const std::string& at_switch) {
  if (!HasSwitch(at_switch)) {
    return absl::InvalidArgumentError(absl::StrCat(
        kind.name(), " instance placed on unknown switch '", at_switch, "'"));
  }
  if (HostsNf(at_switch, kind)) return absl::OkStatus();
  nfs_.push_back({kind, at_switch});
  return absl::OkStatus();
}

absl::Status Topology::AttachHosts(const HostInventory& inv) {
  for (auto& [id, info] : info_) info.hosts.clear();
  for (const Host& h : inv.hosts()) {
    auto it = info_.find(h.attach_switch);
    if (it == info_.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "host ", h.id, " attaches to unknown switch '", h.attach_switch,
          "'"));
    }
    InsertSorted(it->second.hosts, h.id);
  }
  return absl::OkStatus();
}

bool Topology::HasSwitch(absl::string_view id) const {
  return info_.find(id) != info_.end();
}

const Link* Topology::FindLink(absl::string_view a, absl::string_view b) const {
  auto it = link_index_.find(MakeLinkKey(a, b));
  return it == link_index_.end() ? nullptr : &links_[it->second];
}

const std::vector<std::string>& Topology::Neighbors(
    absl::string_view sw) const {
  auto it = info_.find(sw);
  return it == info_.end() ? Empty() : it->second.neighbors;
}

const std::vector<std::string>& Topology::AttachedHosts(
    absl::string_view sw) const {
  auto it = info_.find(sw);
  return it == info_.end() ? Empty() : it->second.hosts;
}

std::vector<std::string> Topology::NfSwitches(NfKind kind) const {
  std::vector<std::string> out;
  for (const NfInstance& n : nfs_) {
    if (n.kind == kind) InsertSorted(out, n.at_switch);
  }
  return out;
}

bool Topology::HostsNf(absl::string_view sw, NfKind kind) const {
  for (const NfInstance& n : nfs_) {
    if (n.kind == kind && n.at_switch == sw) return true;
  }
  return false;
}

std::optional<int> Topology::PortToSwitch(absl::string_view sw,
                                          absl::string_view neighbor) const {
  const std::vector<std::string>& n = Neighbors(sw);
  auto it = std::lower_bound(n.begin(), n.end(), neighbor);
  if (it == n.end() || *it != neighbor) return std::nullopt;
  return static_cast<int>(it - n.begin()) + 1;
}

std::optional<int> Topology::PortToHost(absl::string_view sw,
                                        absl::string_view host) const {
  const std::vector<std::string>& h = AttachedHosts(sw);
  auto it = std::lower_bound(h.begin(), h.end(), host);
  if (it == h.end() || *it != host) return std::nullopt;
  return static_cast<int>(Neighbors(sw).size() + (it - h.begin())) + 1;
}

std::optional<PortPeer> Topology::PeerAt(absl::string_view sw,
                                         int port) const {
  auto it = info_.find(sw);
  if (it == info_.end() || port < 1) return std::nullopt;
  size_t idx = static_cast<size_t>(port - 1);
  const SwitchInfo& info = it->second;
  if (idx < info.neighbors.size()) return PortPeer{false, info.neighbors[idx]};
  idx -= info.neighbors.size();
  if (idx < info.hosts.size()) return PortPeer{true, info.hosts[idx]};
  return std::nullopt;
}

int Topology::PortCount(absl::string_view sw) const {
  auto it = info_.find(sw);
  if (it == info_.end()) return 0;
  return static_cast<int>(it->second.neighbors.size() +
                          it->second.hosts.size());
}

nlohmann::ordered_json Topology::ToJson() const {
  nlohmann::ordered_json j;
  j["switches"] = switch_ids_;
  j["links"] = nlohmann::ordered_json::array();
  for (const Link& l : links_) {
    j["links"].push_back({{"a", l.a}, {"b", l.b}, {"capacity", l.capacity_mbps}});
  }
  j["nfs"] = nlohmann::ordered_json::array();
  for (const NfInstance& n : nfs_) {
    j["nfs"].push_back({{"kind", n.kind.name()}, {"switch", n.at_switch}});
  }
  return j;
}

}  // namespace idnv

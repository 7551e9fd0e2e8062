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

// Switch-level topology: links with capacities, network-function instances
// pinned to switches, and host attachment points. Port numbers are derived
// deterministically from the neighbour and host lists.

#ifndef IDNV_TOPOLOGY_H_
#define IDNV_TOPOLOGY_H_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/intent.h"
#include "idnv/taxonomy.h"
#include "json.hpp"

namespace idnv {

struct Link {
  std::string a;
  std::string b;
  double capacity_mbps = 0;
};

struct NfInstance {
  NfKind kind;
  std::string at_switch;
};

// Unordered link identity, smaller switch id first.
using LinkKey = std::pair<std::string, std::string>;
LinkKey MakeLinkKey(absl::string_view a, absl::string_view b);

struct PortPeer {
  bool is_host = false;
  std::string id;
};

class Topology {
 public:
  // Parses {"switches": [...], "links": [{"a", "b", "capacity"}],
  // "nfs": [{"kind", "switch"}]}.
  static absl::StatusOr<Topology> FromJson(const nlohmann::ordered_json& j);

  absl::Status AddSwitch(const std::string& id);
  absl::Status AddLink(const std::string& a, const std::string& b,
                       double capacity_mbps);
  absl::Status AddNf(NfKind kind, const std::string& at_switch);
  // Records where each host attaches. Replaces earlier attachments.
  absl::Status AttachHosts(const HostInventory& inv);

  bool HasSwitch(absl::string_view id) const;
  const std::vector<std::string>& switches() const { return switch_ids_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<NfInstance>& nf_instances() const { return nfs_; }
  const Link* FindLink(absl::string_view a, absl::string_view b) const;

  // Sorted neighbour ids; empty for unknown switches.
  const std::vector<std::string>& Neighbors(absl::string_view sw) const;
  const std::vector<std::string>& AttachedHosts(absl::string_view sw) const;
  // Switches hosting an instance of `kind`, sorted.
  std::vector<std::string> NfSwitches(NfKind kind) const;
  bool HostsNf(absl::string_view sw, NfKind kind) const;

  // Ports run from 1: neighbours in id order, then attached hosts in id order.
  std::optional<int> PortToSwitch(absl::string_view sw,
                                  absl::string_view neighbor) const;
  std::optional<int> PortToHost(absl::string_view sw,
                                absl::string_view host) const;
  std::optional<PortPeer> PeerAt(absl::string_view sw, int port) const;
  int PortCount(absl::string_view sw) const;

  nlohmann::ordered_json ToJson() const;

 private:
  struct SwitchInfo {
    std::vector<std::string> neighbors;
    std::vector<std::string> hosts;
  };

  std::vector<std::string> switch_ids_;  // Sorted.
  std::map<std::string, SwitchInfo, std::less<>> info_;
  std::vector<Link> links_;
  std::map<LinkKey, size_t> link_index_;
  std::vector<NfInstance> nfs_;
};

}  // namespace idnv

#endif  // IDNV_TOPOLOGY_H_

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

// Label taxonomy and endpoint groups over a host inventory.
//
// Labels live in one or more orthogonal dimensions (for example "location"
// and "function"). Each dimension is a forest; a label's depth is 1 at a
// root. An endpoint group is a conjunction of at most one term per dimension.

#ifndef IDNV_TAXONOMY_H_
#define IDNV_TAXONOMY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "boost/dynamic_bitset.hpp"
#include "json.hpp"

namespace idnv {

struct Label {
  std::string name;
  std::string parent;  // Empty for roots.
  int dimension = 0;
  int depth = 1;
  std::vector<std::string> children;
};

class LabelTaxonomy {
 public:
  // Parses {"<dimension>": [{"name": ..., "children": [...]}, ...], ...}.
  // Dimension order follows the document order.
  static absl::StatusOr<LabelTaxonomy> FromJson(const nlohmann::ordered_json& j);

  // Adds a dimension and returns its index; re-adding returns the existing one.
  int AddDimension(const std::string& name);
  absl::Status AddLabel(const std::string& name, const std::string& parent,
                        int dimension);

  const Label* Find(absl::string_view name) const;
  // True when `ancestor` equals `label` or lies above it.
  bool IsAncestorOrSelf(absl::string_view ancestor,
                        absl::string_view label) const;

  const std::vector<std::string>& dimensions() const { return dimensions_; }
  const std::map<std::string, Label, std::less<>>& labels() const {
    return labels_;
  }

  nlohmann::ordered_json ToJson() const;

 private:
  std::vector<std::string> dimensions_;
  std::map<std::string, Label, std::less<>> labels_;
};

struct EpgTerm {
  std::string label;
  int dimension = 0;
  int depth = 1;
  bool wildcard = false;  // "any child of label"

  int EffectiveDepth() const { return depth + (wildcard ? 1 : 0); }
  friend bool operator==(const EpgTerm&, const EpgTerm&) = default;
};

// A conjunction of label terms, at most one per dimension, kept sorted by
// dimension. `restrict_to` narrows membership to an explicit host list; it is
// only set on residual edges produced by conflict resolution.
struct EndpointGroupRef {
  std::vector<EpgTerm> terms;
  std::optional<std::vector<std::string>> restrict_to;

  // Maximum effective term depth.
  int Depth() const;
  // Canonical expression, e.g. "ZoneA.Web", "ZoneB.*" or "B1{h3,h4}".
  std::string ToString() const;

  friend bool operator==(const EndpointGroupRef&,
                         const EndpointGroupRef&) = default;
};

// Resolves a dot-joined expression such as "ZoneA.Web" or "ZoneB.*". A
// segment that descends from the current term refines it; a segment from an
// unused dimension starts a new term; "*" marks the current term wildcard.
absl::StatusOr<EndpointGroupRef> ParseEpgExpr(absl::string_view expr,
                                              const LabelTaxonomy& tax);

class Ipv4 {
 public:
  Ipv4() = default;
  explicit Ipv4(uint32_t value) : value_(value) {}
  static std::optional<Ipv4> Parse(absl::string_view text);

  uint32_t value() const { return value_; }
  std::string ToString() const;

  friend auto operator<=>(Ipv4, Ipv4) = default;

 private:
  uint32_t value_ = 0;
};

struct Host {
  std::string id;
  Ipv4 ip;
  std::set<std::string> labels;
  std::string attach_switch;
};

using HostSet = boost::dynamic_bitset<>;

class HostInventory {
 public:
  // Parses [{"id", "ip", "labels", "switch"}] and checks labels against `tax`.
  static absl::StatusOr<HostInventory> FromJson(const nlohmann::ordered_json& j,
                                                const LabelTaxonomy& tax);

  absl::Status AddHost(Host host, const LabelTaxonomy& tax);

  const std::vector<Host>& hosts() const { return hosts_; }
  size_t size() const { return hosts_.size(); }
  std::optional<size_t> IndexOf(absl::string_view host_id) const;
  const Host* FindByIp(Ipv4 ip) const;

  nlohmann::ordered_json ToJson() const;

 private:
  std::vector<Host> hosts_;
  std::map<std::string, size_t, std::less<>> by_id_;
  std::map<Ipv4, size_t> by_ip_;
};

// Bitset over inventory order of hosts matching every term of `g`.
HostSet EpgMemberBits(const EndpointGroupRef& g, const HostInventory& inv,
                      const LabelTaxonomy& tax);

std::set<std::string> EpgMembers(const EndpointGroupRef& g,
                                 const HostInventory& inv,
                                 const LabelTaxonomy& tax);

// Loads the combined {"labels": ..., "hosts": [...]} document.
struct Environment {
  LabelTaxonomy taxonomy;
  HostInventory inventory;
};
absl::StatusOr<Environment> LoadEnvironmentJson(
    const nlohmann::ordered_json& j);

}  // namespace idnv

#endif  // IDNV_TAXONOMY_H_

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

#include "idnv/taxonomy.h"

#include <algorithm>
#include <charconv>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

absl::Status AddForest(LabelTaxonomy& tax, const nlohmann::ordered_json& nodes,
                       const std::string& parent, int dimension) {
  if (!nodes.is_array()) {
    return absl::InvalidArgumentError("label children must be an array");
  }
  for (const auto& node : nodes) {
    if (!node.is_object() || !node.contains("name") ||
        !node["name"].is_string()) {
      return absl::InvalidArgumentError("label node needs a string \"name\"");
    }
    std::string name = node["name"].get<std::string>();
    RETURN_IF_ERROR(tax.AddLabel(name, parent, dimension));
    if (node.contains("children")) {
      RETURN_IF_ERROR(AddForest(tax, node["children"], name, dimension));
    }
  }
  return absl::OkStatus();
}

nlohmann::ordered_json ForestJson(const LabelTaxonomy& tax,
                                  const std::vector<std::string>& names) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const std::string& name : names) {
    const Label* label = tax.Find(name);
    nlohmann::ordered_json node = {{"name", name}};
    if (!label->children.empty()) {
      node["children"] = ForestJson(tax, label->children);
    }
    out.push_back(std::move(node));
  }
  return out;
}

bool IsLabelChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

}  // namespace

absl::StatusOr<LabelTaxonomy> LabelTaxonomy::FromJson(
    const nlohmann::ordered_json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        "labels must be an object keyed by dimension");
  }
  LabelTaxonomy tax;
  for (const auto& [dim_name, roots] : j.items()) {
    int dim = tax.AddDimension(dim_name);
    RETURN_IF_ERROR(AddForest(tax, roots, "", dim));
  }
  return tax;
}

int LabelTaxonomy::AddDimension(const std::string& name) {
  auto it = std::find(dimensions_.begin(), dimensions_.end(), name);
  if (it != dimensions_.end()) return static_cast<int>(it - dimensions_.begin());
  dimensions_.push_back(name);
  return static_cast<int>(dimensions_.size()) - 1;
}

absl::Status LabelTaxonomy::AddLabel(const std::string& name,
                                     const std::string& parent,
                                     int dimension) {
  if (name.empty() || !std::all_of(name.begin(), name.end(), IsLabelChar)) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid label name '", name, "'"));
  }
  if (labels_.contains(name)) {
    return absl::InvalidArgumentError(
        absl::StrCat("duplicate label '", name, "'"));
  }
  if (dimension < 0 || dimension >= static_cast<int>(dimensions_.size())) {
    return absl::InvalidArgumentError("label dimension out of range");
  }
  Label label{.name = name, .parent = parent, .dimension = dimension};
  if (!parent.empty()) {
    auto it = labels_.find(parent);
    if (it == labels_.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown parent label '", parent, "'"));
    }
    if (it->second.dimension != dimension) {
      return absl::InvalidArgumentError("parent label in another dimension");
    }
    label.depth = it->second.depth + 1;
    it->second.children.push_back(name);
  }
  labels_.emplace(name, std::move(label));
  return absl::OkStatus();
}

const Label* LabelTaxonomy::Find(absl::string_view name) const {
  auto it = labels_.find(name);
  return it == labels_.end() ? nullptr : &it->second;
}

bool LabelTaxonomy::IsAncestorOrSelf(absl::string_view ancestor,
                                     absl::string_view label) const {
  const Label* cur = Find(label);
  while (cur != nullptr) {
    if (cur->name == ancestor) return true;
    if (cur->parent.empty()) return false;
    cur = Find(cur->parent);
  }
  return false;
}

nlohmann::ordered_json LabelTaxonomy::ToJson() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (size_t d = 0; d < dimensions_.size(); ++d) {
    std::vector<std::string> roots;
    for (const auto& [name, label] : labels_) {
      if (label.dimension == static_cast<int>(d) && label.parent.empty()) {
        roots.push_back(name);
      }
    }
    out[dimensions_[d]] = ForestJson(*this, roots);
  }
  return out;
}

int EndpointGroupRef::Depth() const {
  int depth = 0;
  for (const EpgTerm& t : terms) depth = std::max(depth, t.EffectiveDepth());
  return depth;
}

std::string EndpointGroupRef::ToString() const {
  std::string out;
  for (const EpgTerm& t : terms) {
    if (!out.empty()) out += '.';
    out += t.label;
    if (t.wildcard) out += ".*";
  }
  if (restrict_to.has_value()) {
    absl::StrAppend(&out, "{", absl::StrJoin(*restrict_to, ","), "}");
  }
  return out;
}

absl::StatusOr<EndpointGroupRef> ParseEpgExpr(absl::string_view expr,
                                              const LabelTaxonomy& tax) {
  if (expr.empty()) {
    return absl::InvalidArgumentError("empty endpoint group expression");
  }
  EndpointGroupRef ref;
  EpgTerm* current = nullptr;
  for (absl::string_view seg_view :
       absl::StrSplit(absl::string_view(expr.data(), expr.size()), '.')) {
    std::string seg(seg_view);
    if (seg == "*") {
      if (current == nullptr || current->wildcard) {
        return absl::InvalidArgumentError(
            absl::StrCat("misplaced '*' in '", std::string(expr), "'"));
      }
      current->wildcard = true;
      continue;
    }
    const Label* label = tax.Find(seg);
    if (label == nullptr) {
      return absl::NotFoundError(absl::StrCat("unknown label '", seg, "'"));
    }
    if (current != nullptr && !current->wildcard &&
        current->dimension == label->dimension &&
        tax.IsAncestorOrSelf(current->label, seg)) {
      current->label = label->name;
      current->depth = label->depth;
      continue;
    }
    for (const EpgTerm& t : ref.terms) {
      if (t.dimension == label->dimension) {
        return absl::InvalidArgumentError(absl::StrCat(
            "two terms for dimension '", tax.dimensions()[label->dimension],
            "' in '", std::string(expr), "'"));
      }
    }
    ref.terms.push_back(EpgTerm{.label = label->name,
                                .dimension = label->dimension,
                                .depth = label->depth});
    current = &ref.terms.back();
  }
  std::stable_sort(ref.terms.begin(), ref.terms.end(),
                   [](const EpgTerm& a, const EpgTerm& b) {
                     return a.dimension < b.dimension;
                   });
  return ref;
}

std::optional<Ipv4> Ipv4::Parse(absl::string_view text) {
  uint32_t value = 0;
  int parts = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end || parts < 4) {
    if (parts > 0) {
      if (p >= end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned octet = 0;
    auto [next, ec] = std::from_chars(p, end, octet);
    if (ec != std::errc() || octet > 255 || next == p) return std::nullopt;
    value = (value << 8) | octet;
    p = next;
    if (++parts == 4) break;
  }
  if (p != end) return std::nullopt;
  return Ipv4(value);
}

std::string Ipv4::ToString() const {
  return absl::StrCat((value_ >> 24) & 0xff, ".", (value_ >> 16) & 0xff, ".",
                      (value_ >> 8) & 0xff, ".", value_ & 0xff);
}

absl::StatusOr<HostInventory> HostInventory::FromJson(
    const nlohmann::ordered_json& j, const LabelTaxonomy& tax) {
  if (!j.is_array()) return absl::InvalidArgumentError("hosts must be an array");
  HostInventory inv;
  for (const auto& h : j) {
    if (!h.is_object() || !h.contains("id") || !h.contains("ip") ||
        !h.contains("switch")) {
      return absl::InvalidArgumentError("host needs id, ip and switch");
    }
    Host host;
    host.id = h["id"].get<std::string>();
    std::optional<Ipv4> ip = Ipv4::Parse(h["ip"].get<std::string>());
    if (!ip.has_value()) {
      return absl::InvalidArgumentError(
          absl::StrCat("host ", host.id, ": bad ip address"));
    }
    host.ip = *ip;
    host.attach_switch = h["switch"].get<std::string>();
    if (h.contains("labels")) {
      for (const auto& l : h["labels"]) host.labels.insert(l.get<std::string>());
    }
    RETURN_IF_ERROR(inv.AddHost(std::move(host), tax));
  }
  return inv;
}

absl::Status HostInventory::AddHost(Host host, const LabelTaxonomy& tax) {
  if (host.id.empty()) return absl::InvalidArgumentError("empty host id");
  if (by_id_.contains(host.id)) {
    return absl::InvalidArgumentError(
        absl::StrCat("duplicate host id ", host.id));
  }
  if (by_ip_.contains(host.ip)) {
    return absl::InvalidArgumentError(
        absl::StrCat("duplicate host ip ", host.ip.ToString()));
  }
  for (const std::string& l : host.labels) {
    if (tax.Find(l) == nullptr) {
      return absl::InvalidArgumentError(
          absl::StrCat("host ", host.id, ": unknown label '", l, "'"));
    }
  }
  by_id_.emplace(host.id, hosts_.size());
  by_ip_.emplace(host.ip, hosts_.size());
  hosts_.push_back(std::move(host));
  return absl::OkStatus();
}

std::optional<size_t> HostInventory::IndexOf(absl::string_view host_id) const {
  auto it = by_id_.find(host_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const Host* HostInventory::FindByIp(Ipv4 ip) const {
  auto it = by_ip_.find(ip);
  return it == by_ip_.end() ? nullptr : &hosts_[it->second];
}

nlohmann::ordered_json HostInventory::ToJson() const {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const Host& h : hosts_) {
    out.push_back({{"id", h.id},
                   {"ip", h.ip.ToString()},
                   {"labels", h.labels},
                   {"switch", h.attach_switch}});
  }
  return out;
}

HostSet EpgMemberBits(const EndpointGroupRef& g, const HostInventory& inv,
                      const LabelTaxonomy& tax) {
  HostSet bits(inv.size());
  for (size_t i = 0; i < inv.size(); ++i) {
    const Host& host = inv.hosts()[i];
    bool all = !g.terms.empty();
    for (const EpgTerm& term : g.terms) {
      bool any = false;
      for (const std::string& l : host.labels) {
        if (term.wildcard ? (l != term.label &&
                             tax.IsAncestorOrSelf(term.label, l))
                          : tax.IsAncestorOrSelf(term.label, l)) {
          any = true;
          break;
        }
      }
      if (!any) {
        all = false;
        break;
      }
    }
    bits[i] = all;
  }
  if (g.restrict_to.has_value()) {
    HostSet allowed(inv.size());
    for (const std::string& id : *g.restrict_to) {
      if (auto idx = inv.IndexOf(id); idx.has_value()) allowed[*idx] = true;
    }
    bits &= allowed;
  }
  return bits;
}

std::set<std::string> EpgMembers(const EndpointGroupRef& g,
                                 const HostInventory& inv,
                                 const LabelTaxonomy& tax) {
  HostSet bits = EpgMemberBits(g, inv, tax);
  std::set<std::string> out;
  for (size_t i = bits.find_first(); i != HostSet::npos;
       i = bits.find_next(i)) {
    out.insert(inv.hosts()[i].id);
  }
  return out;
}

absl::StatusOr<Environment> LoadEnvironmentJson(
    const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("labels")) {
    return absl::InvalidArgumentError("environment needs \"labels\"");
  }
  Environment env;
  ASSIGN_OR_RETURN(env.taxonomy, LabelTaxonomy::FromJson(j["labels"]));
  if (j.contains("hosts")) {
    ASSIGN_OR_RETURN(env.inventory,
                     HostInventory::FromJson(j["hosts"], env.taxonomy));
  }
  return env;
}

}  // namespace idnv

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

#include "idnv/sfc_compiler.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <tuple>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "idnv/intent_parser.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

absl::Status UnreachableError(absl::string_view a, absl::string_view b) {
  return absl::FailedPreconditionError(
      absl::StrCat("Unreachable: ", a, " -> ", b));
}

std::string IpList(const std::vector<Ipv4>& ips) {
  return absl::StrJoin(ips, ",", [](std::string* out, Ipv4 ip) {
    out->append(ip.ToString());
  });
}

bool HasIp(const std::vector<Ipv4>& sorted, Ipv4 ip) {
  return std::binary_search(sorted.begin(), sorted.end(), ip);
}

// What one visit of a switch along a rule path does.
struct Hop {
  std::string sw;
  std::optional<int> in_port;
  bool deliver = false;
  int out_port = 0;
  std::vector<NfKind> nfs;

  bool SameAction(const Hop& o) const {
    return deliver == o.deliver && out_port == o.out_port && nfs == o.nfs;
  }
};

// Visits of a repeated switch are told apart by in_port, except the first
// visit of the source switch, where packets come from a host. Fails when two
// visits arrive on the same port but need different actions.
absl::StatusOr<std::vector<Hop>> PlanHops(const LogicalRule& rule,
                                          const Topology& t) {
  std::map<std::string, int> visits;
  for (const std::string& sw : rule.path) ++visits[sw];
  std::vector<Hop> hops;
  for (size_t i = 0; i < rule.path.size(); ++i) {
    Hop hop;
    hop.sw = rule.path[i];
    if (i > 0 && visits[hop.sw] > 1) {
      hop.in_port = t.PortToSwitch(hop.sw, rule.path[i - 1]);
    }
    if (i + 1 == rule.path.size()) {
      hop.deliver = true;
    } else {
      std::optional<int> port = t.PortToSwitch(hop.sw, rule.path[i + 1]);
      if (!port.has_value()) {
        return absl::InternalError(absl::StrCat(
            "no link ", hop.sw, "-", rule.path[i + 1], " on rule path"));
      }
      hop.out_port = *port;
    }
    for (const Waypoint& w : rule.waypoints) {
      if (w.hop == i) hop.nfs.push_back(w.kind);
    }
    bool duplicate = false;
    for (const Hop& prev : hops) {
      if (prev.sw != hop.sw || prev.in_port != hop.in_port) continue;
      if (!prev.SameAction(hop)) {
        return absl::FailedPreconditionError(absl::StrCat(
            "AmbiguousPath: ", hop.sw, " is entered twice on the same port",
            " with different next hops"));
      }
      duplicate = true;
    }
    if (!duplicate) hops.push_back(std::move(hop));
  }
  return hops;
}

}  // namespace

std::map<std::string, int> HopDistances(const Topology& t, absl::string_view to,
                                        const Exclusions* excl) {
  std::map<std::string, int> dist;
  if (!t.HasSwitch(to)) return dist;
  std::deque<std::string> queue = {std::string(to)};
  dist[std::string(to)] = 0;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const std::string& n : t.Neighbors(cur)) {
      if (dist.contains(n)) continue;
      if (excl != nullptr && excl->ExcludesLink(cur, n)) continue;
      dist[n] = dist[cur] + 1;
      queue.push_back(n);
    }
  }
  return dist;
}

absl::StatusOr<std::vector<std::string>> ShortestPath(const Topology& t,
                                                      absl::string_view a,
                                                      absl::string_view b,
                                                      const Exclusions* excl) {
  if (!t.HasSwitch(a) || !t.HasSwitch(b)) return UnreachableError(a, b);
  std::map<std::string, int> dist = HopDistances(t, b, excl);
  auto it = dist.find(std::string(a));
  if (it == dist.end()) return UnreachableError(a, b);
  std::vector<std::string> path = {std::string(a)};
  int d = it->second;
  while (d > 0) {
    // Neighbours are sorted, so the first one a hop closer is the smallest.
    for (const std::string& n : t.Neighbors(path.back())) {
      if (excl != nullptr && excl->ExcludesLink(path.back(), n)) continue;
      auto nd = dist.find(n);
      if (nd != dist.end() && nd->second == d - 1) {
        path.push_back(n);
        break;
      }
    }
    --d;
  }
  return path;
}

absl::StatusOr<std::vector<Waypoint>> PlaceChain(const Topology& t,
                                                 const std::vector<NfKind>& chain,
                                                 absl::string_view src_sw,
                                                 absl::string_view dst_sw,
                                                 const Exclusions* excl) {
  std::vector<Waypoint> out;
  if (chain.empty()) return out;
  std::map<std::string, int> to_dst = HopDistances(t, dst_sw, excl);
  std::string prev(src_sw);
  for (NfKind kind : chain) {
    std::vector<std::string> candidates;
    for (const std::string& sw : t.NfSwitches(kind)) {
      if (excl == nullptr || !excl->ExcludesNf(kind, sw)) {
        candidates.push_back(sw);
      }
    }
    if (candidates.empty()) {
      return absl::NotFoundError(absl::StrCat("MissingNF: ", kind.name()));
    }
    std::map<std::string, int> from_prev = HopDistances(t, prev, excl);
    std::optional<std::string> best;
    int best_cost = std::numeric_limits<int>::max();
    for (const std::string& sw : candidates) {  // Sorted by id.
      auto a = from_prev.find(sw);
      auto b = to_dst.find(sw);
      if (a == from_prev.end() || b == to_dst.end()) continue;
      if (a->second + b->second < best_cost) {
        best_cost = a->second + b->second;
        best = sw;
      }
    }
    if (!best.has_value()) {
      return UnreachableError(prev, candidates.front());
    }
    out.push_back({kind, *best, 0});
    prev = *best;
  }
  return out;
}

absl::StatusOr<std::vector<std::string>> ComputePath(
    const Topology& t, absl::string_view src_sw,
    std::vector<Waypoint>& waypoints, absl::string_view dst_sw,
    const Exclusions* excl) {
  std::vector<std::string> path = {std::string(src_sw)};
  if (!t.HasSwitch(src_sw)) return UnreachableError(src_sw, dst_sw);
  auto extend = [&](absl::string_view to) -> absl::Status {
    ASSIGN_OR_RETURN(std::vector<std::string> leg,
                     ShortestPath(t, path.back(), to, excl));
    path.insert(path.end(), leg.begin() + 1, leg.end());
    return absl::OkStatus();
  };
  for (Waypoint& w : waypoints) {
    RETURN_IF_ERROR(extend(w.at_switch));
    w.hop = path.size() - 1;
  }
  RETURN_IF_ERROR(extend(dst_sw));
  return path;
}

bool LogicalRule::Matches(Ipv4 src, Ipv4 dst, Proto proto,
                          uint16_t port) const {
  return classifier.Matches(proto, port) && HasIp(src_ips, src) &&
         HasIp(dst_ips, dst);
}

std::vector<NfKind> LogicalRule::ChainKinds() const {
  std::vector<NfKind> out;
  for (const Waypoint& w : waypoints) out.push_back(w.kind);
  return out;
}

std::string LogicalRule::ToString() const {
  std::string out = absl::StrCat(rule_id, " intent=", intent_id, " prio=",
                                 priority, " src=", IpList(src_ips),
                                 " dst=", IpList(dst_ips), " ",
                                 classifier.ToString(), " ",
                                 ActionName(action));
  if (action == Action::kAllow) {
    absl::StrAppend(&out, " path=", absl::StrJoin(path, "/"));
    if (!waypoints.empty()) {
      absl::StrAppend(
          &out, " via=",
          absl::StrJoin(waypoints, ",", [](std::string* o, const Waypoint& w) {
            absl::StrAppend(o, w.kind.name(), "@", w.at_switch);
          }));
    }
  } else {
    absl::StrAppend(&out, " at=", src_switch);
  }
  if (bandwidth_mbps.has_value()) {
    absl::StrAppend(&out, " bw=", FormatNumber(*bandwidth_mbps));
  }
  return out;
}

absl::Status ValidateRule(const LogicalRule& rule, const Topology& t) {
  if (rule.path.empty() || rule.path.front() != rule.src_switch) {
    return absl::FailedPreconditionError(
        absl::StrCat(rule.rule_id, ": path must start at ", rule.src_switch));
  }
  if (rule.action == Action::kBlock) {
    if (rule.path.size() != 1 || !rule.waypoints.empty()) {
      return absl::FailedPreconditionError(
          absl::StrCat(rule.rule_id, ": block rules carry no path"));
    }
    return absl::OkStatus();
  }
  if (rule.path.back() != rule.dst_switch) {
    return absl::FailedPreconditionError(
        absl::StrCat(rule.rule_id, ": path must end at ", rule.dst_switch));
  }
  for (size_t i = 0; i + 1 < rule.path.size(); ++i) {
    if (t.FindLink(rule.path[i], rule.path[i + 1]) == nullptr) {
      return absl::FailedPreconditionError(absl::StrCat(
          rule.rule_id, ": no link ", rule.path[i], "-", rule.path[i + 1]));
    }
  }
  size_t last = 0;
  for (const Waypoint& w : rule.waypoints) {
    if (w.hop < last || w.hop >= rule.path.size() ||
        rule.path[w.hop] != w.at_switch || !t.HostsNf(w.at_switch, w.kind)) {
      return absl::FailedPreconditionError(
          absl::StrCat(rule.rule_id, ": waypoint ", w.kind.name(), "@",
                       w.at_switch, " out of place"));
    }
    last = w.hop;
  }
  return absl::OkStatus();
}

bool RuleOrder(const LogicalRule& a, const LogicalRule& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  return a.rule_id < b.rule_id;
}

const LogicalRule* MatchingRule(const std::vector<LogicalRule>& rules,
                                Ipv4 src, Ipv4 dst, Proto proto,
                                uint16_t port) {
  const LogicalRule* best = nullptr;
  for (const LogicalRule& r : rules) {
    if (!r.Matches(src, dst, proto, port)) continue;
    if (best == nullptr || RuleOrder(r, *best)) best = &r;
  }
  return best;
}

absl::string_view FailureKindName(FailureKind kind) {
  switch (kind) {
    case FailureKind::kMissingNf:
      return "MissingNF";
    case FailureKind::kUnreachable:
      return "Unreachable";
    case FailureKind::kAmbiguousPath:
      return "AmbiguousPath";
  }
  return "?";
}

int RulePriority(int specificity, Action action) {
  return kBasePriority + 10 * specificity + (action == Action::kBlock ? 5 : 0);
}

CompileResult CompileLogical(const std::vector<PgaEdge>& edges,
                             const HostInventory& inv,
                             const LabelTaxonomy& tax, const Topology& t,
                             const CompileOptions& options) {
  CompileResult result;
  int next_id = 1;
  for (const PgaEdge& e : edges) {
    const Exclusions* excl = nullptr;
    if (auto it = options.exclusions.find(e.intent_id);
        it != options.exclusions.end()) {
      excl = &it->second;
    }
    std::map<std::string, std::vector<Ipv4>> src_groups, dst_groups;
    HostSet src = EpgMemberBits(e.src, inv, tax);
    HostSet dst = EpgMemberBits(e.dst, inv, tax);
    for (size_t i = src.find_first(); i != HostSet::npos; i = src.find_next(i)) {
      src_groups[inv.hosts()[i].attach_switch].push_back(inv.hosts()[i].ip);
    }
    for (size_t i = dst.find_first(); i != HostSet::npos; i = dst.find_next(i)) {
      dst_groups[inv.hosts()[i].attach_switch].push_back(inv.hosts()[i].ip);
    }
    std::set<std::string> reported;
    auto fail = [&](const absl::Status& s, absl::string_view a,
                    absl::string_view b) {
      if (!reported.insert(std::string(s.message())).second) return;
      CompileFailure f;
      f.intent_id = e.intent_id;
      f.edge_id = e.id;
      f.detail = std::string(s.message());
      if (absl::StartsWith(s.message(), "MissingNF")) {
        f.kind = FailureKind::kMissingNf;
        f.nf = NfKind::FromName(s.message().substr(11));
      } else if (absl::StartsWith(s.message(), "AmbiguousPath")) {
        f.kind = FailureKind::kAmbiguousPath;
      } else {
        f.kind = FailureKind::kUnreachable;
        f.leg = MakeLinkKey(a, b);
      }
      result.failures.push_back(std::move(f));
    };
    for (auto& [ssw, sips] : src_groups) {
      for (auto& [dsw, dips] : dst_groups) {
        LogicalRule r;
        r.intent_id = e.intent_id;
        r.edge_id = e.id;
        r.src_ips = sips;
        r.dst_ips = dips;
        std::sort(r.src_ips.begin(), r.src_ips.end());
        std::sort(r.dst_ips.begin(), r.dst_ips.end());
        r.classifier = e.classifier;
        r.action = e.action;
        r.src_switch = ssw;
        r.dst_switch = dsw;
        r.bandwidth_mbps = e.bandwidth_mbps;
        r.specificity = e.specificity;
        r.priority = options.uniform_priority
                         ? kBasePriority
                         : RulePriority(e.specificity, e.action);
        if (!t.HasSwitch(ssw) || !t.HasSwitch(dsw)) {
          fail(UnreachableError(ssw, dsw), ssw, dsw);
          continue;
        }
        if (e.action == Action::kBlock) {
          r.path = {ssw};
        } else {
          absl::StatusOr<std::vector<Waypoint>> wps =
              PlaceChain(t, e.chain, ssw, dsw, excl);
          if (!wps.ok()) {
            fail(wps.status(), ssw, dsw);
            continue;
          }
          r.waypoints = *std::move(wps);
          absl::StatusOr<std::vector<std::string>> path =
              ComputePath(t, ssw, r.waypoints, dsw, excl);
          if (!path.ok()) {
            fail(path.status(), ssw, dsw);
            continue;
          }
          r.path = *std::move(path);
          if (absl::Status s = PlanHops(r, t).status(); !s.ok()) {
            fail(s, ssw, dsw);
            continue;
          }
        }
        r.rule_id = absl::StrFormat("r%05d", next_id++);
        result.rules.push_back(std::move(r));
      }
    }
  }
  return result;
}

bool FlowMatch::Matches(int in, Ipv4 src, Ipv4 dst, Proto proto,
                        uint16_t port) const {
  if (in_port.has_value() && *in_port != in) return false;
  return classifier.Matches(proto, port) && HasIp(src_ips, src) &&
         HasIp(dst_ips, dst);
}

std::string FlowMatch::ToString() const {
  std::string out;
  if (in_port.has_value()) absl::StrAppend(&out, "in=", *in_port, " ");
  absl::StrAppend(&out, "src=", IpList(src_ips), " dst=", IpList(dst_ips),
                  " ", classifier.ToString());
  return out;
}

std::string FlowEntry::ToString() const {
  std::string out = absl::StrCat(priority, " ", match.ToString(), " ");
  if (action == FlowAction::kForward) {
    absl::StrAppend(&out, "fwd:", out_port);
  } else {
    out.append("drop");
  }
  if (!nfs.empty()) absl::StrAppend(&out, " nfs=", ChainToString(nfs));
  absl::StrAppend(&out, " # ", rule_id);
  return out;
}

bool EntryOrder(const FlowEntry& a, const FlowEntry& b) {
  if (a.priority != b.priority) return a.priority > b.priority;
  if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
  if (a.match.in_port.has_value() != b.match.in_port.has_value()) {
    return a.match.in_port.has_value();
  }
  return std::forward_as_tuple(a.match.in_port, a.match.dst_ips,
                               a.match.src_ips, a.out_port) <
         std::forward_as_tuple(b.match.in_port, b.match.dst_ips,
                               b.match.src_ips, b.out_port);
}

void SwitchConfig::Sort() {
  std::stable_sort(entries.begin(), entries.end(), EntryOrder);
}

std::string SwitchConfig::Dump() const {
  std::string out;
  for (const FlowEntry& e : entries) {
    absl::StrAppend(&out, switch_id, " ", e.ToString(), "\n");
  }
  absl::StrAppend(&out, switch_id, " 0 * drop # default\n");
  return out;
}

SwitchConfigs CompilePhysical(const std::vector<LogicalRule>& rules,
                              const Topology& t, const HostInventory& inv) {
  SwitchConfigs configs;
  for (const std::string& sw : t.switches()) configs[sw].switch_id = sw;
  for (const LogicalRule& r : rules) {
    FlowEntry base;
    base.priority = r.priority;
    base.match.src_ips = r.src_ips;
    base.match.dst_ips = r.dst_ips;
    base.match.classifier = r.classifier;
    base.rule_id = r.rule_id;
    if (r.action == Action::kBlock) {
      base.switch_id = r.src_switch;
      base.action = FlowAction::kDrop;
      configs[r.src_switch].entries.push_back(std::move(base));
      continue;
    }
    absl::StatusOr<std::vector<Hop>> hops = PlanHops(r, t);
    if (!hops.ok()) continue;  // Rejected by CompileLogical already.
    for (const Hop& hop : *hops) {
      FlowEntry e = base;
      e.switch_id = hop.sw;
      e.match.in_port = hop.in_port;
      e.action = FlowAction::kForward;
      e.nfs = hop.nfs;
      if (!hop.deliver) {
        e.out_port = hop.out_port;
        configs[hop.sw].entries.push_back(std::move(e));
        continue;
      }
      for (Ipv4 ip : r.dst_ips) {
        const Host* h = inv.FindByIp(ip);
        if (h == nullptr) continue;
        std::optional<int> port = t.PortToHost(hop.sw, h->id);
        if (!port.has_value()) continue;
        FlowEntry d = e;
        d.match.dst_ips = {ip};
        d.out_port = *port;
        configs[hop.sw].entries.push_back(std::move(d));
      }
    }
  }
  for (auto& [sw, config] : configs) config.Sort();
  return configs;
}

std::string DumpConfigs(const SwitchConfigs& configs) {
  std::string out;
  for (const auto& [sw, config] : configs) out.append(config.Dump());
  return out;
}

FeasibilityReport CheckExternalFeasibility(
    const std::vector<LogicalRule>& rules,
    const std::vector<CompileFailure>& failures, const Topology& t) {
  FeasibilityReport report;
  report.failures = failures;
  // (link) -> intent -> reservation; an intent reserves once per link.
  std::map<LinkKey, std::map<std::string, double>> load;
  for (const LogicalRule& r : rules) {
    if (r.action != Action::kAllow || !r.bandwidth_mbps.has_value()) continue;
    for (size_t i = 0; i + 1 < r.path.size(); ++i) {
      double& v = load[MakeLinkKey(r.path[i], r.path[i + 1])][r.intent_id];
      v = std::max(v, *r.bandwidth_mbps);
    }
  }
  for (const auto& [key, per_intent] : load) {
    const Link* link = t.FindLink(key.first, key.second);
    if (link == nullptr) continue;
    double sum = 0;
    for (const auto& [id, bw] : per_intent) sum += bw;
    if (sum > link->capacity_mbps) {
      LinkViolation v;
      v.link = key;
      v.reserved_mbps = sum;
      v.capacity_mbps = link->capacity_mbps;
      for (const auto& [id, bw] : per_intent) v.intent_ids.push_back(id);
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

}  // namespace idnv

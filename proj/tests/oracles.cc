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

#include "oracles.h"

#include <algorithm>
#include <map>
#include <tuple>

#include "absl/strings/str_cat.h"

namespace idnv::testing {

LabelTaxonomy SmallTaxonomy() {
  LabelTaxonomy tax;
  int loc = tax.AddDimension("location");
  int fn = tax.AddDimension("function");
  for (auto [name, parent, dim] :
       std::vector<std::tuple<std::string, std::string, int>>{
           {"ZoneA", "", loc},   {"A1", "ZoneA", loc},  {"A2", "ZoneA", loc},
           {"ZoneB", "", loc},   {"B1", "ZoneB", loc},  {"B2", "ZoneB", loc},
           {"Service", "", fn},  {"Web", "Service", fn}, {"DNS", "Service", fn},
           {"User", "", fn},     {"Staff", "User", fn}}) {
    (void)tax.AddLabel(name, parent, dim);
  }
  return tax;
}

HostInventory ThreeHostInventory(const LabelTaxonomy& tax) {
  HostInventory inv;
  (void)inv.AddHost({"h1", *Ipv4::Parse("10.0.0.1"), {"A1", "Web"}, "s1"}, tax);
  (void)inv.AddHost({"h2", *Ipv4::Parse("10.0.0.2"), {"A1", "DNS"}, "s1"}, tax);
  (void)inv.AddHost({"h3", *Ipv4::Parse("10.0.0.3"), {"B1", "Web"}, "s3"}, tax);
  return inv;
}

bool OracleCarries(const Host& host, const std::string& label, bool strict,
                   const LabelTaxonomy& tax) {
  for (const std::string& own : host.labels) {
    std::string cur = own;
    bool first = true;
    while (!cur.empty()) {
      if (cur == label && !(strict && first)) return true;
      cur = tax.Find(cur)->parent;
      first = false;
    }
  }
  return false;
}

bool OracleMember(const Host& host, const EndpointGroupRef& g,
                  const LabelTaxonomy& tax) {
  if (g.terms.empty()) return false;
  if (g.restrict_to.has_value() &&
      std::find(g.restrict_to->begin(), g.restrict_to->end(), host.id) ==
          g.restrict_to->end()) {
    return false;
  }
  for (const EpgTerm& t : g.terms) {
    if (!OracleCarries(host, t.label, t.wildcard, tax)) return false;
  }
  return true;
}

bool OracleCovers(const PgaEdge& e, const Point& p, const HostInventory& inv,
                  const LabelTaxonomy& tax) {
  if (!OracleMember(inv.hosts()[p.src], e.src, tax)) return false;
  if (!OracleMember(inv.hosts()[p.dst], e.dst, tax)) return false;
  const Classifier& c = e.classifier;
  if (c.proto != Proto::kAny && c.proto != p.proto) return false;
  if (c.ports.empty()) return true;
  bool listed = c.ports.count(p.port) > 0;
  return c.ports_negated ? !listed : listed;
}

std::vector<Point> AllPoints(const HostInventory& inv) {
  std::vector<Point> out;
  for (size_t s = 0; s < inv.size(); ++s) {
    for (size_t d = 0; d < inv.size(); ++d) {
      for (Proto proto : {Proto::kTcp, Proto::kUdp}) {
        for (uint16_t port : kProbePorts) out.push_back({s, d, proto, port});
      }
    }
  }
  return out;
}

namespace {

bool OrderCycle(const std::vector<NfKind>& a, const std::vector<NfKind>& b) {
  std::map<NfKind, size_t> pos_b;
  for (size_t i = 0; i < b.size(); ++i) pos_b[b[i]] = i;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      if (pos_b.count(a[i]) && pos_b.count(a[j]) && pos_b[a[j]] < pos_b[a[i]]) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::set<ConflictTriple> BruteForceConflicts(const std::vector<PgaEdge>& edges,
                                             const HostInventory& inv,
                                             const LabelTaxonomy& tax) {
  std::set<std::pair<size_t, size_t>> overlapping;
  for (const Point& p : AllPoints(inv)) {
    std::vector<size_t> covering;
    for (size_t i = 0; i < edges.size(); ++i) {
      if (OracleCovers(edges[i], p, inv, tax)) covering.push_back(i);
    }
    for (size_t x = 0; x < covering.size(); ++x) {
      for (size_t y = x + 1; y < covering.size(); ++y) {
        overlapping.insert({covering[x], covering[y]});
      }
    }
  }
  std::set<ConflictTriple> out;
  for (auto [i, j] : overlapping) {
    const PgaEdge& a = edges[i];
    const PgaEdge& b = edges[j];
    std::string l = std::min(a.id, b.id), r = std::max(a.id, b.id);
    if (a.action != b.action) {
      out.insert({l, r, ConflictKind::kAction});
      continue;
    }
    if (a.action == Action::kBlock) continue;
    if (OrderCycle(a.chain, b.chain)) out.insert({l, r, ConflictKind::kChainOrder});
    if (a.bandwidth_mbps && b.bandwidth_mbps && a.src == b.src &&
        a.dst == b.dst && a.classifier == b.classifier) {
      out.insert({l, r, ConflictKind::kBandwidth});
    }
  }
  return out;
}

std::optional<Action> PointwiseWinner(const std::vector<PgaEdge>& edges,
                                      const Point& p, const HostInventory& inv,
                                      const LabelTaxonomy& tax) {
  std::optional<int> best;
  bool block_at_best = false;
  for (const PgaEdge& e : edges) {
    if (!OracleCovers(e, p, inv, tax)) continue;
    if (!best || e.specificity > *best) {
      best = e.specificity;
      block_at_best = e.action == Action::kBlock;
    } else if (e.specificity == *best && e.action == Action::kBlock) {
      block_at_best = true;
    }
  }
  if (!best) return std::nullopt;
  return block_at_best ? Action::kBlock : Action::kAllow;
}

RandomInstance MakeRandomInstance(std::mt19937_64& rng,
                                  const LabelTaxonomy& tax, int max_edges,
                                  int max_hosts, const std::string& id_prefix) {
  auto pick = [&](int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
  };
  const std::vector<std::string> academies = {"A1", "A2", "B1", "B2"};
  const std::vector<std::string> functions = {"Web", "DNS", "Staff"};
  RandomInstance inst;
  int hosts = 1 + pick(max_hosts);
  for (int h = 0; h < hosts; ++h) {
    Host host{absl::StrCat("h", h + 1),
              Ipv4(0x0a000001u + static_cast<uint32_t>(h)),
              {academies[pick(4)], functions[pick(3)]},
              "s1"};
    (void)inst.inventory.AddHost(std::move(host), tax);
  }
  const std::vector<std::string> exprs = {
      "ZoneA",   "ZoneB",   "ZoneA.*",   "ZoneB.*",     "A1",
      "A2",      "B1",      "B2",        "ZoneA.Web",   "ZoneB.Web",
      "A1.Web",  "B1.DNS",  "ZoneA.DNS", "Service.*",   "Web",
      "DNS",     "Staff",   "ZoneB.User.*", "B2.Service", "A2.Staff"};
  const std::vector<std::vector<uint16_t>> port_sets = {
      {}, {}, {53}, {80}, {443}, {80, 443}, {53, 80}};
  const std::vector<std::vector<NfKind>> chains = {
      {},
      {},
      {NfKind::LB()},
      {NfKind::IDS()},
      {NfKind::LB(), NfKind::IDS()},
      {NfKind::IDS(), NfKind::LB()},
      {NfKind::DDOS(), NfKind::LB()}};
  int n = 1 + pick(max_edges);
  for (int i = 0; i < n; ++i) {
    NetworkIntent intent;
    intent.id = absl::StrCat(id_prefix, i);
    intent.src = *ParseEpgExpr(exprs[pick(exprs.size())], tax);
    intent.dst = *ParseEpgExpr(exprs[pick(exprs.size())], tax);
    intent.classifier.proto = static_cast<Proto>(pick(3));
    for (uint16_t p : port_sets[pick(port_sets.size())]) {
      intent.classifier.ports.insert(p);
    }
    intent.action = pick(2) == 0 ? Action::kAllow : Action::kBlock;
    if (intent.action == Action::kAllow) {
      intent.chain = chains[pick(chains.size())];
      if (pick(4) == 0) intent.bandwidth_mbps = 10.0 * (1 + pick(3));
    }
    inst.edges.push_back(EdgeFromIntent(intent, i));
  }
  return inst;
}

HostInventory Reattach(const HostInventory& inv, const LabelTaxonomy& tax,
                       const std::vector<std::string>& switches,
                       std::mt19937_64& rng) {
  HostInventory out;
  std::uniform_int_distribution<size_t> pick(0, switches.size() - 1);
  for (Host h : inv.hosts()) {
    h.attach_switch = switches[pick(rng)];
    (void)out.AddHost(std::move(h), tax);
  }
  return out;
}

std::map<std::pair<std::string, std::string>, int> AllPairsHops(
    const Topology& t) {
  const std::vector<std::string>& s = t.switches();
  const int inf = 1 << 20;
  size_t n = s.size();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const Link& l : t.links()) {
    size_t a = std::find(s.begin(), s.end(), l.a) - s.begin();
    size_t b = std::find(s.begin(), s.end(), l.b) - s.begin();
    d[a][b] = d[b][a] = 1;
  }
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  std::map<std::pair<std::string, std::string>, int> out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      out[{s[i], s[j]}] = d[i][j] >= inf ? -1 : d[i][j];
    }
  }
  return out;
}

Walk WalkTables(const SwitchConfigs& configs, const Topology& t,
                const HostInventory& inv, const Host& src, Ipv4 dst,
                Proto proto, uint16_t port) {
  Walk walk;
  std::string sw = src.attach_switch;
  int in_port = t.PortToHost(sw, src.id).value_or(0);
  for (int step = 0; step < 64; ++step) {
    walk.path.push_back(sw);
    const FlowEntry* best = nullptr;
    auto it = configs.find(sw);
    if (it != configs.end()) {
      for (const FlowEntry& e : it->second.entries) {
        if (e.match.in_port.has_value() && *e.match.in_port != in_port) {
          continue;
        }
        if (!e.match.classifier.Matches(proto, port)) continue;
        if (std::find(e.match.src_ips.begin(), e.match.src_ips.end(),
                      src.ip) == e.match.src_ips.end()) {
          continue;
        }
        if (std::find(e.match.dst_ips.begin(), e.match.dst_ips.end(), dst) ==
            e.match.dst_ips.end()) {
          continue;
        }
        auto key = [](const FlowEntry* x) {
          return std::make_tuple(-x->priority, x->rule_id,
                                 !x->match.in_port.has_value());
        };
        if (best == nullptr || key(&e) < key(best)) best = &e;
      }
    }
    if (best == nullptr || best->action == FlowAction::kDrop) {
      walk.dropped = true;
      if (best != nullptr) walk.drop_rule = best->rule_id;
      return walk;
    }
    for (NfKind k : best->nfs) {
      if (t.HostsNf(sw, k)) walk.nfs.push_back(k);
    }
    std::optional<PortPeer> peer = t.PeerAt(sw, best->out_port);
    if (!peer.has_value()) {
      walk.dropped = true;
      return walk;
    }
    if (peer->is_host) {
      walk.delivered_to = peer->id;
      return walk;
    }
    in_port = t.PortToSwitch(peer->id, sw).value_or(0);
    sw = peer->id;
  }
  walk.dropped = true;
  return walk;
}

}  // namespace idnv::testing

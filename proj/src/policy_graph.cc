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

#include "idnv/policy_graph.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "idnv/intent_parser.h"

namespace idnv {
namespace {

using AtomMask = boost::dynamic_bitset<>;

struct Coverage {
  HostSet src;
  HostSet dst;
};

Coverage CoverageOf(const PgaEdge& e, const HostInventory& inv,
                    const LabelTaxonomy& tax) {
  return {EpgMemberBits(e.src, inv, tax), EpgMemberBits(e.dst, inv, tax)};
}

std::optional<OverlapWitness> Witness(const PgaEdge& a, const Coverage& ca,
                                      const PgaEdge& b, const Coverage& cb,
                                      const HostInventory& inv) {
  if (!ca.src.intersects(cb.src) || !ca.dst.intersects(cb.dst)) {
    return std::nullopt;
  }
  std::optional<Proto> proto = a.classifier.FirstCommonProto(b.classifier);
  if (!proto.has_value()) return std::nullopt;
  std::optional<uint16_t> port = a.classifier.FirstCommonPort(b.classifier);
  if (!port.has_value()) return std::nullopt;
  size_t s = (ca.src & cb.src).find_first();
  size_t d = (ca.dst & cb.dst).find_first();
  return OverlapWitness{inv.hosts()[s].id, inv.hosts()[d].id, *proto, *port};
}

// Deterministic total order among edges: specificity, then block first, then
// id.
bool Precedes(const PgaEdge& a, const PgaEdge& b) {
  if (a.specificity != b.specificity) return a.specificity > b.specificity;
  if (a.action != b.action) return a.action == Action::kBlock;
  return a.id < b.id;
}

// The classifier space is cut into atoms: {tcp, udp} x (each port mentioned
// by some edge, plus "every other port").
class AtomSpace {
 public:
  explicit AtomSpace(const std::vector<PgaEdge>& edges) {
    std::set<uint16_t> ports;
    for (const PgaEdge& e : edges) {
      ports.insert(e.classifier.ports.begin(), e.classifier.ports.end());
    }
    ports_.assign(ports.begin(), ports.end());
  }

  size_t classes() const { return ports_.size() + 1; }
  size_t size() const { return 2 * classes(); }

  AtomMask Atoms(const Classifier& c) const {
    AtomMask mask(size());
    for (size_t p = 0; p < 2; ++p) {
      if (!c.MatchesProto(p == 0 ? Proto::kTcp : Proto::kUdp)) continue;
      for (size_t k = 0; k < classes(); ++k) {
        bool hit = k < ports_.size() ? c.MatchesPort(ports_[k])
                                     : (c.ports.empty() || c.ports_negated);
        mask[p * classes() + k] = hit;
      }
    }
    return mask;
  }

  std::vector<Classifier> ToClassifiers(const AtomMask& mask) const {
    AtomMask tcp(classes()), udp(classes());
    for (size_t k = 0; k < classes(); ++k) {
      tcp[k] = mask[k];
      udp[k] = mask[classes() + k];
    }
    std::vector<Classifier> out;
    if (tcp == udp) {
      if (tcp.any()) out.push_back(PortSpec(Proto::kAny, tcp));
      return out;
    }
    if (tcp.any()) out.push_back(PortSpec(Proto::kTcp, tcp));
    if (udp.any()) out.push_back(PortSpec(Proto::kUdp, udp));
    return out;
  }

 private:
  Classifier PortSpec(Proto proto, const AtomMask& classes_mask) const {
    Classifier c;
    c.proto = proto;
    const bool other = classes_mask[ports_.size()];
    for (size_t k = 0; k < ports_.size(); ++k) {
      if (classes_mask[k] != other) c.ports.insert(ports_[k]);
    }
    c.ports_negated = other && !c.ports.empty();
    return c;
  }

  std::vector<uint16_t> ports_;
};

// (src host, dst host) -> atoms.
using Region = std::map<std::pair<size_t, size_t>, AtomMask>;

struct Rect {
  HostSet src;
  HostSet dst;
  AtomMask atoms;
};

// Canonical rectangle cover: pairs grouped by atom set, then sources grouped
// by identical destination sets.
std::vector<Rect> Decompose(const Region& region, size_t hosts) {
  std::map<AtomMask, std::map<size_t, HostSet>> by_mask;
  for (const auto& [pair, mask] : region) {
    if (mask.none()) continue;
    auto& rows = by_mask[mask];
    auto [it, inserted] = rows.try_emplace(pair.first, HostSet(hosts));
    it->second[pair.second] = true;
  }
  std::vector<Rect> out;
  for (const auto& [mask, rows] : by_mask) {
    std::map<HostSet, HostSet> by_dst;
    for (const auto& [s, dsts] : rows) {
      auto [it, inserted] = by_dst.try_emplace(dsts, HostSet(hosts));
      it->second[s] = true;
    }
    for (const auto& [dsts, srcs] : by_dst) out.push_back({srcs, dsts, mask});
  }
  return out;
}

EndpointGroupRef Narrow(const EndpointGroupRef& base, const HostSet& full,
                        const HostSet& part, const HostInventory& inv) {
  EndpointGroupRef out = base;
  if (part == full) return out;
  std::vector<std::string> ids;
  for (size_t i = part.find_first(); i != HostSet::npos; i = part.find_next(i)) {
    ids.push_back(inv.hosts()[i].id);
  }
  std::sort(ids.begin(), ids.end());
  out.restrict_to = std::move(ids);
  return out;
}

std::string ResolutionRule(const PgaEdge& winner, const PgaEdge& loser,
                           ResolutionPolicy policy) {
  switch (policy) {
    case ResolutionPolicy::kSpecificityThenDeny:
      return winner.specificity != loser.specificity ? "specificity"
                                                     : "deny-on-tie";
    case ResolutionPolicy::kDenyOverrides:
      return "deny-overrides";
    case ResolutionPolicy::kFirstWriterWins:
      return "first-writer";
  }
  return "";
}

}  // namespace

std::string PgaEdge::CanonicalString() const {
  return absl::StrCat(
      id, "|", intent_id, "|", src.ToString(), "|", dst.ToString(), "|",
      classifier.ToString(), "|", ActionName(action), "|", ChainToString(chain),
      "|", bandwidth_mbps.has_value() ? FormatNumber(*bandwidth_mbps) : "-",
      "|", specificity);
}

PgaEdge EdgeFromIntent(const NetworkIntent& intent, int64_t sequence) {
  PgaEdge e;
  e.id = intent.id;
  e.intent_id = intent.id;
  e.src = intent.src;
  e.dst = intent.dst;
  e.classifier = intent.classifier;
  e.action = intent.action;
  e.chain = intent.chain;
  e.bandwidth_mbps = intent.bandwidth_mbps;
  e.specificity = intent.Specificity();
  e.sequence = sequence;
  return e;
}

PolicyGraph PolicyGraph::FromIntents(const std::vector<NetworkIntent>& intents) {
  PolicyGraph g;
  for (size_t i = 0; i < intents.size(); ++i) {
    g.edges.push_back(EdgeFromIntent(intents[i], static_cast<int64_t>(i)));
  }
  g.Canonicalize();
  return g;
}

void PolicyGraph::Canonicalize() {
  std::sort(edges.begin(), edges.end(),
            [](const PgaEdge& a, const PgaEdge& b) { return a.id < b.id; });
}

std::string PolicyGraph::CanonicalString() const {
  std::vector<std::string> lines;
  for (const PgaEdge& e : edges) lines.push_back(e.CanonicalString());
  std::sort(lines.begin(), lines.end());
  return absl::StrJoin(lines, "\n");
}

std::string PolicyGraph::ToDot() const {
  std::map<std::string, std::string> node_ids;
  for (const PgaEdge& e : edges) {
    node_ids[e.src.ToString()];
    node_ids[e.dst.ToString()];
  }
  int next = 0;
  for (auto& [name, id] : node_ids) id = absl::StrCat("n", next++);

  std::vector<std::tuple<std::string, std::string, std::string, std::string>>
      lines;
  for (const PgaEdge& e : edges) {
    std::string label = absl::StrCat(
        ActionName(e.action), "/", e.classifier.ToString(), "/",
        e.chain.empty() ? "-" : ChainToString(e.chain));
    if (e.bandwidth_mbps.has_value()) {
      absl::StrAppend(&label, "/bw=", FormatNumber(*e.bandwidth_mbps));
    }
    lines.emplace_back(node_ids[e.src.ToString()], node_ids[e.dst.ToString()],
                       e.id, label);
  }
  std::sort(lines.begin(), lines.end());

  std::string out = "digraph policy {\n  rankdir=LR;\n";
  for (const auto& [name, id] : node_ids) {
    absl::StrAppend(&out, "  ", id, " [label=\"", name, "\"];\n");
  }
  for (const auto& [from, to, id, label] : lines) {
    absl::StrAppend(&out, "  ", from, " -> ", to, " [label=\"", label,
                    "\", id=\"", id, "\"];\n");
  }
  out += "}\n";
  return out;
}

std::optional<OverlapWitness> EdgesOverlap(const PgaEdge& a, const PgaEdge& b,
                                           const HostInventory& inv,
                                           const LabelTaxonomy& tax) {
  return Witness(a, CoverageOf(a, inv, tax), b, CoverageOf(b, inv, tax), inv);
}

absl::string_view ConflictKindName(ConflictKind kind) {
  switch (kind) {
    case ConflictKind::kAction:
      return "ActionConflict";
    case ConflictKind::kChainOrder:
      return "ChainOrderConflict";
    case ConflictKind::kBandwidth:
      return "BandwidthConflict";
  }
  return "";
}

bool ChainsContradict(const std::vector<NfKind>& a,
                      const std::vector<NfKind>& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = i + 1; j < a.size(); ++j) {
      auto bi = std::find(b.begin(), b.end(), a[i]);
      auto bj = std::find(b.begin(), b.end(), a[j]);
      if (bi != b.end() && bj != b.end() && bj < bi) return true;
    }
  }
  return false;
}

std::vector<NfKind> MergeChains(
    const std::vector<const std::vector<NfKind>*>& by_precedence,
    int* discarded) {
  const size_t n = NfKind::All().size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<bool> present(n, false);
  int dropped = 0;
  for (const std::vector<NfKind>* chain : by_precedence) {
    for (NfKind k : *chain) present[k.rank()] = true;
    bool cyclic = false;
    for (size_t i = 0; i < chain->size() && !cyclic; ++i) {
      for (size_t j = i + 1; j < chain->size(); ++j) {
        if (reach[(*chain)[j].rank()][(*chain)[i].rank()]) {
          cyclic = true;
          break;
        }
      }
    }
    if (cyclic) {
      ++dropped;
      continue;
    }
    for (size_t i = 0; i < chain->size(); ++i) {
      for (size_t j = i + 1; j < chain->size(); ++j) {
        reach[(*chain)[i].rank()][(*chain)[j].rank()] = true;
      }
    }
    for (size_t k = 0; k < n; ++k) {
      for (size_t i = 0; i < n; ++i) {
        if (!reach[i][k]) continue;
        for (size_t j = 0; j < n; ++j) {
          if (reach[k][j]) reach[i][j] = true;
        }
      }
    }
  }
  if (discarded != nullptr) *discarded = dropped;

  // Kahn's algorithm over the closure, lowest registry rank first.
  std::vector<NfKind> all = NfKind::All();
  std::vector<NfKind> out;
  std::vector<bool> placed(n, false);
  while (true) {
    std::optional<size_t> pick;
    for (size_t v = 0; v < n && !pick; ++v) {
      if (!present[v] || placed[v]) continue;
      bool ready = true;
      for (size_t u = 0; u < n; ++u) {
        if (present[u] && !placed[u] && reach[u][v]) {
          ready = false;
          break;
        }
      }
      if (ready) pick = v;
    }
    if (!pick) break;
    placed[*pick] = true;
    out.push_back(all[*pick]);
  }
  return out;
}

nlohmann::ordered_json ConflictToJson(const Conflict& c) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(ConflictKindName(c.kind));
  j["left"] = c.left;
  j["right"] = c.right;
  j["witness"] = {{"src", c.witness.src_host},
                  {"dst", c.witness.dst_host},
                  {"proto", std::string(ProtoName(c.witness.proto))},
                  {"port", c.witness.port}};
  if (c.resolution.has_value()) {
    j["resolution"] = {{"winner", c.resolution->winner},
                       {"rule", c.resolution->rule}};
  } else {
    j["resolution"] = nullptr;
  }
  return j;
}

std::vector<Conflict> DetectConflicts(const std::vector<PgaEdge>& edges,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax) {
  std::vector<Coverage> cov;
  cov.reserve(edges.size());
  for (const PgaEdge& e : edges) cov.push_back(CoverageOf(e, inv, tax));

  std::vector<Conflict> out;
  for (size_t i = 0; i < edges.size(); ++i) {
    for (size_t j = i + 1; j < edges.size(); ++j) {
      const PgaEdge& a = edges[i];
      const PgaEdge& b = edges[j];
      std::optional<OverlapWitness> w = Witness(a, cov[i], b, cov[j], inv);
      if (!w.has_value()) continue;
      const bool a_first = a.id < b.id;
      auto add = [&](ConflictKind kind) {
        out.push_back(Conflict{.kind = kind,
                               .left = a_first ? a.id : b.id,
                               .right = a_first ? b.id : a.id,
                               .witness = *w});
      };
      if (a.action != b.action) {
        add(ConflictKind::kAction);
        continue;
      }
      if (a.action != Action::kAllow) continue;
      if (ChainsContradict(a.chain, b.chain)) add(ConflictKind::kChainOrder);
      if (a.bandwidth_mbps.has_value() && b.bandwidth_mbps.has_value() &&
          a.src == b.src && a.dst == b.dst && a.classifier == b.classifier) {
        add(ConflictKind::kBandwidth);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Conflict& x, const Conflict& y) {
    return std::tie(x.left, x.right, x.kind) < std::tie(y.left, y.right, y.kind);
  });
  return out;
}

absl::string_view ResolutionPolicyName(ResolutionPolicy policy) {
  switch (policy) {
    case ResolutionPolicy::kSpecificityThenDeny:
      return "specificity-then-deny";
    case ResolutionPolicy::kDenyOverrides:
      return "deny-overrides";
    case ResolutionPolicy::kFirstWriterWins:
      return "first-writer-wins";
  }
  return "";
}

std::optional<ResolutionPolicy> ResolutionPolicyFromName(
    absl::string_view name) {
  auto fold = [](absl::string_view s) {
    std::string out;
    for (char c : s) {
      if (c != '-' && c != '_') out.push_back(absl::ascii_tolower(c));
    }
    return out;
  };
  for (ResolutionPolicy p :
       {ResolutionPolicy::kSpecificityThenDeny,
        ResolutionPolicy::kDenyOverrides, ResolutionPolicy::kFirstWriterWins}) {
    if (fold(ResolutionPolicyName(p)) == fold(name)) return p;
  }
  return std::nullopt;
}

bool Beats(const PgaEdge& f, const PgaEdge& e, ResolutionPolicy policy) {
  switch (policy) {
    case ResolutionPolicy::kSpecificityThenDeny:
      if (f.specificity != e.specificity) return f.specificity > e.specificity;
      return f.action == Action::kBlock;
    case ResolutionPolicy::kDenyOverrides:
      return f.action == Action::kBlock;
    case ResolutionPolicy::kFirstWriterWins:
      return f.sequence < e.sequence;
  }
  return false;
}

absl::StatusOr<ResolveResult> Resolve(const std::vector<Conflict>& conflicts,
                                      const std::vector<PgaEdge>& edges,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax,
                                      ResolutionPolicy policy) {
  const size_t n = edges.size();
  std::map<std::string, size_t> by_id;
  for (size_t i = 0; i < n; ++i) {
    if (!by_id.emplace(edges[i].id, i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate edge id ", edges[i].id));
    }
  }

  ResolveResult result;
  result.log = conflicts;
  for (Conflict& c : result.log) {
    auto l = by_id.find(c.left);
    auto r = by_id.find(c.right);
    if (l == by_id.end() || r == by_id.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("conflict names unknown edge ", c.left, "/", c.right));
    }
    const PgaEdge& left = edges[l->second];
    const PgaEdge& right = edges[r->second];
    if (c.kind == ConflictKind::kAction) {
      if (policy == ResolutionPolicy::kFirstWriterWins &&
          left.sequence == right.sequence) {
        return absl::FailedPreconditionError(
            absl::StrCat("unresolvable conflict between ", left.id, " and ",
                         right.id, ": same submission order"));
      }
      const bool left_wins = Beats(left, right, policy);
      const PgaEdge& w = left_wins ? left : right;
      const PgaEdge& lo = left_wins ? right : left;
      c.resolution = Resolution{w.id, ResolutionRule(w, lo, policy)};
    } else {
      const PgaEdge& w = Precedes(left, right) ? left : right;
      c.resolution = Resolution{
          w.id, c.kind == ConflictKind::kChainOrder ? "chain-precedence"
                                                    : "reservation-precedence"};
    }
  }

  std::vector<Coverage> cov;
  cov.reserve(n);
  for (const PgaEdge& e : edges) cov.push_back(CoverageOf(e, inv, tax));
  AtomSpace atoms(edges);
  std::vector<AtomMask> atom_of;
  atom_of.reserve(n);
  for (const PgaEdge& e : edges) atom_of.push_back(atoms.Atoms(e.classifier));

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return Precedes(edges[a], edges[b]);
  });

  // Duplicate reservations over identical coverage: keep the first by
  // precedence.
  std::vector<bool> active(n, true);
  std::set<std::string> reserved;
  for (size_t i : order) {
    const PgaEdge& e = edges[i];
    if (e.action != Action::kAllow || !e.bandwidth_mbps.has_value()) continue;
    if (cov[i].src.none() || cov[i].dst.none()) continue;
    std::string key = absl::StrCat(e.src.ToString(), "|", e.dst.ToString(), "|",
                                   e.classifier.ToString());
    if (!reserved.insert(key).second) active[i] = false;
  }

  std::vector<std::vector<size_t>> overlaps(n);
  for (size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    for (size_t j = i + 1; j < n; ++j) {
      if (!active[j]) continue;
      if (cov[i].src.intersects(cov[j].src) &&
          cov[i].dst.intersects(cov[j].dst) &&
          atom_of[i].intersects(atom_of[j])) {
        overlaps[i].push_back(j);
        overlaps[j].push_back(i);
      }
    }
  }

  const size_t hosts = inv.size();
  for (size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const PgaEdge& e = edges[i];
    bool affected = false;
    for (size_t j : overlaps[i]) {
      const PgaEdge& f = edges[j];
      if ((f.action != e.action && Beats(f, e, policy)) ||
          (f.action == Action::kAllow && e.action == Action::kAllow &&
           f.chain != e.chain)) {
        affected = true;
        break;
      }
    }
    if (!affected) {
      result.edges.push_back(e);
      continue;
    }

    Region kept;
    std::map<std::vector<NfKind>, Region> merged;
    size_t total = 0, kept_count = 0;
    std::vector<size_t> cover;
    std::vector<size_t> survivors;
    for (size_t s = cov[i].src.find_first(); s != HostSet::npos;
         s = cov[i].src.find_next(s)) {
      for (size_t d = cov[i].dst.find_first(); d != HostSet::npos;
           d = cov[i].dst.find_next(d)) {
        for (size_t a = atom_of[i].find_first(); a != AtomMask::npos;
             a = atom_of[i].find_next(a)) {
          ++total;
          cover.assign(1, i);
          for (size_t j : overlaps[i]) {
            if (cov[j].src[s] && cov[j].dst[d] && atom_of[j][a]) {
              cover.push_back(j);
            }
          }
          auto beaten = [&](size_t g) {
            for (size_t f : cover) {
              if (edges[f].action != edges[g].action &&
                  Beats(edges[f], edges[g], policy)) {
                return true;
              }
            }
            return false;
          };
          if (beaten(i)) continue;
          auto mark = [&](Region& region) {
            auto [it, inserted] =
                region.try_emplace({s, d}, AtomMask(atoms.size()));
            it->second[a] = true;
          };
          if (e.action == Action::kBlock) {
            mark(kept);
            ++kept_count;
            continue;
          }
          survivors.clear();
          for (size_t g : cover) {
            if (edges[g].action == Action::kAllow && !beaten(g)) {
              survivors.push_back(g);
            }
          }
          std::sort(survivors.begin(), survivors.end(), [&](size_t x, size_t y) {
            return Precedes(edges[x], edges[y]);
          });
          std::vector<const std::vector<NfKind>*> chains;
          for (size_t g : survivors) chains.push_back(&edges[g].chain);
          std::vector<NfKind> eff =
              survivors.size() == 1 ? e.chain : MergeChains(chains);
          if (eff == e.chain) {
            mark(kept);
            ++kept_count;
          } else if (survivors.front() == i) {
            mark(merged[eff]);
          }
        }
      }
    }
    if (kept_count == total) {
      result.edges.push_back(e);
      continue;
    }
    auto emit = [&](const Region& region, const std::vector<NfKind>& chain,
                    absl::string_view tag, int& counter) {
      for (const Rect& rect : Decompose(region, hosts)) {
        for (const Classifier& c : atoms.ToClassifiers(rect.atoms)) {
          PgaEdge piece = e;
          piece.id = absl::StrCat(e.id, tag, ++counter);
          piece.src = Narrow(e.src, cov[i].src, rect.src, inv);
          piece.dst = Narrow(e.dst, cov[i].dst, rect.dst, inv);
          piece.classifier = c;
          piece.chain = chain;
          result.edges.push_back(std::move(piece));
        }
      }
    };
    int residual = 0, merge = 0;
    emit(kept, e.chain, "~", residual);
    for (const auto& [chain, region] : merged) emit(region, chain, "+", merge);
  }

  std::sort(result.edges.begin(), result.edges.end(),
            [](const PgaEdge& a, const PgaEdge& b) { return a.id < b.id; });
  if (!DetectConflicts(result.edges, inv, tax).empty()) {
    return absl::InternalError("resolution left conflicts behind");
  }
  return result;
}

absl::StatusOr<ComposeResult> Compose(const PolicyGraph& g1,
                                      const PolicyGraph& g2,
                                      const HostInventory& inv,
                                      const LabelTaxonomy& tax,
                                      ResolutionPolicy policy) {
  std::map<std::string, PgaEdge> merged;
  for (const PolicyGraph* g : {&g1, &g2}) {
    for (const PgaEdge& e : g->edges) {
      auto [it, inserted] = merged.try_emplace(e.id, e);
      if (!inserted && it->second.CanonicalString() != e.CanonicalString()) {
        return absl::InvalidArgumentError(
            absl::StrCat("edge id ", e.id, " names two different edges"));
      }
    }
  }
  std::vector<PgaEdge> edges;
  edges.reserve(merged.size());
  for (auto& [id, e] : merged) edges.push_back(std::move(e));
  std::vector<Conflict> conflicts = DetectConflicts(edges, inv, tax);
  absl::StatusOr<ResolveResult> resolved =
      Resolve(conflicts, edges, inv, tax, policy);
  if (!resolved.ok()) return resolved.status();
  ComposeResult out;
  out.graph.edges = std::move(resolved->edges);
  out.log = std::move(resolved->log);
  return out;
}

}  // namespace idnv

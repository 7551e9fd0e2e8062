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

#include "idnv/harness.h"

#include <algorithm>
#include <chrono>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "idnv/intent_parser.h"
#include "idnv/policy_graph.h"
#include "idnv/sfc_compiler.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

constexpr const char* kZones[] = {"ZoneA", "ZoneB", "ZoneC", "ZoneD"};
constexpr const char* kRoles[] = {"Web", "DNS", "Mail", "Staff", "Student"};
constexpr uint16_t kPorts[] = {53, 80, 443};

std::string AreaName(int zone, int area) {
  return absl::StrCat(std::string(1, static_cast<char>('A' + zone)), area + 1);
}
std::string AreaSwitch(int zone, int area) {
  return absl::StrCat(std::string(1, static_cast<char>('a' + zone)), area + 1);
}

template <typename T>
const T& Pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
}

int Below(int n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

bool Chance(double p, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0, 1)(rng) < p;
}

std::string RandomArea(std::mt19937_64& rng) {
  return AreaName(Below(4, rng), Below(2, rng));
}

// Zone, area, role, zone.role or area.role.
std::string RandomEpg(std::mt19937_64& rng) {
  int form = Below(20, rng);
  std::string role = kRoles[Below(5, rng)];
  if (form < 3) return kZones[Below(4, rng)];
  if (form < 8) return RandomArea(rng);
  if (form < 10) return role;
  if (form < 15) return absl::StrCat(kZones[Below(4, rng)], ".", role);
  return absl::StrCat(RandomArea(rng), ".", role);
}

std::string RandomTraffic(std::mt19937_64& rng) {
  switch (Below(6, rng)) {
    case 0:
    case 1:
      return "";
    case 2:
      return absl::StrCat(" tcp port ", kPorts[1 + Below(2, rng)]);
    case 3:
      return " udp port 53";
    case 4:
      return " tcp port 80,443";
    default:
      return absl::StrCat(" port ", kPorts[Below(3, rng)]);
  }
}

std::string RandomChain(std::mt19937_64& rng) {
  std::vector<std::string> kinds = {"IDS", "LB", "DDOS", "FW"};
  std::shuffle(kinds.begin(), kinds.end(), rng);
  kinds.resize(1 + Below(2, rng));
  return absl::StrCat(" via ", absl::StrJoin(kinds, ","));
}

// Rules of an approach keyed the way faults address them. The first rule in
// priority order stands for its (intent, source switch, destination switch).
const LogicalRule* RuleFor(const std::vector<LogicalRule>& rules,
                           const std::string& intent, const std::string& src,
                           const std::string& dst) {
  const LogicalRule* best = nullptr;
  for (const LogicalRule& r : rules) {
    if (r.intent_id != intent || r.src_switch != src || r.dst_switch != dst ||
        r.action != Action::kAllow) {
      continue;
    }
    if (best == nullptr || RuleOrder(r, *best)) best = &r;
  }
  return best;
}

double Rate(int delivered, int total) {
  return total == 0 ? 1.0 : static_cast<double>(delivered) / total;
}

struct Deployment {
  std::vector<LogicalRule> rules;
  BehaviorTable behavior;
  std::map<std::string, Compliance> compliance;
  int faults_applied = 0;
};

absl::StatusOr<Deployment> DeployAndRun(std::vector<PgaEdge> edges,
                                        bool uniform, const Workload& w,
                                        const Campus& campus, uint64_t seed) {
  CompileOptions opts;
  opts.uniform_priority = uniform;
  Deployment d;
  d.rules = CompileLogical(edges, campus.env.inventory, campus.env.taxonomy,
                           campus.topology, opts)
                .rules;
  SwitchConfigs tables =
      CompilePhysical(d.rules, campus.topology, campus.env.inventory);
  SimNetwork net(campus.topology, campus.env.inventory, seed);
  RETURN_IF_ERROR(net.Install(tables));
  for (const HarnessFault& f : w.faults) {
    absl::StatusOr<FaultSpec> spec =
        ResolveFault(f, d.rules, tables, campus.topology);
    if (!spec.ok()) continue;  // This approach has nothing there to break.
    RETURN_IF_ERROR(net.InjectFault(*spec));
    ++d.faults_applied;
  }
  d.behavior = net.InjectWorkload(w.packets, {});
  ASSIGN_OR_RETURN(OnlineResult online,
                   VerifyOnline(d.rules, d.behavior, net.epoch()));
  d.compliance = std::move(online.compliance);
  return d;
}

}  // namespace

absl::Status WorkloadSpec::Validate() const {
  auto bad = [](absl::string_view why) {
    return absl::InvalidArgumentError(absl::StrCat("InfeasibleSpec: ", why));
  };
  if (n_intents < 0 || packets_per_intent < 0 || fault_count < 0) {
    return bad("counts must be non-negative");
  }
  for (double r : {conflict_ratio, chain_ratio}) {
    if (!(r >= 0 && r <= 1)) return bad("ratios must lie in [0, 1]");
  }
  if (conflict_ratio > 0 && n_intents < 2) {
    return bad("conflicts need at least two intents");
  }
  return absl::OkStatus();
}

absl::StatusOr<WorkloadSpec> WorkloadSpec::FromJson(
    const nlohmann::ordered_json& j) {
  if (!j.is_object()) return absl::InvalidArgumentError("spec is not an object");
  WorkloadSpec s;
  try {
    s.n_intents = j.value("n_intents", s.n_intents);
    s.conflict_ratio = j.value("conflict_ratio", s.conflict_ratio);
    s.chain_ratio = j.value("chain_ratio", s.chain_ratio);
    s.packets_per_intent = j.value("packets_per_intent", s.packets_per_intent);
    s.fault_count = j.value("fault_count", s.fault_count);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(e.what());
  }
  RETURN_IF_ERROR(s.Validate());
  return s;
}

nlohmann::ordered_json WorkloadSpec::ToJson() const {
  return {{"n_intents", n_intents},
          {"conflict_ratio", conflict_ratio},
          {"chain_ratio", chain_ratio},
          {"packets_per_intent", packets_per_intent},
          {"fault_count", fault_count},
          {"seed", seed}};
}

Campus MakeCampus() {
  Campus c;
  LabelTaxonomy& tax = c.env.taxonomy;
  int loc = tax.AddDimension("location");
  int role = tax.AddDimension("role");
  (void)tax.AddLabel("Service", "", role);
  (void)tax.AddLabel("User", "", role);
  for (const char* r : {"Web", "DNS", "Mail"}) (void)tax.AddLabel(r, "Service", role);
  for (const char* r : {"Staff", "Student"}) (void)tax.AddLabel(r, "User", role);

  Topology& t = c.topology;
  (void)t.AddSwitch("core");
  for (int z = 0; z < 4; ++z) {
    (void)tax.AddLabel(kZones[z], "", loc);
    std::string zsw = absl::StrCat("z", std::string(1, 'a' + z));
    (void)t.AddSwitch(zsw);
    (void)t.AddLink("core", zsw, 1000);
    for (int a = 0; a < 2; ++a) {
      (void)tax.AddLabel(AreaName(z, a), kZones[z], loc);
      (void)t.AddSwitch(AreaSwitch(z, a));
      (void)t.AddLink(zsw, AreaSwitch(z, a), 1000);
      for (int r = 0; r < 5; ++r) {
        Host h;
        h.id = absl::StrFormat("h%d%d%d", z + 1, a + 1, r + 1);
        h.ip = Ipv4((10u << 24) | ((z + 1u) << 16) | ((a + 1u) << 8) |
                    (r + 1u));
        h.labels = {AreaName(z, a), kRoles[r]};
        h.attach_switch = AreaSwitch(z, a);
        (void)c.env.inventory.AddHost(std::move(h), tax);
      }
    }
  }
  for (NfKind k : {NfKind::IDS(), NfKind::LB(), NfKind::DDOS(), NfKind::FW()}) {
    std::string sw = absl::AsciiStrToLower(absl::StrCat("nf-", k.name()));
    (void)t.AddSwitch(sw);
    (void)t.AddLink("core", sw, 1000);
    (void)t.AddNf(k, sw);
  }
  (void)t.AttachHosts(c.env.inventory);
  return c;
}

absl::StatusOr<Workload> GenerateWorkload(const WorkloadSpec& spec,
                                          const Campus& campus) {
  RETURN_IF_ERROR(spec.Validate());
  const LabelTaxonomy& tax = campus.env.taxonomy;
  const HostInventory& inv = campus.env.inventory;
  std::mt19937_64 rng(spec.seed);
  Workload w;
  w.conflict_pairs =
      static_cast<int>(std::floor(spec.n_intents * spec.conflict_ratio / 2));
  std::string dsl;
  int next = 0;
  auto id = [&] { return absl::StrFormat("i%04d", ++next); };
  for (int p = 0; p < w.conflict_pairs; ++p) {
    int sz = Below(4, rng);
    int dz = Below(4, rng);
    std::string role = kRoles[Below(5, rng)];
    absl::StrAppend(&dsl, "intent ", id(), " { from ", kZones[sz], " to ",
                    kZones[dz], " block }\n");
    absl::StrAppend(&dsl, "intent ", id(), " { from ",
                    AreaName(sz, Below(2, rng)), ".", kRoles[Below(5, rng)],
                    " to ", kZones[dz], ".", role, " allow",
                    RandomTraffic(rng),
                    Chance(spec.chain_ratio, rng) ? RandomChain(rng) : "",
                    " }\n");
  }
  while (next < spec.n_intents) {
    absl::StrAppend(&dsl, "intent ", id(), " { from ", RandomEpg(rng), " to ",
                    RandomEpg(rng), " allow", RandomTraffic(rng),
                    Chance(spec.chain_ratio, rng) ? RandomChain(rng) : "",
                    " }\n");
  }
  ASSIGN_OR_RETURN(w.intents, ParseIntentFile(dsl, tax));
  w.packets =
      SampleIntentTraffic(w.intents, inv, tax, spec.packets_per_intent, rng);
  if (spec.fault_count == 0 || w.intents.empty()) return w;

  ASSIGN_OR_RETURN(ComposeResult composed,
                   Compose(PolicyGraph::FromIntents(w.intents), PolicyGraph{},
                           inv, tax, ResolutionPolicy::kSpecificityThenDeny));
  std::vector<LogicalRule> rules =
      CompileLogical(composed.graph.edges, inv, tax, campus.topology).rules;
  std::set<std::pair<std::string, int>> seen;  // (rule id, hop)
  std::vector<HarnessFault> candidates;
  std::set<std::string> allow_ids;
  for (const NetworkIntent& i : w.intents) {
    if (i.action == Action::kAllow) allow_ids.insert(i.id);
  }
  for (const WorkloadItem& item : w.packets) {
    if (!item.intent_id.has_value() || !allow_ids.contains(*item.intent_id)) {
      continue;
    }
    const Packet& p = item.packet;
    const LogicalRule* r =
        MatchingRule(rules, p.src_ip, p.dst_ip, p.proto, p.dst_port);
    if (r == nullptr || r->action != Action::kAllow ||
        RuleFor(rules, r->intent_id, r->src_switch, r->dst_switch) != r) {
      continue;
    }
    for (int hop = 0; hop < static_cast<int>(r->path.size()); ++hop) {
      if (!seen.insert({r->rule_id, hop}).second) continue;
      HarnessFault f;
      f.intent_id = r->intent_id;
      f.src_switch = r->src_switch;
      f.dst_switch = r->dst_switch;
      f.hop = hop;
      candidates.push_back(std::move(f));
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  if (static_cast<int>(candidates.size()) > spec.fault_count) {
    candidates.resize(spec.fault_count);
  }
  for (HarnessFault& f : candidates) {
    f.kind = Chance(0.5, rng) ? FaultKind::kDropEntry
                              : FaultKind::kCorruptOutPort;
    f.seed = rng();
  }
  w.faults = std::move(candidates);
  return w;
}

absl::StatusOr<FaultSpec> ResolveFault(const HarnessFault& fault,
                                       const std::vector<LogicalRule>& rules,
                                       const SwitchConfigs& tables,
                                       const Topology& t) {
  const LogicalRule* r =
      RuleFor(rules, fault.intent_id, fault.src_switch, fault.dst_switch);
  if (r == nullptr || fault.hop >= static_cast<int>(r->path.size())) {
    return absl::NotFoundError(absl::StrCat("no rule for ", fault.intent_id,
                                            " ", fault.src_switch, "->",
                                            fault.dst_switch));
  }
  const std::string& sw = r->path[fault.hop];
  const FlowEntry* target = nullptr;
  if (auto it = tables.find(sw); it != tables.end()) {
    for (const FlowEntry& e : it->second.entries) {
      if (e.rule_id == r->rule_id) {
        target = &e;
        break;
      }
    }
  }
  if (target == nullptr) {
    return absl::NotFoundError(
        absl::StrCat("no entry for ", r->rule_id, " on ", sw));
  }
  FaultSpec spec{fault.kind, sw, r->rule_id};
  spec.seed = fault.seed;
  if (fault.kind != FaultKind::kCorruptOutPort) return spec;
  // Prefer a port that leaves the path, so the damage is visible.
  std::set<std::string> on_path(r->path.begin(), r->path.end());
  std::vector<int> off, other;
  for (int p = 1; p <= t.PortCount(sw); ++p) {
    if (p == target->out_port) continue;
    std::optional<PortPeer> peer = t.PeerAt(sw, p);
    bool leaves = peer.has_value() &&
                  (peer->is_host || !on_path.contains(peer->id));
    (leaves ? off : other).push_back(p);
  }
  const std::vector<int>& pool = off.empty() ? other : off;
  if (pool.empty()) {
    spec.kind = FaultKind::kDropEntry;  // Nowhere else to point it.
    return spec;
  }
  spec.wrong_port = pool[fault.seed % pool.size()];
  return spec;
}

absl::string_view ApproachName(Approach a) {
  switch (a) {
    case Approach::kNaive:
      return "Naive";
    case Approach::kRandomDrop:
      return "RandomDrop";
    case Approach::kComposeOnly:
      return "ComposeOnly";
    case Approach::kFullEngine:
      return "FullEngine";
  }
  return "?";
}

const ApproachOutcome* ArrivalResult::Find(Approach a) const {
  for (const ApproachOutcome& o : outcomes) {
    if (o.approach == a) return &o;
  }
  return nullptr;
}

bool ArrivalResult::OrderingHolds() const {
  const ApproachOutcome* full = Find(Approach::kFullEngine);
  const ApproachOutcome* compose = Find(Approach::kComposeOnly);
  const ApproachOutcome* drop = Find(Approach::kRandomDrop);
  const ApproachOutcome* naive = Find(Approach::kNaive);
  if (!full || !compose || !drop || !naive) return false;
  return full->arrival_rate > compose->arrival_rate &&
         compose->arrival_rate > drop->arrival_rate &&
         drop->arrival_rate > naive->arrival_rate;
}

absl::StatusOr<ArrivalResult> RunArrivalExperiment(
    const WorkloadSpec& spec, const Campus& campus,
    const ArrivalOptions& options) {
  ASSIGN_OR_RETURN(Workload w, GenerateWorkload(spec, campus));
  const HostInventory& inv = campus.env.inventory;
  const LabelTaxonomy& tax = campus.env.taxonomy;
  ArrivalResult result;
  result.spec = spec;
  std::set<std::string> allow_ids;
  for (const NetworkIntent& i : w.intents) {
    if (i.action == Action::kAllow) allow_ids.insert(i.id);
  }
  PolicyGraph raw = PolicyGraph::FromIntents(w.intents);
  ASSIGN_OR_RETURN(ComposeResult composed,
                   Compose(raw, PolicyGraph{}, inv, tax,
                           ResolutionPolicy::kSpecificityThenDeny));
  result.policy_dot = composed.graph.ToDot();

  for (Approach a : options.approaches) {
    ApproachOutcome out;
    out.approach = a;
    BehaviorTable behavior;
    switch (a) {
      case Approach::kNaive:
      case Approach::kRandomDrop:
      case Approach::kComposeOnly: {
        std::vector<PgaEdge> edges = raw.edges;
        if (a == Approach::kComposeOnly) edges = composed.graph.edges;
        if (a == Approach::kRandomDrop) {
          std::mt19937_64 coin(spec.seed ^ 0x5eedULL);
          std::set<std::string> dropped;
          for (const Conflict& c : DetectConflicts(raw.edges, inv, tax)) {
            if (dropped.contains(c.left) || dropped.contains(c.right)) continue;
            dropped.insert(Chance(0.5, coin) ? c.left : c.right);
          }
          std::erase_if(edges, [&](const PgaEdge& e) {
            return dropped.contains(e.id);
          });
        }
        ASSIGN_OR_RETURN(Deployment d,
                         DeployAndRun(std::move(edges),
                                      a != Approach::kComposeOnly, w, campus,
                                      spec.seed));
        behavior = std::move(d.behavior);
        out.compliance = std::move(d.compliance);
        out.faults_applied = d.faults_applied;
        break;
      }
      case Approach::kFullEngine: {
        CycleOptions opts;
        opts.seed = spec.seed;
        opts.max_retries = options.max_retries;
        VerificationEngine engine(campus.env, campus.topology, opts);
        RETURN_IF_ERROR(engine.LoadIntents(w.intents));
        RETURN_IF_ERROR(engine.Compose());
        engine.Compile();
        std::vector<FaultSpec> faults;
        for (const HarnessFault& f : w.faults) {
          absl::StatusOr<FaultSpec> s =
              ResolveFault(f, engine.compiled().rules,
                           engine.expected_tables(), campus.topology);
          if (s.ok()) faults.push_back(*s);
        }
        out.faults_applied = static_cast<int>(faults.size());
        RETURN_IF_ERROR(engine.Deploy(faults));
        engine.SetWorkload(w.packets);
        ASSIGN_OR_RETURN(std::vector<Finding> validity,
                         engine.VerifyValidity());
        std::vector<Finding> pending = engine.feasibility_findings();
        pending.insert(pending.end(), validity.begin(), validity.end());
        RETURN_IF_ERROR(
            engine.FeedbackLoop(std::move(pending), options.max_retries)
                .status());
        behavior = engine.behavior();
        out.compliance = engine.compliance();
        break;
      }
    }
    for (const BehaviorRecord& rec : behavior.records) {
      if (!rec.intent_id.has_value() || !allow_ids.contains(*rec.intent_id)) {
        continue;
      }
      ++out.allow_packets;
      out.delivered += rec.outcome == Outcome::kDelivered;
    }
    out.arrival_rate = Rate(out.delivered, out.allow_packets);
    result.outcomes.push_back(std::move(out));
  }
  return result;
}

std::vector<CdfPoint> MakeCdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<CdfPoint> cdf;
  for (size_t i = 0; i < samples.size(); ++i) {
    cdf.push_back({samples[i], static_cast<double>(i + 1) / samples.size()});
  }
  return cdf;
}

bool CdfValid(const std::vector<CdfPoint>& cdf) {
  if (cdf.empty()) return false;
  for (size_t i = 0; i < cdf.size(); ++i) {
    if (cdf[i].fraction <= 0 || cdf[i].fraction > 1) return false;
    if (i > 0 && (cdf[i].time_ms < cdf[i - 1].time_ms ||
                  cdf[i].fraction < cdf[i - 1].fraction)) {
      return false;
    }
  }
  return cdf.back().fraction == 1.0;
}

bool ScalingResult::MeansNonDecreasing() const {
  double last = -1;
  for (const auto& [n, mean] : mean_ms) {
    if (mean < last) return false;
    last = mean;
  }
  return true;
}

absl::StatusOr<ScalingResult> RunScalingExperiment(
    const ScalingOptions& options, const Campus& campus) {
  ScalingResult result;
  for (int n : options.n_list) {
    std::vector<double> times;
    for (int trial = 0; trial < options.trials; ++trial) {
      WorkloadSpec spec;
      spec.n_intents = n;
      spec.conflict_ratio = n < 2 ? 0 : options.conflict_ratio;
      spec.chain_ratio = options.chain_ratio;
      spec.packets_per_intent = 0;
      spec.fault_count = 0;
      spec.seed = options.seed * 1000003 + static_cast<uint64_t>(n) * 101 +
                  static_cast<uint64_t>(trial);
      ASSIGN_OR_RETURN(Workload w, GenerateWorkload(spec, campus));
      VerificationEngine engine(campus.env, campus.topology, {});
      auto start = std::chrono::steady_clock::now();
      RETURN_IF_ERROR(engine.LoadIntents(std::move(w.intents)));
      RETURN_IF_ERROR(engine.Compose());
      engine.Compile();
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
      times.push_back(ms);
      result.trials.push_back({n, trial, ms, n > 0 ? ms / n : 0});
    }
    if (times.empty()) continue;
    double sum = 0;
    for (double t : times) sum += t;
    result.mean_ms[n] = sum / times.size();
    result.cdf[n] = MakeCdf(times);
    for (const CdfPoint& p : result.cdf[n]) {
      if (p.fraction >= 0.9) {
        result.p90_ms[n] = p.time_ms;
        break;
      }
    }
  }
  return result;
}

namespace {

using Writer =
    std::function<absl::Status(const std::string&, const std::string&)>;

absl::Status EmitScaling(const ScalingResult& s, const Writer& write) {
  std::string scaling = "n,trial,total_ms,per_intent_ms\n";
  for (const ScalingTrial& t : s.trials) {
    absl::StrAppendFormat(&scaling, "%d,%d,%.3f,%.4f\n", t.n, t.trial,
                          t.total_ms, t.per_intent_ms);
  }
  RETURN_IF_ERROR(write("scaling.csv", scaling));
  std::string summary = "n,mean_ms,p90_ms,reference_p90_ms\n";
  for (const auto& [n, mean] : s.mean_ms) {
    std::string ref;
    for (const ReferenceBand& b : kReferenceP90) {
      if (b.n == n) ref = absl::StrCat(b.p90_ms);
    }
    absl::StrAppendFormat(&summary, "%d,%.3f,%.3f,%s\n", n, mean,
                          s.p90_ms.contains(n) ? s.p90_ms.at(n) : 0.0, ref);
  }
  RETURN_IF_ERROR(write("scaling_summary.csv", summary));
  for (const auto& [n, cdf] : s.cdf) {
    std::string body = "time_ms,fraction\n";
    for (const CdfPoint& p : cdf) {
      absl::StrAppendFormat(&body, "%.3f,%.4f\n", p.time_ms, p.fraction);
    }
    RETURN_IF_ERROR(write(absl::StrCat("cdf_", n, ".csv"), body));
  }
  return absl::OkStatus();
}

// One row per approach, averaged over seeds; the per-seed rows go to their
// own file.
absl::Status EmitArrival(const std::vector<ArrivalResult>& by_seed,
                         const Writer& write) {
  std::vector<Approach> order;
  std::map<Approach, std::vector<const ApproachOutcome*>> by_approach;
  std::string per_seed = "seed,approach,rate,delivered,allow_packets\n";
  for (const ArrivalResult& r : by_seed) {
    for (const ApproachOutcome& o : r.outcomes) {
      if (!by_approach.contains(o.approach)) order.push_back(o.approach);
      by_approach[o.approach].push_back(&o);
      absl::StrAppendFormat(&per_seed, "%d,%s,%.4f,%d,%d\n", r.spec.seed,
                            ApproachName(o.approach), o.arrival_rate,
                            o.delivered, o.allow_packets);
    }
  }
  std::string arrival =
      "approach,rate,min_rate,max_rate,delivered,allow_packets\n";
  for (Approach a : order) {
    const auto& runs = by_approach[a];
    double sum = 0, lo = 1, hi = 0;
    int delivered = 0, total = 0;
    for (const ApproachOutcome* o : runs) {
      sum += o->arrival_rate;
      lo = std::min(lo, o->arrival_rate);
      hi = std::max(hi, o->arrival_rate);
      delivered += o->delivered;
      total += o->allow_packets;
    }
    absl::StrAppendFormat(&arrival, "%s,%.4f,%.4f,%.4f,%d,%d\n",
                          ApproachName(a), sum / runs.size(), lo, hi,
                          delivered, total);
  }
  RETURN_IF_ERROR(write("arrival.csv", arrival));
  RETURN_IF_ERROR(write("arrival_by_seed.csv", per_seed));
  return write("policy_graph.dot", by_seed.empty() ? PolicyGraph{}.ToDot()
                                                   : by_seed[0].policy_dot);
}

}  // namespace

absl::Status EmitReports(const ExperimentResult& result,
                         const std::string& out_dir,
                         const EmitOptions& which) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    return absl::InternalError(absl::StrCat(out_dir, ": ", ec.message()));
  }
  Writer write = [&](const std::string& name,
                     const std::string& body) -> absl::Status {
    fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) {
      return absl::InternalError(
          absl::StrCat(path.string(), ": ", std::strerror(errno)));
    }
    return absl::OkStatus();
  };
  if (which.scaling) RETURN_IF_ERROR(EmitScaling(result.scaling, write));
  if (which.arrival) RETURN_IF_ERROR(EmitArrival(result.arrival, write));
  return absl::OkStatus();
}

}  // namespace idnv

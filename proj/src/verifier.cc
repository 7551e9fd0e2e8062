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

#include "idnv/verifier.h"

#include <algorithm>
#include <chrono>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "idnv/intent_parser.h"
#include "idnv/nl_normalizer.h"
#include "idnv/status_macros.h"

namespace idnv {
namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

absl::string_view LocusName(Locus l) {
  return l == Locus::kInternal ? "Internal" : "External";
}
absl::string_view ModeName(Mode m) {
  return m == Mode::kOffline ? "Offline" : "Online";
}
absl::string_view PurposeName(Purpose p) {
  return p == Purpose::kFeasibility ? "Feasibility" : "Validity";
}

// Every concrete (proto, port) that `narrow` accepts is also accepted by
// `wide`. Ports outside both lists behave alike, so one stand-in covers them.
bool ClassifierWithin(const Classifier& narrow, const Classifier& wide) {
  std::set<uint16_t> probes(narrow.ports.begin(), narrow.ports.end());
  probes.insert(wide.ports.begin(), wide.ports.end());
  uint16_t other = 1;
  while (probes.contains(other)) ++other;
  probes.insert(other);
  for (Proto p : {Proto::kTcp, Proto::kUdp}) {
    for (uint16_t port : probes) {
      if (narrow.Matches(p, port) && !wide.Matches(p, port)) return false;
    }
  }
  return true;
}

bool IsSubsequence(const std::vector<NfKind>& small,
                   const std::vector<NfKind>& big) {
  size_t i = 0;
  for (NfKind k : big) {
    if (i < small.size() && small[i] == k) ++i;
  }
  return i == small.size();
}

bool ContainsAll(const std::vector<NfKind>& small,
                 const std::vector<NfKind>& big) {
  for (NfKind k : small) {
    if (std::find(big.begin(), big.end(), k) == big.end()) return false;
  }
  return true;
}

std::string EntryKey(const FlowEntry& e) {
  return absl::StrCat(e.rule_id, "|", e.match.ToString());
}

int CountErrors(const std::vector<Finding>& findings) {
  int n = 0;
  for (const Finding& f : findings) n += f.severity == Severity::kError;
  return n;
}

// Attaching is idempotent. Callers validate host placement beforehand.
Topology WithHosts(Topology t, const HostInventory& inv) {
  (void)t.AttachHosts(inv);
  return t;
}

}  // namespace

absl::string_view CheckIdName(CheckId id) {
  switch (id) {
    case CheckId::kIEqIPrime:
      return "IEqIPrime";
    case CheckId::kRInternalConflictFree:
      return "RInternalConflictFree";
    case CheckId::kREqIPrime:
      return "REqIPrime";
    case CheckId::kRExternalFeasible:
      return "RExternalFeasible";
    case CheckId::kROffEqRPrime:
      return "ROffEqRPrime";
    case CheckId::kROnEqF:
      return "ROnEqF";
  }
  return "?";
}

CheckClass ClassOf(CheckId id) {
  switch (id) {
    case CheckId::kRInternalConflictFree:
      return {Locus::kInternal, Mode::kOffline, Purpose::kFeasibility};
    case CheckId::kIEqIPrime:
    case CheckId::kREqIPrime:
    case CheckId::kRExternalFeasible:
      return {Locus::kExternal, Mode::kOffline, Purpose::kFeasibility};
    case CheckId::kROffEqRPrime:
      return {Locus::kExternal, Mode::kOffline, Purpose::kValidity};
    case CheckId::kROnEqF:
      return {Locus::kExternal, Mode::kOnline, Purpose::kValidity};
  }
  return {};
}

nlohmann::ordered_json Finding::ToJson() const {
  nlohmann::ordered_json j;
  j["check"] = std::string(CheckIdName(check));
  j["severity"] = severity == Severity::kError ? "Error" : "Warning";
  j["subject"] = subject;
  if (!switch_id.empty()) j["switch"] = switch_id;
  if (!rule_id.empty()) j["rule"] = rule_id;
  j["detail"] = detail;
  j["taxonomy"] = {{"locus", std::string(LocusName(taxonomy.locus))},
                   {"mode", std::string(ModeName(taxonomy.mode))},
                   {"purpose", std::string(PurposeName(taxonomy.purpose))}};
  return j;
}

Finding MakeFinding(CheckId check, Severity severity, std::string subject,
                    std::string detail) {
  Finding f;
  f.check = check;
  f.severity = severity;
  f.subject = std::move(subject);
  f.detail = std::move(detail);
  f.taxonomy = ClassOf(check);
  return f;
}

bool HasErrors(const std::vector<Finding>& findings) {
  return CountErrors(findings) > 0;
}

std::vector<Finding> CheckUserIntents(
    const std::vector<UserIntent>& users,
    const std::vector<NetworkIntent>& normalized, const LabelTaxonomy& tax) {
  std::vector<Finding> out;
  for (const UserIntent& u : users) {
    const NetworkIntent* n = nullptr;
    for (const NetworkIntent& cand : normalized) {
      if (cand.origin == u.id) n = &cand;
    }
    if (n == nullptr) {
      out.push_back(MakeFinding(CheckId::kIEqIPrime, Severity::kError, u.id,
                                "sentence has no normalized intent"));
      continue;
    }
    absl::StatusOr<CheckResult> r = CheckIEqualsIPrime(u, *n, tax);
    if (!r.ok()) {
      out.push_back(MakeFinding(CheckId::kIEqIPrime, Severity::kError, u.id,
                                std::string(r.status().message())));
    } else if (!r->pass) {
      out.push_back(MakeFinding(
          CheckId::kIEqIPrime, Severity::kError, u.id,
          absl::StrCat(r->field, ": expected ", r->expected, ", got ",
                       r->got)));
    }
  }
  return out;
}

std::vector<Finding> CheckConflictFree(const PolicyGraph& g,
                                       const HostInventory& inv,
                                       const LabelTaxonomy& tax) {
  std::vector<Finding> out;
  for (const Conflict& c : DetectConflicts(g.edges, inv, tax)) {
    out.push_back(MakeFinding(
        CheckId::kRInternalConflictFree, Severity::kError,
        absl::StrCat(c.left, "/", c.right),
        absl::StrCat(ConflictKindName(c.kind), " at ", c.witness.src_host,
                     "->", c.witness.dst_host, " ", ProtoName(c.witness.proto),
                     ":", c.witness.port)));
  }
  return out;
}

std::vector<Finding> CheckRulesMatchIntents(
    const std::vector<NetworkIntent>& intents, const PolicyGraph& g,
    const std::vector<Conflict>& log, const CompileResult& compiled,
    const HostInventory& inv, const LabelTaxonomy& tax) {
  std::vector<Finding> out;
  auto error = [&](const std::string& subject, std::string detail) {
    out.push_back(MakeFinding(CheckId::kREqIPrime, Severity::kError, subject,
                              std::move(detail)));
  };
  std::map<std::string, std::vector<const PgaEdge*>> edges_of;
  std::map<std::string, const PgaEdge*> edge_by_id;
  for (const PgaEdge& e : g.edges) {
    edges_of[e.intent_id].push_back(&e);
    edge_by_id[e.id] = &e;
  }
  std::map<std::string, std::vector<const LogicalRule*>> rules_of;
  for (const LogicalRule& r : compiled.rules) rules_of[r.edge_id].push_back(&r);
  std::set<std::string> failed;
  for (const CompileFailure& f : compiled.failures) failed.insert(f.edge_id);
  std::set<std::string> overridden, reordered;
  for (const Conflict& c : log) {
    if (c.kind == ConflictKind::kChainOrder) {
      reordered.insert(c.left);
      reordered.insert(c.right);
    }
    if (!c.resolution.has_value()) continue;
    for (const std::string& id : {c.left, c.right}) {
      if (id != c.resolution->winner) overridden.insert(id);
    }
  }

  std::set<std::string> intent_ids;
  for (const NetworkIntent& intent : intents) {
    intent_ids.insert(intent.id);
    auto it = edges_of.find(intent.id);
    if (it == edges_of.end()) {
      if (!overridden.contains(intent.id)) {
        error(intent.id,
              "no edge in the composed graph and no logged resolution");
      }
      continue;
    }
    HostSet isrc = EpgMemberBits(intent.src, inv, tax);
    HostSet idst = EpgMemberBits(intent.dst, inv, tax);
    bool any_members = false;
    for (const PgaEdge* e : it->second) {
      if (e->action != intent.action) {
        error(intent.id, absl::StrCat("edge ", e->id, " flips the action"));
      }
      if (!ClassifierWithin(e->classifier, intent.classifier)) {
        error(intent.id,
              absl::StrCat("edge ", e->id, " classifier ",
                           e->classifier.ToString(), " exceeds ",
                           intent.classifier.ToString()));
      }
      bool chain_ok = reordered.contains(intent.id)
                          ? ContainsAll(intent.chain, e->chain)
                          : IsSubsequence(intent.chain, e->chain);
      if (!chain_ok) {
        error(intent.id, absl::StrCat("edge ", e->id, " chain [",
                                      ChainToString(e->chain),
                                      "] loses [", ChainToString(intent.chain),
                                      "]"));
      }
      HostSet esrc = EpgMemberBits(e->src, inv, tax);
      HostSet edst = EpgMemberBits(e->dst, inv, tax);
      if (!esrc.is_subset_of(isrc) || !edst.is_subset_of(idst)) {
        error(intent.id,
              absl::StrCat("edge ", e->id, " reaches beyond the intent's hosts"));
      }
      if (esrc.none() || edst.none()) continue;
      any_members = true;
      if (failed.contains(e->id)) continue;  // Reported as external.
      auto rit = rules_of.find(e->id);
      if (rit == rules_of.end()) {
        error(intent.id, absl::StrCat("edge ", e->id, " has no rule"));
        continue;
      }
      std::set<Ipv4> want_src, want_dst, got_src, got_dst;
      for (size_t i = esrc.find_first(); i != HostSet::npos;
           i = esrc.find_next(i)) {
        want_src.insert(inv.hosts()[i].ip);
      }
      for (size_t i = edst.find_first(); i != HostSet::npos;
           i = edst.find_next(i)) {
        want_dst.insert(inv.hosts()[i].ip);
      }
      for (const LogicalRule* r : rit->second) {
        got_src.insert(r->src_ips.begin(), r->src_ips.end());
        got_dst.insert(r->dst_ips.begin(), r->dst_ips.end());
        if (r->action != e->action || !(r->classifier == e->classifier)) {
          error(intent.id, absl::StrCat("rule ", r->rule_id,
                                        " changes the action or classifier"));
        }
        if (r->action == Action::kAllow && r->ChainKinds() != e->chain) {
          error(intent.id, absl::StrCat("rule ", r->rule_id, " visits [",
                                        ChainToString(r->ChainKinds()),
                                        "] instead of [",
                                        ChainToString(e->chain), "]"));
        }
      }
      if (got_src != want_src || got_dst != want_dst) {
        error(intent.id, absl::StrCat("rules of edge ", e->id,
                                      " do not cover its hosts"));
      }
    }
    if (!any_members) {
      out.push_back(MakeFinding(CheckId::kREqIPrime, Severity::kWarning,
                                intent.id, "matches no host pair"));
    }
  }
  for (const LogicalRule& r : compiled.rules) {
    if (!edge_by_id.contains(r.edge_id) || !intent_ids.contains(r.intent_id)) {
      error(r.rule_id, absl::StrCat("rule traces to no edge or intent (",
                                    r.edge_id, ", ", r.intent_id, ")"));
    }
  }
  return out;
}

std::vector<Finding> CheckExternal(const FeasibilityReport& report) {
  std::vector<Finding> out;
  for (const LinkViolation& v : report.violations) {
    out.push_back(MakeFinding(
        CheckId::kRExternalFeasible, Severity::kError,
        absl::StrCat(v.link.first, "-", v.link.second),
        absl::StrCat("reserved ", FormatNumber(v.reserved_mbps), " of ",
                     FormatNumber(v.capacity_mbps), " Mbps by ",
                     absl::StrJoin(v.intent_ids, ","))));
  }
  for (const CompileFailure& f : report.failures) {
    out.push_back(MakeFinding(CheckId::kRExternalFeasible, Severity::kError,
                              f.intent_id, f.detail));
  }
  return out;
}

std::vector<Finding> VerifyFeasibility(
    const std::vector<NetworkIntent>& intents, const PolicyGraph& g,
    const std::vector<Conflict>& log, const CompileResult& compiled,
    const Topology& t, const HostInventory& inv, const LabelTaxonomy& tax) {
  std::vector<Finding> out = CheckConflictFree(g, inv, tax);
  std::vector<Finding> req =
      CheckRulesMatchIntents(intents, g, log, compiled, inv, tax);
  out.insert(out.end(), req.begin(), req.end());
  std::vector<Finding> ext = CheckExternal(
      CheckExternalFeasibility(compiled.rules, compiled.failures, t));
  out.insert(out.end(), ext.begin(), ext.end());
  return out;
}

std::vector<Finding> VerifyOffline(const std::vector<LogicalRule>& rules,
                                   const Topology& t, const HostInventory& inv,
                                   const SwitchConfigs& snapshot) {
  std::vector<Finding> out;
  SwitchConfigs expected = CompilePhysical(rules, t, inv);
  std::set<std::string> switches;
  for (const auto& [sw, c] : expected) switches.insert(sw);
  for (const auto& [sw, c] : snapshot) switches.insert(sw);
  auto finding = [&](const std::string& sw, const std::string& rule,
                     std::string detail) {
    Finding f = MakeFinding(CheckId::kROffEqRPrime, Severity::kError, sw,
                            std::move(detail));
    f.switch_id = sw;
    f.rule_id = rule;
    out.push_back(std::move(f));
  };
  for (const std::string& sw : switches) {
    std::map<std::string, std::vector<const FlowEntry*>> want, got;
    if (auto it = expected.find(sw); it != expected.end()) {
      for (const FlowEntry& e : it->second.entries) {
        want[EntryKey(e)].push_back(&e);
      }
    }
    if (auto it = snapshot.find(sw); it != snapshot.end()) {
      for (const FlowEntry& e : it->second.entries) {
        got[EntryKey(e)].push_back(&e);
      }
    }
    std::set<std::string> keys;
    for (const auto& [k, v] : want) keys.insert(k);
    for (const auto& [k, v] : got) keys.insert(k);
    for (const std::string& k : keys) {
      const std::vector<const FlowEntry*>& w = want[k];
      const std::vector<const FlowEntry*>& g = got[k];
      size_t common = std::min(w.size(), g.size());
      for (size_t i = 0; i < common; ++i) {
        const FlowEntry& a = *w[i];
        const FlowEntry& b = *g[i];
        std::vector<std::string> diffs;
        if (a.priority != b.priority) {
          diffs.push_back(absl::StrCat("priority expected ", a.priority,
                                       ", got ", b.priority));
        }
        if (a.action != b.action) {
          diffs.push_back(absl::StrCat(
              "action expected ",
              a.action == FlowAction::kDrop ? "drop" : "forward", ", got ",
              b.action == FlowAction::kDrop ? "drop" : "forward"));
        }
        if (a.out_port != b.out_port) {
          diffs.push_back(absl::StrCat("out_port expected ", a.out_port,
                                       ", got ", b.out_port));
        }
        if (a.nfs != b.nfs) {
          diffs.push_back(absl::StrCat("nfs expected [", ChainToString(a.nfs),
                                       "], got [", ChainToString(b.nfs), "]"));
        }
        if (!diffs.empty()) {
          finding(sw, a.rule_id,
                  absl::StrCat("altered entry: ", absl::StrJoin(diffs, "; ")));
        }
      }
      for (size_t i = common; i < w.size(); ++i) {
        finding(sw, w[i]->rule_id,
                absl::StrCat("missing entry: ", w[i]->ToString()));
      }
      for (size_t i = common; i < g.size(); ++i) {
        finding(sw, g[i]->rule_id,
                absl::StrCat("extra entry: ", g[i]->ToString()));
      }
    }
  }
  return out;
}

bool RecordComplies(const BehaviorRecord& rec, const LogicalRule* rule) {
  if (rule == nullptr) {
    return rec.outcome == Outcome::kDroppedNoMatch && rec.path.size() == 1;
  }
  if (rule->action == Action::kBlock) {
    return rec.outcome == Outcome::kDroppedByRule &&
           rec.at == rule->src_switch;
  }
  return rec.outcome == Outcome::kDelivered && rec.path == rule->path &&
         rec.nfs == rule->ChainKinds();
}

absl::StatusOr<OnlineResult> VerifyOnline(const std::vector<LogicalRule>& rules,
                                          const BehaviorTable& table,
                                          uint64_t current_epoch,
                                          double tolerance) {
  if (table.epoch != current_epoch) {
    return absl::FailedPreconditionError(
        absl::StrCat("StaleBehaviorTable: recorded at epoch ", table.epoch,
                     ", network is at ", current_epoch));
  }
  std::vector<const LogicalRule*> ordered;
  for (const LogicalRule& r : rules) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const LogicalRule* a, const LogicalRule* b) {
              return RuleOrder(*a, *b);
            });
  OnlineResult result;
  std::map<std::string, std::string> first_deviation;
  for (const BehaviorRecord& rec : table.records) {
    const LogicalRule* rule = nullptr;
    for (const LogicalRule* r : ordered) {
      if (r->Matches(rec.src_ip, rec.dst_ip, rec.proto, rec.dst_port)) {
        rule = r;
        break;
      }
    }
    std::string owner =
        rule != nullptr ? rule->intent_id : rec.intent_id.value_or("-");
    Compliance& c = result.compliance[owner];
    ++c.packets_checked;
    if (RecordComplies(rec, rule)) {
      ++c.packets_compliant;
      continue;
    }
    if (first_deviation.contains(owner)) continue;
    std::string want = "no match at ingress";
    if (rule != nullptr) {
      want = rule->action == Action::kBlock
                 ? absl::StrCat("drop at ", rule->src_switch)
                 : absl::StrCat("delivery via ", absl::StrJoin(rule->path, "/"),
                                " [", ChainToString(rule->ChainKinds()), "]");
    }
    first_deviation[owner] = absl::StrCat(
        "pkt ", rec.pkt_id, " expected ", want, ", got ", rec.OutcomeString(),
        " via ", absl::StrJoin(rec.path, "/"), " [", ChainToString(rec.nfs),
        "]");
  }
  for (const auto& [intent, c] : result.compliance) {
    int bad = c.packets_checked - c.packets_compliant;
    if (bad == 0 || bad <= tolerance * c.packets_checked) continue;
    result.findings.push_back(MakeFinding(
        CheckId::kROnEqF, Severity::kError, intent,
        absl::StrCat(bad, " of ", c.packets_checked, " packets deviate; ",
                     first_deviation[intent])));
  }
  return result;
}

absl::string_view RemediationStatusName(RemediationStatus s) {
  switch (s) {
    case RemediationStatus::kNothingToDo:
      return "NothingToDo";
    case RemediationStatus::kResolved:
      return "Resolved";
    case RemediationStatus::kExhausted:
      return "RemediationExhausted";
  }
  return "?";
}

nlohmann::ordered_json RemediationLog::ToJson() const {
  nlohmann::ordered_json j;
  j["status"] = std::string(RemediationStatusName(status));
  j["errors_per_round"] = errors_per_round;
  j["actions"] = nlohmann::ordered_json::array();
  for (const RemediationAction& a : actions) {
    j["actions"].push_back({{"attempt", a.attempt},
                            {"kind", a.kind},
                            {"subject", a.subject},
                            {"detail", a.detail}});
  }
  j["failing_intents"] = failing_intents;
  return j;
}

absl::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "Pass";
    case Verdict::kFail:
      return "Fail";
    case Verdict::kIncomplete:
      return "Incomplete";
  }
  return "?";
}

nlohmann::ordered_json VerificationReport::ToJson() const {
  nlohmann::ordered_json j;
  j["verdict"] = std::string(VerdictName(verdict));
  j["exit_code"] = ExitCode();
  if (!error.empty()) j["error"] = error;
  j["generations"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : generations) j["generations"][k] = v;
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckRun& c : checks) {
    CheckClass cls = ClassOf(c.id);
    int errors = 0, warnings = 0;
    for (const Finding& f : findings) {
      if (f.check != c.id) continue;
      (f.severity == Severity::kError ? errors : warnings)++;
    }
    j["checks"].push_back({{"id", std::string(CheckIdName(c.id))},
                           {"locus", std::string(LocusName(cls.locus))},
                           {"mode", std::string(ModeName(cls.mode))},
                           {"purpose", std::string(PurposeName(cls.purpose))},
                           {"executed", c.executed},
                           {"subjects", c.subjects},
                           {"errors", errors},
                           {"warnings", warnings}});
  }
  j["conflicts"] = nlohmann::ordered_json::array();
  for (const Conflict& c : conflicts) j["conflicts"].push_back(ConflictToJson(c));
  j["findings"] = nlohmann::ordered_json::array();
  for (const Finding& f : findings) j["findings"].push_back(f.ToJson());
  j["compliance"] = nlohmann::ordered_json::object();
  for (const auto& [id, c] : compliance) {
    j["compliance"][id] = {{"packets_checked", c.packets_checked},
                           {"packets_compliant", c.packets_compliant}};
  }
  j["remediation"] = remediation.ToJson();
  j["timings"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : timings_ms) j["timings"][k + "_ms"] = v;
  return j;
}

int VerificationReport::ExitCode() const {
  switch (verdict) {
    case Verdict::kPass:
      return 0;
    case Verdict::kFail:
      return 1;
    case Verdict::kIncomplete:
      return 2;
  }
  return 2;
}

VerificationEngine::VerificationEngine(Environment env, Topology topology,
                                       CycleOptions options)
    : env_(std::move(env)),
      topology_(WithHosts(std::move(topology), env_.inventory)),
      options_(options),
      net_(topology_, env_.inventory, options.seed) {}

absl::Status VerificationEngine::LoadIntents(
    absl::string_view dsl, std::optional<absl::string_view> user_source) {
  ASSIGN_OR_RETURN(std::vector<NetworkIntent> intents,
                   ParseIntentFile(dsl, env_.taxonomy));
  users_.clear();
  front_.clear();
  std::vector<NetworkIntent> normalized;
  if (user_source.has_value()) {
    ASSIGN_OR_RETURN(users_, ParseUserIntentFile(*user_source));
    for (const UserIntent& u : users_) {
      absl::StatusOr<NetworkIntent> n = NormalizeNl(u, env_.taxonomy);
      if (n.ok()) normalized.push_back(*std::move(n));
    }
  }
  Clock::time_point start = Clock::now();
  front_ = CheckUserIntents(users_, normalized, env_.taxonomy);
  timings_["IEqIPrime"] = MsSince(start);
  subjects_[CheckId::kIEqIPrime] = static_cast<int>(users_.size());
  intents.insert(intents.end(), normalized.begin(), normalized.end());
  return LoadIntents(std::move(intents));
}

absl::Status VerificationEngine::LoadIntents(
    std::vector<NetworkIntent> intents) {
  IntentTable table;
  for (NetworkIntent& i : intents) RETURN_IF_ERROR(table.Insert(i));
  intent_generation_ = table.generation();
  intents_ = std::move(intents);
  subjects_.try_emplace(CheckId::kIEqIPrime, 0);
  return absl::OkStatus();
}

absl::Status VerificationEngine::Compose() {
  Clock::time_point start = Clock::now();
  ASSIGN_OR_RETURN(ComposeResult composed,
                   idnv::Compose(PolicyGraph::FromIntents(intents_),
                                 PolicyGraph{}, env_.inventory, env_.taxonomy,
                                 options_.policy));
  timings_["compose"] = MsSince(start);
  graph_ = std::move(composed.graph);
  conflicts_ = std::move(composed.log);
  start = Clock::now();
  std::vector<Finding> internal =
      CheckConflictFree(graph_, env_.inventory, env_.taxonomy);
  timings_["RInternalConflictFree"] = MsSince(start);
  front_.insert(front_.end(), internal.begin(), internal.end());
  subjects_[CheckId::kRInternalConflictFree] =
      static_cast<int>(graph_.edges.size());
  return absl::OkStatus();
}

void VerificationEngine::Compile() {
  Clock::time_point start = Clock::now();
  compiled_ = CompileLogical(graph_.edges, env_.inventory, env_.taxonomy,
                             topology_, compile_options_);
  expected_ = CompilePhysical(compiled_.rules, topology_, env_.inventory);
  ++rule_generation_;
  timings_["compile"] = MsSince(start);
  start = Clock::now();
  feasibility_ = CheckRulesMatchIntents(intents_, graph_, conflicts_,
                                        compiled_, env_.inventory,
                                        env_.taxonomy);
  timings_["REqIPrime"] = MsSince(start);
  start = Clock::now();
  std::vector<Finding> ext = CheckExternal(CheckExternalFeasibility(
      compiled_.rules, compiled_.failures, topology_));
  timings_["RExternalFeasible"] = MsSince(start);
  feasibility_.insert(feasibility_.end(), ext.begin(), ext.end());
  subjects_[CheckId::kREqIPrime] = static_cast<int>(intents_.size());
  subjects_[CheckId::kRExternalFeasible] =
      static_cast<int>(compiled_.rules.size());
}

absl::Status VerificationEngine::Deploy(const std::vector<FaultSpec>& faults) {
  RETURN_IF_ERROR(net_.Install(expected_));
  for (const FaultSpec& f : faults) RETURN_IF_ERROR(net_.InjectFault(f));
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Finding>> VerificationEngine::VerifyValidity() {
  Clock::time_point start = Clock::now();
  SwitchConfigs snapshot = net_.Snapshot();
  snapshot_epoch_ = net_.epoch();
  std::vector<Finding> out =
      VerifyOffline(compiled_.rules, topology_, env_.inventory, snapshot);
  timings_["ROffEqRPrime"] = MsSince(start);
  subjects_[CheckId::kROffEqRPrime] = static_cast<int>(snapshot.size());

  if (workload_.empty()) {
    std::mt19937_64 rng(options_.seed);
    workload_ = SampleIntentTraffic(intents_, env_.inventory, env_.taxonomy,
                                    options_.packets_per_intent, rng);
  }
  start = Clock::now();
  behavior_ = net_.InjectWorkload(
      workload_, {options_.capacity_enforcement, options_.mbps_per_packet});
  timings_["workload"] = MsSince(start);
  start = Clock::now();
  ASSIGN_OR_RETURN(OnlineResult online,
                   VerifyOnline(compiled_.rules, behavior_, net_.epoch(),
                                options_.tolerance));
  timings_["ROnEqF"] = MsSince(start);
  subjects_[CheckId::kROnEqF] = static_cast<int>(behavior_.records.size());
  compliance_ = std::move(online.compliance);
  out.insert(out.end(), online.findings.begin(), online.findings.end());
  validity_ = out;
  return out;
}

absl::StatusOr<RemediationLog> VerificationEngine::FeedbackLoop(
    std::vector<Finding> findings, int max_retries) {
  RemediationLog log;
  log.errors_per_round.push_back(CountErrors(findings));
  if (!HasErrors(findings)) return log;
  Clock::time_point start = Clock::now();
  for (int attempt = 1; attempt <= max_retries; ++attempt) {
    bool recompile = false;
    // Over-subscribed links: the intent with the largest id moves away.
    for (const LinkViolation& v :
         CheckExternalFeasibility(compiled_.rules, {}, topology_).violations) {
      for (auto it = v.intent_ids.rbegin(); it != v.intent_ids.rend(); ++it) {
        Exclusions& ex = compile_options_.exclusions[*it];
        if (ex.links.insert(v.link).second) {
          log.actions.push_back(
              {attempt, "recompile", *it,
               absl::StrCat("avoid link ", v.link.first, "-", v.link.second)});
          recompile = true;
          break;
        }
      }
    }
    if (recompile) {
      Compile();
      RETURN_IF_ERROR(net_.Install(expected_));
    } else {
      std::set<std::string> switches;
      std::set<std::string> intents;
      for (const Finding& f : findings) {
        if (f.severity != Severity::kError) continue;
        if (f.check == CheckId::kROffEqRPrime) switches.insert(f.switch_id);
        if (f.check == CheckId::kROnEqF) intents.insert(f.subject);
      }
      for (const LogicalRule& r : compiled_.rules) {
        if (!intents.contains(r.intent_id)) continue;
        switches.insert(r.path.begin(), r.path.end());
      }
      if (switches.empty()) break;
      SwitchConfigs subset;
      for (const std::string& sw : switches) {
        auto it = expected_.find(sw);
        if (it != expected_.end()) subset[sw] = it->second;
        log.actions.push_back({attempt, "reinstall", sw,
                               "restore the compiled table"});
      }
      RETURN_IF_ERROR(net_.Reinstall(subset));
    }
    ASSIGN_OR_RETURN(std::vector<Finding> validity, VerifyValidity());
    findings = feasibility_;
    findings.insert(findings.end(), validity.begin(), validity.end());
    log.errors_per_round.push_back(CountErrors(findings));
    if (!HasErrors(findings)) {
      log.status = RemediationStatus::kResolved;
      timings_["feedback"] = MsSince(start);
      return log;
    }
  }
  timings_["feedback"] = MsSince(start);
  log.status = RemediationStatus::kExhausted;
  std::map<std::string, std::string> intent_of_rule;
  for (const LogicalRule& r : compiled_.rules) {
    intent_of_rule[r.rule_id] = r.intent_id;
  }
  std::map<std::string, std::vector<std::string>> link_owners;
  for (const LinkViolation& v :
       CheckExternalFeasibility(compiled_.rules, {}, topology_).violations) {
    link_owners[absl::StrCat(v.link.first, "-", v.link.second)] =
        v.intent_ids;
  }
  std::set<std::string> failing;
  for (const Finding& f : findings) {
    if (f.severity != Severity::kError) continue;
    if (f.check == CheckId::kROffEqRPrime) {
      failing.insert(intent_of_rule[f.rule_id]);
    } else if (auto it = link_owners.find(f.subject);
               f.check == CheckId::kRExternalFeasible &&
               it != link_owners.end()) {
      failing.insert(it->second.begin(), it->second.end());
    } else {
      failing.insert(f.subject);
    }
  }
  log.failing_intents.assign(failing.begin(), failing.end());
  return log;
}

std::vector<Finding> VerificationEngine::AllFindings() const {
  std::vector<Finding> out = front_;
  out.insert(out.end(), feasibility_.begin(), feasibility_.end());
  out.insert(out.end(), validity_.begin(), validity_.end());
  return out;
}

std::map<std::string, uint64_t> VerificationEngine::Generations() const {
  return {{"I", users_.size()},
          {"I_prime", intent_generation_},
          {"R", rule_generation_},
          {"R_prime", snapshot_epoch_},
          {"F", behavior_.epoch}};
}

VerificationReport FullCycle(const CycleInputs& inputs,
                             const CycleOptions& options) {
  VerificationReport report;
  Clock::time_point start = Clock::now();
  VerificationEngine engine(inputs.env, inputs.topology, options);
  auto finish = [&](absl::Status status) {
    report.generations = engine.Generations();
    report.conflicts = engine.conflicts();
    report.findings = engine.AllFindings();
    report.compliance = engine.compliance();
    for (CheckId id : kAllChecks) {
      auto it = engine.subjects().find(id);
      report.checks.push_back(
          {id, it != engine.subjects().end(),
           it != engine.subjects().end() ? it->second : 0});
    }
    report.timings_ms = engine.timings_ms();
    report.timings_ms["total"] = MsSince(start);
    if (!status.ok()) {
      report.verdict = Verdict::kIncomplete;
      report.error = std::string(status.message());
    } else {
      report.verdict =
          HasErrors(report.findings) ? Verdict::kFail : Verdict::kPass;
    }
    return report;
  };
  std::optional<absl::string_view> users;
  if (inputs.user_intent_source.has_value()) users = *inputs.user_intent_source;
  if (absl::Status s = engine.LoadIntents(inputs.intent_source, users);
      !s.ok()) {
    return finish(s);
  }
  if (absl::Status s = engine.Compose(); !s.ok()) return finish(s);
  engine.Compile();
  if (absl::Status s = engine.Deploy(inputs.faults); !s.ok()) return finish(s);
  absl::StatusOr<std::vector<Finding>> validity = engine.VerifyValidity();
  if (!validity.ok()) return finish(validity.status());
  std::vector<Finding> pending = engine.feasibility_findings();
  pending.insert(pending.end(), validity->begin(), validity->end());
  absl::StatusOr<RemediationLog> log =
      engine.FeedbackLoop(std::move(pending), options.max_retries);
  if (!log.ok()) return finish(log.status());
  report.remediation = *std::move(log);
  return finish(absl::OkStatus());
}

}  // namespace idnv

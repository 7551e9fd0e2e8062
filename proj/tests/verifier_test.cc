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
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "idnv/intent_parser.h"
#include "oracles.h"

namespace idnv {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::IsEmpty;
using ::testing::SizeIs;

constexpr char kPolicy[] =
    "intent web { from A1 to B1 allow tcp port 80 via IDS }\n"
    "intent back { from B1 to A1 allow }\n"
    "intent deny { from B1 to A1.DNS block }\n";

class VerifierTest : public ::testing::Test {
 protected:
  VerifierTest() {
    for (const char* s : {"s1", "s2", "s3", "s4"}) (void)topo_.AddSwitch(s);
    (void)topo_.AddLink("s1", "s2", 100);
    (void)topo_.AddLink("s2", "s3", 100);
    (void)topo_.AddLink("s2", "s4", 100);
    (void)topo_.AddNf(NfKind::IDS(), "s4");
    (void)topo_.AttachHosts(inv_);
  }

  std::vector<NetworkIntent> Parse(const std::string& dsl) {
    auto parsed = ParseIntentFile(dsl, tax_);
    EXPECT_TRUE(parsed.ok()) << parsed.status();
    return parsed.ok() ? *parsed : std::vector<NetworkIntent>{};
  }

  struct Pipeline {
    std::vector<NetworkIntent> intents;
    ComposeResult composed;
    CompileResult compiled;
    SwitchConfigs expected;
  };

  Pipeline Build(const std::string& dsl) {
    Pipeline p;
    p.intents = Parse(dsl);
    auto c = Compose(PolicyGraph::FromIntents(p.intents), {}, inv_, tax_,
                     ResolutionPolicy::kSpecificityThenDeny);
    EXPECT_TRUE(c.ok()) << c.status();
    p.composed = *c;
    p.compiled =
        CompileLogical(p.composed.graph.edges, inv_, tax_, topo_);
    p.expected = CompilePhysical(p.compiled.rules, topo_, inv_);
    return p;
  }

  CycleInputs Inputs(std::vector<FaultSpec> faults = {}) {
    return CycleInputs{{tax_, inv_}, topo_, kPolicy, std::nullopt,
                       std::move(faults)};
  }

  LabelTaxonomy tax_ = testing::SmallTaxonomy();
  HostInventory inv_ = testing::ThreeHostInventory(tax_);
  Topology topo_;
};

TEST(CheckClassTest, EveryCheckHasItsClass) {
  auto cls = [](CheckId id) {
    CheckClass c = ClassOf(id);
    return std::tuple(c.locus, c.mode, c.purpose);
  };
  const auto ext_off_feas =
      std::tuple(Locus::kExternal, Mode::kOffline, Purpose::kFeasibility);
  EXPECT_EQ(cls(CheckId::kIEqIPrime), ext_off_feas);
  EXPECT_EQ(cls(CheckId::kREqIPrime), ext_off_feas);
  EXPECT_EQ(cls(CheckId::kRExternalFeasible), ext_off_feas);
  EXPECT_EQ(cls(CheckId::kRInternalConflictFree),
            std::tuple(Locus::kInternal, Mode::kOffline, Purpose::kFeasibility));
  EXPECT_EQ(cls(CheckId::kROffEqRPrime),
            std::tuple(Locus::kExternal, Mode::kOffline, Purpose::kValidity));
  EXPECT_EQ(cls(CheckId::kROnEqF),
            std::tuple(Locus::kExternal, Mode::kOnline, Purpose::kValidity));
  EXPECT_EQ(MakeFinding(CheckId::kROnEqF, Severity::kError, "x", "y")
                .taxonomy.mode,
            Mode::kOnline);
}

TEST_F(VerifierTest, CleanPipelineHasNoFeasibilityFindings) {
  Pipeline p = Build(kPolicy);
  ASSERT_THAT(p.composed.log, SizeIs(1));
  EXPECT_THAT(VerifyFeasibility(p.intents, p.composed.graph, p.composed.log,
                                p.compiled, topo_, inv_, tax_),
              IsEmpty());
  EXPECT_THAT(VerifyOffline(p.compiled.rules, topo_, inv_, p.expected),
              IsEmpty());
}

TEST_F(VerifierTest, RawGraphIsNotConflictFree) {
  std::vector<NetworkIntent> intents = Parse(kPolicy);
  std::vector<Finding> f =
      CheckConflictFree(PolicyGraph::FromIntents(intents), inv_, tax_);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_EQ(f[0].check, CheckId::kRInternalConflictFree);
  EXPECT_EQ(f[0].subject, "back/deny");
  EXPECT_THAT(f[0].detail, HasSubstr("ActionConflict at h3->h2"));
}

TEST_F(VerifierTest, TamperedRulesBreakREqIPrime) {
  Pipeline p = Build(kPolicy);
  auto check = [&](const CompileResult& c) {
    return CheckRulesMatchIntents(p.intents, p.composed.graph, p.composed.log,
                                  c, inv_, tax_);
  };
  CompileResult flipped = p.compiled;
  for (LogicalRule& r : flipped.rules) {
    if (r.intent_id == "back") r.action = Action::kBlock;
  }
  std::vector<Finding> f = check(flipped);
  ASSERT_FALSE(f.empty());
  EXPECT_EQ(f[0].subject, "back");
  EXPECT_THAT(f[0].detail, HasSubstr("changes the action"));

  CompileResult missing = p.compiled;
  std::erase_if(missing.rules,
                [](const LogicalRule& r) { return r.intent_id == "web"; });
  f = check(missing);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_THAT(f[0].detail, HasSubstr("has no rule"));

  CompileResult no_chain = p.compiled;
  for (LogicalRule& r : no_chain.rules) r.waypoints.clear();
  f = check(no_chain);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_THAT(f[0].detail, HasSubstr("visits [] instead of [IDS]"));

  CompileResult stray = p.compiled;
  stray.rules.push_back(stray.rules[0]);
  stray.rules.back().rule_id = "r99999";
  stray.rules.back().edge_id = "ghost";
  f = check(stray);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_EQ(f[0].subject, "r99999");

  // Dropping an edge without a logged resolution.
  PolicyGraph thinner = p.composed.graph;
  std::erase_if(thinner.edges,
                [](const PgaEdge& e) { return e.intent_id == "web"; });
  f = CheckRulesMatchIntents(p.intents, thinner, p.composed.log, p.compiled,
                             inv_, tax_);
  ASSERT_FALSE(f.empty());
  EXPECT_EQ(f[0].subject, "web");
  EXPECT_THAT(f[0].detail, HasSubstr("no edge"));
}

TEST_F(VerifierTest, EmptyIntentIsOnlyAWarning) {
  Pipeline p = Build("intent none { from A2 to B2 allow }");
  std::vector<Finding> f =
      VerifyFeasibility(p.intents, p.composed.graph, p.composed.log, p.compiled,
                        topo_, inv_, tax_);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_EQ(f[0].severity, Severity::kWarning);
  EXPECT_FALSE(HasErrors(f));
}

TEST_F(VerifierTest, MissingFunctionIsExternallyInfeasible) {
  Pipeline p = Build("intent lb { from A1 to B1 allow via LB }");
  std::vector<Finding> f =
      VerifyFeasibility(p.intents, p.composed.graph, p.composed.log, p.compiled,
                        topo_, inv_, tax_);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_EQ(f[0].check, CheckId::kRExternalFeasible);
  EXPECT_EQ(f[0].subject, "lb");
  EXPECT_THAT(f[0].detail, HasSubstr("MissingNF: LB"));
}

// Every fault kind on every installed entry is caught exactly once, at the
// right switch and rule.
TEST_F(VerifierTest, EachSingleFaultGivesOneOfflineFinding) {
  Pipeline p = Build(kPolicy);
  int trials = 0;
  for (const auto& [sw, cfg] : p.expected) {
    std::set<std::string> rules;
    for (const FlowEntry& e : cfg.entries) {
      if (!e.rule_id.empty() && e.rule_id != "default") rules.insert(e.rule_id);
    }
    for (const std::string& rule : rules) {
      for (FaultKind kind : {FaultKind::kDropEntry, FaultKind::kCorruptOutPort,
                             FaultKind::kShufflePriority}) {
        // A one-port switch has nowhere else to send traffic.
        if (kind == FaultKind::kCorruptOutPort && topo_.PortCount(sw) < 2) {
          continue;
        }
        SimNetwork net(topo_, inv_, 5);
        ASSERT_TRUE(net.Install(p.expected).ok());
        FaultSpec fault{kind, sw, rule};
        fault.seed = static_cast<uint64_t>(trials);
        absl::Status injected = net.InjectFault(fault);
        ASSERT_TRUE(injected.ok()) << injected;
        std::vector<Finding> f =
            VerifyOffline(p.compiled.rules, topo_, inv_, net.Snapshot());
        ASSERT_THAT(f, SizeIs(1)) << FaultKindName(kind) << " " << sw << " "
                                  << rule;
        EXPECT_EQ(f[0].check, CheckId::kROffEqRPrime);
        EXPECT_EQ(f[0].severity, Severity::kError);
        EXPECT_EQ(f[0].switch_id, sw);
        EXPECT_EQ(f[0].rule_id, rule);
        ++trials;
      }
    }
  }
  EXPECT_GE(trials, 15);
}

TEST_F(VerifierTest, ExtraEntryIsReported) {
  Pipeline p = Build(kPolicy);
  SwitchConfigs snap = p.expected;
  FlowEntry extra = snap["s2"].entries.front();
  extra.rule_id = "r77777";
  snap["s2"].entries.push_back(extra);
  std::vector<Finding> f = VerifyOffline(p.compiled.rules, topo_, inv_, snap);
  ASSERT_THAT(f, SizeIs(1));
  EXPECT_EQ(f[0].rule_id, "r77777");
  EXPECT_THAT(f[0].detail, HasSubstr("extra entry"));
}

TEST_F(VerifierTest, StaleBehaviorTableIsRefused) {
  Pipeline p = Build(kPolicy);
  BehaviorTable t;
  t.epoch = 3;
  auto r = VerifyOnline(p.compiled.rules, t, 4);
  EXPECT_EQ(r.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(r.status().message(), HasSubstr("StaleBehaviorTable"));
  EXPECT_TRUE(VerifyOnline(p.compiled.rules, t, 3).ok());
}

// Online compliance against an independent oracle: a packet complies iff it
// behaves exactly as a hand walk over the fault-free tables predicts.
TEST_F(VerifierTest, OnlineComplianceMatchesTableWalkOracle) {
  Pipeline p = Build(kPolicy);
  std::mt19937_64 rng(23);
  std::vector<std::pair<std::string, std::string>> targets;
  for (const auto& [sw, cfg] : p.expected) {
    for (const FlowEntry& e : cfg.entries) {
      if (e.rule_id != "default") targets.emplace_back(sw, e.rule_id);
    }
  }
  for (int trial = 0; trial < 60; ++trial) {
    SimNetwork net(topo_, inv_, static_cast<uint64_t>(trial));
    ASSERT_TRUE(net.Install(p.expected).ok());
    int faults = static_cast<int>(rng() % 3);
    for (int i = 0; i < faults; ++i) {
      const auto& [sw, rule] = targets[rng() % targets.size()];
      FaultSpec f{static_cast<FaultKind>(rng() % 3), sw, rule};
      f.seed = rng();
      (void)net.InjectFault(f);  // The entry may already be gone.
    }
    std::vector<WorkloadItem> work =
        SampleIntentTraffic(p.intents, inv_, tax_, 6, rng);
    BehaviorTable table = net.InjectWorkload(work, {});
    auto online = VerifyOnline(p.compiled.rules, table, net.epoch());
    ASSERT_TRUE(online.ok());

    std::map<std::string, std::pair<int, int>> oracle;  // checked, compliant
    for (size_t k = 0; k < work.size(); ++k) {
      const BehaviorRecord& rec = table.records[k];
      const Host* src = inv_.FindByIp(rec.src_ip);
      testing::Walk want = testing::WalkTables(
          p.expected, topo_, inv_, *src, rec.dst_ip, rec.proto, rec.dst_port);
      const Host* dst = inv_.FindByIp(rec.dst_ip);
      bool delivered = rec.outcome == Outcome::kDelivered;
      bool ok = want.path == rec.path && want.nfs == rec.nfs &&
                (want.delivered_to == dst->id) == delivered &&
                (want.dropped && want.drop_rule.empty()) ==
                    (rec.outcome == Outcome::kDroppedNoMatch) &&
                (want.dropped && !want.drop_rule.empty()) ==
                    (rec.outcome == Outcome::kDroppedByRule);
      const LogicalRule* owner = MatchingRule(
          p.compiled.rules, rec.src_ip, rec.dst_ip, rec.proto, rec.dst_port);
      std::string id = owner ? owner->intent_id : *work[k].intent_id;
      ++oracle[id].first;
      oracle[id].second += ok;
    }
    std::set<std::string> flagged, expected_flags;
    for (const Finding& f : online->findings) flagged.insert(f.subject);
    for (const auto& [id, counts] : oracle) {
      const Compliance& c = online->compliance.at(id);
      EXPECT_EQ(c.packets_checked, counts.first) << id;
      EXPECT_EQ(c.packets_compliant, counts.second) << id;
      if (counts.second < counts.first) expected_flags.insert(id);
    }
    EXPECT_EQ(flagged, expected_flags) << "trial " << trial;
  }
}

TEST_F(VerifierTest, ToleranceAbsorbsSmallDeviation) {
  Pipeline p = Build(kPolicy);
  SimNetwork net(topo_, inv_);
  ASSERT_TRUE(net.Install(p.expected).ok());
  const LogicalRule* web = nullptr;
  for (const LogicalRule& r : p.compiled.rules) {
    if (r.intent_id == "web") web = &r;
  }
  ASSERT_NE(web, nullptr);
  ASSERT_TRUE(
      net.InjectFault({FaultKind::kDropEntry, "s4", web->rule_id}).ok());
  std::mt19937_64 rng(1);
  auto work = SampleIntentTraffic(p.intents, inv_, tax_, 4, rng);
  BehaviorTable t = net.InjectWorkload(work, {});
  auto strict = VerifyOnline(p.compiled.rules, t, net.epoch());
  ASSERT_TRUE(strict.ok());
  ASSERT_THAT(strict->findings, SizeIs(1));
  EXPECT_EQ(strict->findings[0].subject, "web");
  EXPECT_THAT(strict->findings[0].detail, HasSubstr("4 of 4 packets deviate"));
  auto lax = VerifyOnline(p.compiled.rules, t, net.epoch(), 1.0);
  ASSERT_TRUE(lax.ok());
  EXPECT_THAT(lax->findings, IsEmpty());
}

TEST_F(VerifierTest, FullCyclePassesWithoutFaults) {
  CycleOptions opts;
  VerificationReport r = FullCycle(Inputs(), opts);
  EXPECT_EQ(r.verdict, Verdict::kPass) << r.ToJson().dump(2);
  EXPECT_EQ(r.ExitCode(), 0);
  EXPECT_EQ(r.remediation.status, RemediationStatus::kNothingToDo);
  EXPECT_THAT(r.remediation.errors_per_round, ElementsAre(0));
  ASSERT_THAT(r.checks, SizeIs(6));
  for (const CheckRun& c : r.checks) EXPECT_TRUE(c.executed);
  EXPECT_THAT(r.conflicts, SizeIs(1));
  EXPECT_EQ(r.generations.at("R"), 1u);
  EXPECT_EQ(r.generations.at("R_prime"), 1u);
  EXPECT_EQ(r.generations.at("F"), 1u);
  for (const auto& [id, c] : r.compliance) {
    EXPECT_EQ(c.packets_checked, c.packets_compliant) << id;
  }
  nlohmann::ordered_json j = r.ToJson();
  EXPECT_EQ(j["verdict"], "Pass");
  EXPECT_EQ(j["checks"][4]["id"], "ROffEqRPrime");
  EXPECT_EQ(j["checks"][4]["purpose"], "Validity");
  EXPECT_TRUE(j["timings"].contains("total_ms"));
}

TEST_F(VerifierTest, FaultIsReportedThenRepaired) {
  Pipeline p = Build(kPolicy);
  std::string web_rule;
  for (const LogicalRule& r : p.compiled.rules) {
    if (r.intent_id == "web") web_rule = r.rule_id;
  }
  std::vector<FaultSpec> faults = {
      {FaultKind::kCorruptOutPort, "s2", web_rule}};

  CycleOptions opts;
  VerificationReport fail = FullCycle(Inputs(faults), opts);
  EXPECT_EQ(fail.verdict, Verdict::kFail);
  EXPECT_EQ(fail.ExitCode(), 1);
  EXPECT_EQ(fail.remediation.status, RemediationStatus::kExhausted);
  EXPECT_THAT(fail.remediation.failing_intents, ElementsAre("web"));
  std::set<std::string> online;
  for (const Finding& f : fail.findings) {
    if (f.check == CheckId::kROnEqF) online.insert(f.subject);
  }
  EXPECT_THAT(online, ElementsAre("web"));

  opts.max_retries = 1;
  VerificationReport fixed = FullCycle(Inputs(faults), opts);
  EXPECT_EQ(fixed.verdict, Verdict::kPass) << fixed.ToJson().dump(2);
  EXPECT_EQ(fixed.remediation.status, RemediationStatus::kResolved);
  EXPECT_THAT(fixed.remediation.errors_per_round, ElementsAre(2, 0));
  EXPECT_EQ(fixed.generations.at("F"), 3u);  // Install, fault, reinstall.
}

TEST_F(VerifierTest, CapacityViolationIsRerouted) {
  Topology t;
  for (const char* s : {"s1", "s2", "s3", "s5"}) (void)t.AddSwitch(s);
  (void)t.AddLink("s1", "s2", 10);
  (void)t.AddLink("s2", "s3", 10);
  (void)t.AddLink("s1", "s5", 10);
  (void)t.AddLink("s5", "s3", 10);
  CycleInputs in{{tax_, inv_},
                 t,
                 "intent p80 { from A1 to B1 allow tcp port 80 bw 8 }\n"
                 "intent p443 { from A1 to B1 allow tcp port 443 bw 8 }\n",
                 std::nullopt,
                 {}};
  CycleOptions opts;
  VerificationReport r = FullCycle(in, opts);
  EXPECT_EQ(r.verdict, Verdict::kFail);
  ASSERT_FALSE(r.findings.empty());
  EXPECT_EQ(r.findings[0].check, CheckId::kRExternalFeasible);
  EXPECT_THAT(r.remediation.failing_intents, ElementsAre("p443", "p80"));

  opts.max_retries = 2;
  r = FullCycle(in, opts);
  EXPECT_EQ(r.verdict, Verdict::kPass) << r.ToJson().dump(2);
  ASSERT_FALSE(r.remediation.actions.empty());
  EXPECT_EQ(r.remediation.actions[0].kind, "recompile");
  EXPECT_EQ(r.remediation.actions[0].subject, "p80");
}

TEST_F(VerifierTest, MissingFunctionCannotBeRemediated) {
  CycleInputs in = Inputs();
  in.intent_source = "intent lb { from A1 to B1 allow via LB }";
  CycleOptions opts;
  opts.max_retries = 3;
  VerificationReport r = FullCycle(in, opts);
  EXPECT_EQ(r.verdict, Verdict::kFail);
  EXPECT_EQ(r.remediation.status, RemediationStatus::kExhausted);
  EXPECT_THAT(r.remediation.failing_intents, ElementsAre("lb"));
}

TEST_F(VerifierTest, BadInputIsIncomplete) {
  CycleInputs in = Inputs();
  in.intent_source = "intent a { from Nowhere to B1 allow }";
  VerificationReport r = FullCycle(in, {});
  EXPECT_EQ(r.verdict, Verdict::kIncomplete);
  EXPECT_EQ(r.ExitCode(), 2);
  EXPECT_THAT(r.error, HasSubstr("unknown label"));

  in = Inputs({{FaultKind::kDropEntry, "s1", "r00042"}});
  r = FullCycle(in, {});
  EXPECT_EQ(r.verdict, Verdict::kIncomplete);
  EXPECT_THAT(r.error, HasSubstr("NoSuchEntry"));
}

TEST_F(VerifierTest, UserSentencesAreChecked) {
  CycleInputs in = Inputs();
  in.user_intent_source =
      "u1: The traffic from A2 to B2 is allowed\n"
      "u2: Block traffic from B2 to A2 on port 53.\n";
  VerificationReport r = FullCycle(in, {});
  EXPECT_EQ(r.verdict, Verdict::kPass) << r.ToJson().dump(2);
  EXPECT_EQ(r.generations.at("I"), 2u);
  EXPECT_EQ(r.checks[0].subjects, 2);

  in.user_intent_source = "web: The traffic from A2 to B2 is allowed\n";
  r = FullCycle(in, {});
  EXPECT_EQ(r.verdict, Verdict::kIncomplete);
  EXPECT_THAT(r.error, HasSubstr("duplicate"));
}

TEST_F(VerifierTest, ReportsAreDeterministicApartFromTimings) {
  Pipeline p = Build(kPolicy);
  std::vector<FaultSpec> faults = {
      {FaultKind::kShufflePriority, "s1", p.compiled.rules[0].rule_id}};
  CycleOptions opts;
  opts.max_retries = 1;
  auto strip = [](nlohmann::ordered_json j) {
    j.erase("timings");
    return j.dump();
  };
  EXPECT_EQ(strip(FullCycle(Inputs(faults), opts).ToJson()),
            strip(FullCycle(Inputs(faults), opts).ToJson()));
}

}  // namespace
}  // namespace idnv

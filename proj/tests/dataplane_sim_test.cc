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

#include "idnv/dataplane_sim.h"

#include <random>
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

class SimTest : public ::testing::Test {
 protected:
  SimTest() {
    for (const char* s : {"s1", "s2", "s3", "s4"}) (void)topo_.AddSwitch(s);
    (void)topo_.AddLink("s1", "s2", 100);
    (void)topo_.AddLink("s2", "s3", 2);
    (void)topo_.AddLink("s2", "s4", 100);
    (void)topo_.AddNf(NfKind::IDS(), "s4");
    (void)topo_.AttachHosts(inv_);
  }

  CompileResult Compile(const std::string& dsl) {
    auto parsed = ParseIntentFile(dsl, tax_);
    EXPECT_TRUE(parsed.ok()) << parsed.status();
    return CompileLogical(PolicyGraph::FromIntents(*parsed).edges, inv_, tax_,
                          topo_);
  }

  Packet Pkt(int from, int to, uint16_t port, Proto proto = Proto::kTcp) {
    return Packet{next_id_++, inv_.hosts()[from].ip, inv_.hosts()[to].ip,
                  proto, port};
  }

  LabelTaxonomy tax_ = testing::SmallTaxonomy();
  HostInventory inv_ = testing::ThreeHostInventory(tax_);
  Topology topo_;
  uint64_t next_id_ = 1;
};

TEST_F(SimTest, InstallAndSnapshot) {
  SimNetwork net(topo_, inv_);
  EXPECT_EQ(net.epoch(), 0u);
  for (const auto& [sw, c] : net.Snapshot()) EXPECT_THAT(c.entries, IsEmpty());

  CompileResult r = Compile("intent a { from A1 to B1 allow }");
  SwitchConfigs cfg = CompilePhysical(r.rules, topo_, inv_);
  ASSERT_TRUE(net.Install(cfg).ok());
  EXPECT_EQ(net.Snapshot(), cfg);
  EXPECT_EQ(net.epoch(), 1u);
  ASSERT_TRUE(net.Install(cfg).ok());
  EXPECT_EQ(net.epoch(), 2u);
  EXPECT_EQ(net.Snapshot(), cfg);

  SwitchConfigs bad = cfg;
  bad["s9"].switch_id = "s9";
  absl::Status s = net.Install(bad);
  EXPECT_EQ(s.code(), absl::StatusCode::kNotFound);
  EXPECT_THAT(s.message(), HasSubstr("UnknownSwitch: s9"));
}

TEST_F(SimTest, ForwardsAlongCompiledPath) {
  CompileResult r = Compile("intent a { from A1 to B1 allow via IDS }");
  SimNetwork net(topo_, inv_);
  ASSERT_TRUE(net.Install(CompilePhysical(r.rules, topo_, inv_)).ok());
  BehaviorRecord rec = net.ForwardOne("s1", Pkt(0, 2, 80));
  EXPECT_EQ(rec.outcome, Outcome::kDelivered);
  EXPECT_EQ(rec.path, r.rules[0].path);
  EXPECT_THAT(rec.path, ElementsAre("s1", "s2", "s4", "s2", "s3"));
  EXPECT_THAT(rec.nfs, ElementsAre(NfKind::IDS()));

  BehaviorRecord back = net.ForwardOne("s3", Pkt(2, 0, 80));
  EXPECT_EQ(back.outcome, Outcome::kDroppedNoMatch);
  EXPECT_THAT(back.path, ElementsAre("s3"));
  EXPECT_EQ(back.OutcomeString(), "DroppedNoMatch(s3)");
}

TEST_F(SimTest, CorruptedPortLoopsUntilTtl) {
  CompileResult r = Compile("intent a { from A1 to B1 allow }");
  SimNetwork net(topo_, inv_);
  ASSERT_TRUE(net.Install(CompilePhysical(r.rules, topo_, inv_)).ok());
  // s2 sends back to s1, which forwards to s2 again.
  FaultSpec f{FaultKind::kCorruptOutPort, "s2", r.rules[0].rule_id,
              *topo_.PortToSwitch("s2", "s1")};
  ASSERT_TRUE(net.InjectFault(f).ok());
  EXPECT_EQ(net.Snapshot()["s2"].entries[0].out_port, 1);
  BehaviorRecord rec = net.ForwardOne("s1", Pkt(0, 2, 80));
  EXPECT_EQ(rec.outcome, Outcome::kDroppedTtl);
  EXPECT_EQ(rec.path.size(), static_cast<size_t>(kDefaultTtl));
}

TEST_F(SimTest, MisdeliveryIsAnOutcome) {
  CompileResult r = Compile("intent a { from B1 to A1.Web allow }");
  SimNetwork net(topo_, inv_);
  ASSERT_TRUE(net.Install(CompilePhysical(r.rules, topo_, inv_)).ok());
  FaultSpec f{FaultKind::kCorruptOutPort, "s1", r.rules[0].rule_id,
              *topo_.PortToHost("s1", "h2")};
  ASSERT_TRUE(net.InjectFault(f).ok());
  BehaviorRecord rec = net.ForwardOne("s3", Pkt(2, 0, 80));
  EXPECT_EQ(rec.outcome, Outcome::kMisdelivered);
  EXPECT_EQ(rec.OutcomeString(), "Misdelivered(h2)");
}

TEST_F(SimTest, WorkloadOutcomes) {
  SimNetwork net(topo_, inv_);
  EXPECT_THAT(net.InjectWorkload({}).records, IsEmpty());

  CompileResult r = Compile(
      "intent a { from A1.Web to B1 allow port 80 }\n"
      "intent b { from A1.DNS to B1 allow port 53 }\n"
      "intent c { from B1 to A1 block }");
  ASSERT_TRUE(net.Install(CompilePhysical(r.rules, topo_, inv_)).ok());
  std::vector<WorkloadItem> w;
  for (int k = 0; k < 3; ++k) {
    w.push_back({Pkt(0, 2, 80), "s1", "a"});
    w.push_back({Pkt(1, 2, 53, Proto::kUdp), "s1", "b"});
    w.push_back({Pkt(2, 0, 443), "s3", "c"});
  }
  BehaviorTable t = net.InjectWorkload(w);
  EXPECT_EQ(t.epoch, net.epoch());
  ASSERT_EQ(t.records.size(), 9u);
  for (const BehaviorRecord& rec : t.records) {
    if (rec.intent_id == "c") {
      EXPECT_EQ(rec.OutcomeString(), "DroppedByRule(s3)");
    } else {
      EXPECT_EQ(rec.outcome, Outcome::kDelivered);
    }
  }
  EXPECT_EQ(net.InjectWorkload(w).ToCsv(), t.ToCsv());
  EXPECT_THAT(t.ToCsv(),
              HasSubstr("pkt_id,intent_id,outcome,path,nfs\n"
                        "1,a,Delivered,s1/s2/s3,\n"));

  // s2-s3 carries two packets' worth.
  CapacityAccounting cap{true, 1.0};
  BehaviorTable capped = net.InjectWorkload(w, cap);
  int dropped = 0;
  for (const BehaviorRecord& rec : capped.records) {
    if (rec.outcome == Outcome::kDroppedCapacity) {
      ++dropped;
      EXPECT_EQ(rec.OutcomeString(), "DroppedCapacity(s2-s3)");
      EXPECT_THAT(rec.path, ElementsAre("s1", "s2"));
    }
  }
  EXPECT_EQ(dropped, 4);
}

TEST_F(SimTest, FaultsMutateOneEntry) {
  CompileResult r = Compile(
      "intent wide { from ZoneA to ZoneB block }\n"
      "intent web { from A1.Web to B1 allow port 80 }");
  SimNetwork net(topo_, inv_);
  SwitchConfigs cfg = CompilePhysical(r.rules, topo_, inv_);
  ASSERT_TRUE(net.Install(cfg).ok());
  const std::string web = r.rules[0].intent_id == "web" ? r.rules[0].rule_id
                                                        : r.rules[1].rule_id;
  EXPECT_EQ(net.ForwardOne("s1", Pkt(0, 2, 80)).outcome, Outcome::kDelivered);

  // Demoting the allow below the block flips the lookup for this packet.
  ASSERT_TRUE(net.InjectFault({FaultKind::kShufflePriority, "s1", web, 0, -30})
                  .ok());
  EXPECT_EQ(net.ForwardOne("s1", Pkt(0, 2, 80)).outcome,
            Outcome::kDroppedByRule);
  EXPECT_EQ(net.epoch(), 2u);

  ASSERT_TRUE(net.Install(cfg).ok());
  ASSERT_TRUE(net.InjectFault({FaultKind::kDropEntry, "s2", web}).ok());
  SwitchConfigs snap = net.Snapshot();
  EXPECT_EQ(snap["s2"].entries.size() + 1, cfg["s2"].entries.size());
  EXPECT_EQ(snap["s1"], cfg["s1"]);
  EXPECT_EQ(net.ForwardOne("s1", Pkt(0, 2, 80)).OutcomeString(),
            "DroppedNoMatch(s2)");

  absl::Status missing = net.InjectFault({FaultKind::kDropEntry, "s2", web});
  EXPECT_EQ(missing.code(), absl::StatusCode::kNotFound);
  EXPECT_THAT(missing.message(), HasSubstr("NoSuchEntry"));
  EXPECT_EQ(net.fault_log().size(), 2u);
}

TEST(FaultScriptTest, ParsesAndRoundTrips) {
  auto faults = ParseFaultScript(nlohmann::ordered_json::parse(R"([
    {"kind": "DropEntry", "switch": "s1", "rule_id": "r00001"},
    {"kind": "CorruptOutPort", "switch": "s2", "rule_id": "r00002",
     "wrong_port": 3},
    {"kind": "ShufflePriority", "switch": "s3", "rule_id": "r00003",
     "delta": -7}])"));
  ASSERT_TRUE(faults.ok());
  ASSERT_EQ(faults->size(), 3u);
  EXPECT_EQ((*faults)[1].wrong_port, 3);
  EXPECT_EQ((*faults)[2].delta, -7);
  EXPECT_EQ((*faults)[2].ToJson().dump(),
            R"({"kind":"ShufflePriority","switch":"s3","rule_id":"r00003","delta":-7})");
  EXPECT_FALSE(ParseFaultScript(nlohmann::ordered_json::parse(
                   R"([{"kind": "Reboot", "switch": "s1", "rule_id": "r"}])"))
                   .ok());
}

// With no faults the simulator and the hand-written table walker agree on
// every packet of random compiled instances.
TEST(SimPropertyTest, FaultFreeFidelity) {
  LabelTaxonomy tax = testing::SmallTaxonomy();
  Topology t;
  for (const char* s : {"c1", "e1", "e2", "e3", "n1"}) (void)t.AddSwitch(s);
  for (const char* e : {"e1", "e2", "e3", "n1"}) (void)t.AddLink(e, "c1", 10);
  (void)t.AddLink("e1", "e2", 10);
  (void)t.AddNf(NfKind::LB(), "n1");
  (void)t.AddNf(NfKind::IDS(), "n1");
  (void)t.AddNf(NfKind::DDOS(), "e3");
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    testing::RandomInstance inst =
        testing::MakeRandomInstance(rng, tax, 6, 6, "e");
    HostInventory inv =
        testing::Reattach(inst.inventory, tax, {"e1", "e2", "e3"}, rng);
    ASSERT_TRUE(t.AttachHosts(inv).ok());
    auto resolved = Resolve(DetectConflicts(inst.edges, inv, tax), inst.edges,
                            inv, tax, ResolutionPolicy::kSpecificityThenDeny);
    ASSERT_TRUE(resolved.ok());
    CompileResult r = CompileLogical(resolved->edges, inv, tax, t);
    SwitchConfigs cfg = CompilePhysical(r.rules, t, inv);
    SimNetwork net(t, inv, 9);
    ASSERT_TRUE(net.Install(cfg).ok());
    uint64_t id = 0;
    for (const Host& s : inv.hosts()) {
      for (const Host& d : inv.hosts()) {
        for (uint16_t port : {53, 80, 443}) {
          Packet p{++id, s.ip, d.ip, Proto::kUdp, port};
          BehaviorRecord rec = net.ForwardOne(s.attach_switch, p);
          testing::Walk w =
              testing::WalkTables(cfg, t, inv, s, d.ip, Proto::kUdp, port);
          ASSERT_EQ(rec.path, w.path);
          ASSERT_EQ(rec.nfs, w.nfs);
          ASSERT_EQ(rec.outcome == Outcome::kDelivered,
                    w.delivered_to == d.id);
        }
      }
    }
  }
}

}  // namespace
}  // namespace idnv

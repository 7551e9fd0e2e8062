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

// Synthetic campus workloads and the two experiments run on them: timing of
// feasibility verification as the intent count grows, and packet arrival
// under four ways of turning intents into flow tables.

#ifndef IDNV_HARNESS_H_
#define IDNV_HARNESS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "idnv/dataplane_sim.h"
#include "idnv/intent.h"
#include "idnv/taxonomy.h"
#include "idnv/topology.h"
#include "idnv/verifier.h"
#include "json.hpp"

namespace idnv {

struct WorkloadSpec {
  int n_intents = 40;
  double conflict_ratio = 0.3;
  double chain_ratio = 0.3;
  int packets_per_intent = 10;
  int fault_count = 4;
  uint64_t seed = 11;

  // InvalidArgument "InfeasibleSpec: ..." on negative counts, ratios outside
  // [0, 1] or conflicts requested with fewer than two intents.
  absl::Status Validate() const;
  // Missing keys keep their defaults.
  static absl::StatusOr<WorkloadSpec> FromJson(const nlohmann::ordered_json& j);
  nlohmann::ordered_json ToJson() const;
};

// Four zones, two areas each, one host per (area, role); a core switch, a
// switch per zone and per area, and one switch per network function.
struct Campus {
  Environment env;
  Topology topology;
};
Campus MakeCampus();

// A fault addressed by what it breaks rather than by rule id, so it can be
// replayed against tables compiled by any approach.
struct HarnessFault {
  FaultKind kind = FaultKind::kDropEntry;
  std::string intent_id;
  std::string src_switch;
  std::string dst_switch;
  int hop = 0;
  uint64_t seed = 0;
};

struct Workload {
  std::vector<NetworkIntent> intents;
  int conflict_pairs = 0;
  std::vector<HarnessFault> faults;
  std::vector<WorkloadItem> packets;
};

// Conflict pairs come first: a broad Block followed by a narrower Allow that
// wins under specificity. The remaining intents are random. Faults are drawn
// over the hops of Allow rules that carry sampled traffic.
absl::StatusOr<Workload> GenerateWorkload(const WorkloadSpec& spec,
                                          const Campus& campus);

// Maps a fault onto concrete tables. NotFound when the approach has no rule
// for that intent and switch pair, or no entry at that hop.
absl::StatusOr<FaultSpec> ResolveFault(const HarnessFault& fault,
                                       const std::vector<LogicalRule>& rules,
                                       const SwitchConfigs& tables,
                                       const Topology& t);

enum class Approach { kNaive, kRandomDrop, kComposeOnly, kFullEngine };
inline constexpr Approach kAllApproaches[] = {
    Approach::kNaive, Approach::kRandomDrop, Approach::kComposeOnly,
    Approach::kFullEngine};
absl::string_view ApproachName(Approach a);

struct ApproachOutcome {
  Approach approach = Approach::kNaive;
  int allow_packets = 0;
  int delivered = 0;
  double arrival_rate = 0;  // delivered / allow_packets, 1 when none.
  int faults_applied = 0;
  // Against the approach's own rules.
  std::map<std::string, Compliance> compliance;
};

struct ArrivalResult {
  WorkloadSpec spec;
  std::vector<ApproachOutcome> outcomes;
  std::string policy_dot;  // Composed graph of the run.
  // FullEngine > ComposeOnly > RandomDrop > Naive, strictly.
  bool OrderingHolds() const;
  const ApproachOutcome* Find(Approach a) const;
};

struct ArrivalOptions {
  std::vector<Approach> approaches = {std::begin(kAllApproaches),
                                      std::end(kAllApproaches)};
  int max_retries = 2;
};

absl::StatusOr<ArrivalResult> RunArrivalExperiment(
    const WorkloadSpec& spec, const Campus& campus,
    const ArrivalOptions& options = {});

// Seeds the ordering is checked over.
inline constexpr uint64_t kArrivalSeeds[] = {11, 12, 13, 14, 15};

struct CdfPoint {
  double time_ms = 0;
  double fraction = 0;
};
// Empirical CDF: one point per sample, fractions rising to 1.
std::vector<CdfPoint> MakeCdf(std::vector<double> samples);
bool CdfValid(const std::vector<CdfPoint>& cdf);

struct ScalingTrial {
  int n = 0;
  int trial = 0;
  double total_ms = 0;
  double per_intent_ms = 0;
};

struct ScalingOptions {
  std::vector<int> n_list = {100, 200, 300, 400, 500};
  int trials = 5;
  uint64_t seed = 11;
  double conflict_ratio = 0.3;
  double chain_ratio = 0.3;
};

struct ScalingResult {
  std::vector<ScalingTrial> trials;
  std::map<int, std::vector<CdfPoint>> cdf;
  std::map<int, double> mean_ms;
  std::map<int, double> p90_ms;
  // Mean time never drops as n grows.
  bool MeansNonDecreasing() const;
};

// Times the feasibility pipeline (compose through compilation with its
// checks) for each batch of n intents.
absl::StatusOr<ScalingResult> RunScalingExperiment(const ScalingOptions& options,
                                                   const Campus& campus);

// Published reference points, reported next to our measurements.
struct ReferenceBand {
  int n;
  double p90_ms;
};
inline constexpr ReferenceBand kReferenceP90[] = {
    {100, 281}, {200, 485}, {300, 675}, {400, 885}, {500, 1070}};
inline constexpr double kReferenceTotalMinMs = 300;
inline constexpr double kReferenceTotalMaxMs = 1160;

struct ExperimentResult {
  ScalingResult scaling;
  std::vector<ArrivalResult> arrival;  // One per seed.
};

struct EmitOptions {
  bool scaling = true;  // scaling.csv, scaling_summary.csv, cdf_<n>.csv
  bool arrival = true;  // arrival.csv, arrival_by_seed.csv, policy_graph.dot
};

// Writes the selected report files under `out_dir`, created when missing.
absl::Status EmitReports(const ExperimentResult& result,
                         const std::string& out_dir,
                         const EmitOptions& which = {});

}  // namespace idnv

#endif  // IDNV_HARNESS_H_

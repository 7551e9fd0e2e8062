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

// Command-line front end: parse, compose, verify, simulate and experiment.
//
// Exit codes: 0 success or Pass, 1 verification failure (or a violated
// ordering under --assert-ordering), 2 usage or input error.

#ifndef IDNV_CLI_H_
#define IDNV_CLI_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "idnv/policy_graph.h"
#include "json.hpp"

namespace idnv {

// The JSON config file. Paths are resolved against the file's directory.
struct CliConfig {
  std::string taxonomy_inventory;
  std::string topology;
  std::string intents;
  std::optional<std::string> user_intents;
  std::optional<std::string> faults;
  std::string out_dir = "out";
  ResolutionPolicy resolution_policy = ResolutionPolicy::kSpecificityThenDeny;
  int max_retries = 0;
  int packets_per_intent = 4;
  uint64_t seed = 11;
  bool capacity_enforcement = false;
  // Optional "experiment" object: workload keys plus "seeds", "n_list" and
  // "trials".
  nlohmann::ordered_json experiment = nlohmann::ordered_json::object();
};

// Reads and validates a config; every referenced path must exist.
absl::StatusOr<CliConfig> LoadCliConfig(const std::string& path);

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace idnv

#endif  // IDNV_CLI_H_

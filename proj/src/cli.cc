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

#include "idnv/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "idnv/dataplane_sim.h"
#include "idnv/harness.h"
#include "idnv/intent_parser.h"
#include "idnv/nl_normalizer.h"
#include "idnv/sfc_compiler.h"
#include "idnv/status_macros.h"
#include "idnv/topology.h"
#include "idnv/verifier.h"

namespace idnv {
namespace {

namespace fs = std::filesystem;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

absl::StatusOr<std::string> ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

absl::StatusOr<nlohmann::ordered_json> ReadJson(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadText(path));
  nlohmann::ordered_json j =
      nlohmann::ordered_json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return j;
}

absl::Status WriteText(const fs::path& path, const std::string& body) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat(path.parent_path().string(), ": ", ec.message()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
  out.close();
  if (!out) return absl::InternalError(absl::StrCat("cannot write ", path.string()));
  return absl::OkStatus();
}

// Everything a pipeline command needs, loaded and cross-checked.
struct Inputs {
  Environment env;
  Topology topology;
  std::string intent_source;
  std::optional<std::string> user_source;
  std::vector<FaultSpec> faults;
};

absl::StatusOr<Inputs> LoadInputs(const CliConfig& c) {
  Inputs in;
  ASSIGN_OR_RETURN(nlohmann::ordered_json env, ReadJson(c.taxonomy_inventory));
  ASSIGN_OR_RETURN(in.env, LoadEnvironmentJson(env));
  ASSIGN_OR_RETURN(nlohmann::ordered_json topo, ReadJson(c.topology));
  ASSIGN_OR_RETURN(in.topology, Topology::FromJson(topo));
  RETURN_IF_ERROR(in.topology.AttachHosts(in.env.inventory));
  ASSIGN_OR_RETURN(in.intent_source, ReadText(c.intents));
  if (c.user_intents.has_value()) {
    ASSIGN_OR_RETURN(in.user_source, ReadText(*c.user_intents));
  }
  if (c.faults.has_value()) {
    ASSIGN_OR_RETURN(nlohmann::ordered_json faults, ReadJson(*c.faults));
    ASSIGN_OR_RETURN(in.faults, ParseFaultScript(faults));
  }
  return in;
}

// DSL intents followed by the normalized natural-language ones.
absl::StatusOr<std::vector<NetworkIntent>> AllIntents(const Inputs& in) {
  ASSIGN_OR_RETURN(std::vector<NetworkIntent> intents,
                   ParseIntentFile(in.intent_source, in.env.taxonomy));
  if (in.user_source.has_value()) {
    ASSIGN_OR_RETURN(std::vector<UserIntent> users,
                     ParseUserIntentFile(*in.user_source));
    for (const UserIntent& u : users) {
      ASSIGN_OR_RETURN(NetworkIntent n, NormalizeNl(u, in.env.taxonomy));
      intents.push_back(std::move(n));
    }
  }
  return intents;
}

// Flags shared by every subcommand.
struct Flags {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<int> retries;
  std::optional<std::string> policy;
  std::optional<std::string> out;
  bool assert_ordering = false;
  std::string file;  // parse: intent file.
  std::string kind;  // experiment: scaling or arrival.
};

class Runner {
 public:
  Runner(const Flags& flags, std::ostream& out, std::ostream& err)
      : flags_(flags), out_(out), err_(err) {}

  int Parse() {
    std::string path = flags_.file;
    LabelTaxonomy tax;
    if (!flags_.config.empty()) {
      if (!LoadConfig()) return kExitUsage;
      if (path.empty()) path = config_.intents;
      absl::StatusOr<nlohmann::ordered_json> env =
          ReadJson(config_.taxonomy_inventory);
      if (!env.ok()) return Fail(env.status());
      absl::StatusOr<Environment> e = LoadEnvironmentJson(*env);
      if (!e.ok()) return Fail(e.status());
      tax = e->taxonomy;
    }
    if (path.empty()) {
      err_ << "error: parse needs an intent file or --config\n";
      return kExitUsage;
    }
    absl::StatusOr<std::string> text = ReadText(path);
    if (!text.ok()) return Fail(text.status());
    absl::StatusOr<std::vector<NetworkIntent>> intents =
        ParseIntentFile(*text, tax);
    if (!intents.ok()) return Fail(intents.status());
    out_ << RenderIntents(*intents);
    return 0;
  }

  int Compose() {
    if (!LoadConfig()) return kExitUsage;
    absl::StatusOr<Inputs> in = LoadInputs(config_);
    if (!in.ok()) return Fail(in.status());
    absl::StatusOr<std::vector<NetworkIntent>> intents = AllIntents(*in);
    if (!intents.ok()) return Fail(intents.status());
    absl::StatusOr<ComposeResult> composed =
        idnv::Compose(PolicyGraph::FromIntents(*intents), PolicyGraph{},
                      in->env.inventory, in->env.taxonomy,
                      config_.resolution_policy);
    if (!composed.ok()) {
      err_ << "error: " << composed.status().message() << "\n";
      return composed.status().code() == absl::StatusCode::kFailedPrecondition
                 ? kExitFail
                 : kExitUsage;
    }
    nlohmann::ordered_json log = nlohmann::ordered_json::array();
    for (const Conflict& c : composed->log) log.push_back(ConflictToJson(c));
    fs::path dir = config_.out_dir;
    if (absl::Status s = WriteText(dir / "policy_graph.dot",
                                   composed->graph.ToDot());
        !s.ok()) {
      return Fail(s);
    }
    if (absl::Status s = WriteText(dir / "conflicts.json", log.dump(2) + "\n");
        !s.ok()) {
      return Fail(s);
    }
    out_ << absl::StrFormat("composed %d intents into %d edges, %d conflicts resolved\n",
                            intents->size(), composed->graph.edges.size(),
                            composed->log.size());
    return 0;
  }

  int Verify() {
    if (!LoadConfig()) return kExitUsage;
    absl::StatusOr<Inputs> in = LoadInputs(config_);
    if (!in.ok()) return Fail(in.status());
    CycleInputs cycle{in->env, in->topology, in->intent_source,
                      in->user_source, in->faults};
    VerificationReport report = FullCycle(cycle, Options());
    fs::path path = fs::path(config_.out_dir) / "report.json";
    if (absl::Status s = WriteText(path, report.ToJson().dump(2) + "\n");
        !s.ok()) {
      return Fail(s);
    }
    int errors = 0, warnings = 0;
    for (const Finding& f : report.findings) {
      (f.severity == Severity::kError ? errors : warnings)++;
    }
    out_ << "verdict " << VerdictName(report.verdict) << ": " << errors
         << " errors, " << warnings << " warnings, remediation "
         << RemediationStatusName(report.remediation.status) << "\n";
    if (!report.error.empty()) err_ << "error: " << report.error << "\n";
    out_ << "report written to " << path.string() << "\n";
    return report.ExitCode();
  }

  int Simulate() {
    if (!LoadConfig()) return kExitUsage;
    absl::StatusOr<Inputs> in = LoadInputs(config_);
    if (!in.ok()) return Fail(in.status());
    absl::StatusOr<std::vector<NetworkIntent>> intents = AllIntents(*in);
    if (!intents.ok()) return Fail(intents.status());
    CycleOptions opts = Options();
    VerificationEngine engine(in->env, in->topology, opts);
    if (absl::Status s = engine.LoadIntents(*intents); !s.ok()) return Fail(s);
    if (absl::Status s = engine.Compose(); !s.ok()) return Fail(s);
    engine.Compile();
    if (absl::Status s = engine.Deploy(in->faults); !s.ok()) return Fail(s);
    std::mt19937_64 rng(opts.seed);
    BehaviorTable table = engine.mutable_network().InjectWorkload(
        SampleIntentTraffic(*intents, in->env.inventory, in->env.taxonomy,
                            opts.packets_per_intent, rng),
        {opts.capacity_enforcement, opts.mbps_per_packet});
    fs::path dir = config_.out_dir;
    if (absl::Status s = WriteText(dir / "behavior.csv", table.ToCsv());
        !s.ok()) {
      return Fail(s);
    }
    if (absl::Status s = WriteText(dir / "flow_tables.txt",
                                   DumpConfigs(engine.network().Snapshot()));
        !s.ok()) {
      return Fail(s);
    }
    std::map<std::string, int> outcomes;
    for (const BehaviorRecord& r : table.records) {
      std::string o = r.OutcomeString();
      outcomes[o.substr(0, o.find('('))]++;
    }
    out_ << table.records.size() << " packets at epoch " << table.epoch;
    for (const auto& [o, n] : outcomes) out_ << ", " << o << " " << n;
    out_ << "\n";
    return 0;
  }

  int Experiment() {
    if (flags_.kind != "scaling" && flags_.kind != "arrival") {
      err_ << "error: experiment kind must be scaling or arrival, got '"
           << flags_.kind << "'\n";
      return kExitUsage;
    }
    if (!flags_.config.empty() && !LoadConfig()) return kExitUsage;
    if (flags_.out.has_value()) config_.out_dir = *flags_.out;
    const nlohmann::ordered_json& x = config_.experiment;
    Campus campus = MakeCampus();
    ExperimentResult result;
    try {
      if (flags_.kind == "scaling") {
        ScalingOptions o;
        o.n_list = x.value("n_list", o.n_list);
        o.trials = x.value("trials", o.trials);
        o.conflict_ratio = x.value("conflict_ratio", o.conflict_ratio);
        o.chain_ratio = x.value("chain_ratio", o.chain_ratio);
        o.seed = flags_.seed.value_or(x.value("seed", o.seed));
        absl::StatusOr<ScalingResult> r = RunScalingExperiment(o, campus);
        if (!r.ok()) return Fail(r.status());
        result.scaling = *std::move(r);
        for (const auto& [n, mean] : result.scaling.mean_ms) {
          std::string ref;
          for (const ReferenceBand& b : kReferenceP90) {
            if (b.n == n) ref = absl::StrFormat(" (reference p90 %.0f ms)", b.p90_ms);
          }
          out_ << absl::StrFormat("n=%d mean %.1f ms, p90 %.1f ms%s\n", n, mean,
                                  result.scaling.p90_ms[n], ref);
        }
      } else {
        absl::StatusOr<WorkloadSpec> spec = WorkloadSpec::FromJson(x);
        if (!spec.ok()) return Fail(spec.status());
        std::vector<uint64_t> seeds(std::begin(kArrivalSeeds),
                                    std::end(kArrivalSeeds));
        seeds = x.value("seeds", seeds);
        if (flags_.seed.has_value()) seeds = {*flags_.seed};
        ArrivalOptions ao;
        ao.max_retries = flags_.retries.value_or(ao.max_retries);
        bool ordered = true;
        for (uint64_t seed : seeds) {
          spec->seed = seed;
          absl::StatusOr<ArrivalResult> r =
              RunArrivalExperiment(*spec, campus, ao);
          if (!r.ok()) return Fail(r.status());
          out_ << "seed " << seed << ":";
          for (const ApproachOutcome& o : r->outcomes) {
            out_ << absl::StrFormat(" %s %.4f", ApproachName(o.approach),
                                    o.arrival_rate);
          }
          out_ << (r->OrderingHolds() ? "" : "  (ordering violated)") << "\n";
          ordered = ordered && r->OrderingHolds();
          result.arrival.push_back(*std::move(r));
        }
        if (flags_.assert_ordering && !ordered) {
          if (absl::Status s = EmitReports(result, config_.out_dir, Which());
              !s.ok()) {
            return Fail(s);
          }
          err_ << "error: FullEngine > ComposeOnly > RandomDrop > Naive does "
                  "not hold for every seed\n";
          return kExitFail;
        }
      }
    } catch (const nlohmann::json::exception& e) {
      err_ << "error: experiment config: " << e.what() << "\n";
      return kExitUsage;
    }
    if (absl::Status s = EmitReports(result, config_.out_dir, Which());
        !s.ok()) {
      return Fail(s);
    }
    out_ << "results written to " << config_.out_dir << "\n";
    return 0;
  }

 private:
  bool LoadConfig() {
    if (flags_.config.empty()) {
      err_ << "error: --config is required\n";
      return false;
    }
    absl::StatusOr<CliConfig> c = LoadCliConfig(flags_.config);
    if (!c.ok()) {
      err_ << "error: " << c.status().message() << "\n";
      return false;
    }
    config_ = *std::move(c);
    if (flags_.seed.has_value()) config_.seed = *flags_.seed;
    if (flags_.retries.has_value()) config_.max_retries = *flags_.retries;
    if (flags_.out.has_value()) config_.out_dir = *flags_.out;
    if (flags_.policy.has_value()) {
      std::optional<ResolutionPolicy> p =
          ResolutionPolicyFromName(*flags_.policy);
      if (!p.has_value()) {
        err_ << "error: unknown resolution policy '" << *flags_.policy << "'\n";
        return false;
      }
      config_.resolution_policy = *p;
    }
    return true;
  }

  EmitOptions Which() const {
    return {flags_.kind == "scaling", flags_.kind == "arrival"};
  }

  CycleOptions Options() const {
    CycleOptions o;
    o.policy = config_.resolution_policy;
    o.max_retries = config_.max_retries;
    o.packets_per_intent = config_.packets_per_intent;
    o.seed = config_.seed;
    o.capacity_enforcement = config_.capacity_enforcement;
    return o;
  }

  int Fail(const absl::Status& s) {
    err_ << "error: " << s.message() << "\n";
    return kExitUsage;
  }

  const Flags& flags_;
  std::ostream& out_;
  std::ostream& err_;
  CliConfig config_;
};

}  // namespace

absl::StatusOr<CliConfig> LoadCliConfig(const std::string& path) {
  ASSIGN_OR_RETURN(nlohmann::ordered_json j, ReadJson(path));
  if (!j.is_object()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": not an object"));
  }
  fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (base / p).string();
  };
  CliConfig c;
  try {
    for (const char* key : {"taxonomy_inventory", "topology", "intents"}) {
      if (!j.contains(key)) {
        return absl::InvalidArgumentError(
            absl::StrCat(path, ": missing \"", key, "\""));
      }
    }
    c.taxonomy_inventory = resolve(j["taxonomy_inventory"].get<std::string>());
    c.topology = resolve(j["topology"].get<std::string>());
    c.intents = resolve(j["intents"].get<std::string>());
    if (j.contains("user_intents")) {
      c.user_intents = resolve(j["user_intents"].get<std::string>());
    }
    if (j.contains("faults")) c.faults = resolve(j["faults"].get<std::string>());
    c.out_dir = resolve(j.value("out_dir", c.out_dir));
    if (j.contains("resolution_policy")) {
      std::string name = j["resolution_policy"].get<std::string>();
      std::optional<ResolutionPolicy> p = ResolutionPolicyFromName(name);
      if (!p.has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown resolution policy '", name, "'"));
      }
      c.resolution_policy = *p;
    }
    c.max_retries = j.value("max_retries", c.max_retries);
    c.packets_per_intent = j.value("packets_per_intent", c.packets_per_intent);
    c.seed = j.value("seed", c.seed);
    c.capacity_enforcement =
        j.value("capacity_enforcement", c.capacity_enforcement);
    if (j.contains("experiment")) c.experiment = j["experiment"];
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": ", e.what()));
  }
  std::vector<std::string> paths = {c.taxonomy_inventory, c.topology,
                                    c.intents};
  if (c.user_intents) paths.push_back(*c.user_intents);
  if (c.faults) paths.push_back(*c.faults);
  for (const std::string& p : paths) {
    if (!fs::exists(p)) {
      return absl::NotFoundError(absl::StrCat("no such file: ", p));
    }
  }
  return c;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Intent verification: parse, compose, verify, simulate and "
               "run experiments.",
               "idnv"};
  app.require_subcommand(1);
  Flags flags;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--seed", flags.seed, "Seed for workloads and faults");
    sub->add_option("--retries", flags.retries, "Feedback-loop retries")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--policy", flags.policy,
                    "SpecificityThenDeny, DenyOverrides or FirstWriterWins");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_flag("--assert-ordering", flags.assert_ordering,
                  "Fail when the approach ordering does not hold");
  };
  CLI::App* parse = app.add_subcommand("parse", "Print intents in canonical form");
  parse->add_option("file", flags.file, "Intent file");
  CLI::App* compose =
      app.add_subcommand("compose", "Compose intents, write DOT and conflicts");
  CLI::App* verify = app.add_subcommand("verify", "Run the verification cycle");
  CLI::App* simulate =
      app.add_subcommand("simulate", "Install tables and forward a workload");
  CLI::App* experiment =
      app.add_subcommand("experiment", "Run the scaling or arrival experiment");
  experiment->add_option("kind", flags.kind, "scaling or arrival")->required();
  for (CLI::App* sub : {parse, compose, verify, simulate, experiment}) {
    common(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run 'idnv --help' for usage\n";
    return kExitUsage;
  }

  Runner runner(flags, out, err);
  if (parse->parsed()) return runner.Parse();
  if (compose->parsed()) return runner.Compose();
  if (verify->parsed()) return runner.Verify();
  if (simulate->parsed()) return runner.Simulate();
  return runner.Experiment();
}

}  // namespace idnv

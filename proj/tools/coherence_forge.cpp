// coherence-forge: command-line front end for the coherence simulator.
//
// Exit status: 0 clean, 1 data mismatch or invariant violation, 2 config or IO error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "cforge/commands.hpp"
#include "cforge/config.hpp"
#include "cforge/errors.hpp"
#include "cforge/system.hpp"
#include "cforge/tester.hpp"
#include "cforge/trace.hpp"
#include "cforge/workload.hpp"

namespace {

using namespace cforge;

constexpr int kClean = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint32_t cores = 0;
  std::uint32_t levels = 0;
  std::string protocol;
  std::string csv;
  std::string bus_trace;
  bool no_fast_forward = false;
};

struct SynthOpts {
  std::string pattern = "shared_read";
  std::uint64_t ops = 2000;
  std::uint64_t working_set = 4096;
  Cycle think = 0;
};

ConfigOverrides overrides_of(const Common& c) {
  ConfigOverrides o;
  if (c.cores) o.cores = c.cores;
  if (c.levels) o.levels = c.levels;
  if (!c.protocol.empty()) o.protocol = c.protocol;
  if (c.seed_set) o.seed = c.seed;
  return o;
}

SystemConfig load_config(const Common& c) {
  if (c.config_path.empty()) {
    SystemConfig cfg;
    apply_overrides(cfg, overrides_of(c));
    cfg.validate();
    return cfg;
  }
  return parse_config(c.config_path, overrides_of(c));
}

SynthParams synth_params(const SynthOpts& s, std::uint64_t seed) {
  SynthParams p;
  p.pattern = parse_pattern(s.pattern);
  p.ops_per_core = s.ops;
  p.working_set_bytes = s.working_set;
  p.think_cycles = s.think;
  p.seed = seed;
  return p;
}

void add_synth_params(RunManifest& m, const SynthOpts& s) {
  m.params.emplace_back("pattern", s.pattern);
  m.params.emplace_back("ops", std::to_string(s.ops));
  m.params.emplace_back("working_set", std::to_string(s.working_set));
  m.params.emplace_back("think", std::to_string(s.think));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output", "cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("output", "write to '" + path + "' failed");
}

/// Writes the CSV and its manifest echo, or prints the CSV when no path was given.
void emit(const Common& c, RunManifest manifest, const std::string& csv) {
  if (c.csv.empty()) {
    std::cout << csv;
    return;
  }
  manifest.outputs.push_back(c.csv);
  write_file(c.csv, csv);
  write_file(c.csv + ".manifest", manifest.to_text());
}

RunManifest manifest_for(const std::string& sub, const Common& c, const SystemConfig& cfg) {
  RunManifest m;
  m.subcommand = sub;
  m.config_path = c.config_path;
  m.overrides = overrides_of(c);
  m.seed = cfg.seed;
  m.effective = cfg;
  return m;
}

std::vector<std::uint32_t> parse_list(const std::string& text, const char* what) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(what, "bad list element '" + tok + "'");
    }
  }
  return out;
}

int run_randtest_cmd(const Common& c, std::size_t checks, std::uint64_t completions,
                     const std::string& mutation, bool show_coverage) {
  const SystemConfig cfg = load_config(c);
  RandtestParams p;
  p.checks = checks;
  p.completions = completions;
  p.seed = cfg.seed;
  p.fast_forward = !c.no_fast_forward;
  if (!mutation.empty()) {
    bool found = false;
    for (Mutation m : all_mutations()) {
      if (to_string(m) == mutation) {
        p.tables = mutate(protocol_table(cfg.protocol), m);
        found = true;
      }
    }
    if (!found) throw ConfigError("mutation", "unknown mutation '" + mutation + "'");
  }
  const RandtestReport r = run_randtest(cfg, p);
  std::cout << r.to_text();
  if (show_coverage) std::cout << r.coverage_summary.to_text();
  RunManifest m = manifest_for("randtest", c, cfg);
  m.params.emplace_back("checks", std::to_string(checks));
  m.params.emplace_back("completions", std::to_string(completions));
  if (!mutation.empty()) m.params.emplace_back("mutation", mutation);
  if (!c.csv.empty()) emit(c, m, r.to_csv());
  return r.clean() ? kClean : kFailed;
}

int run_trace_cmd(const Common& c, const std::string& path) {
  const SystemConfig cfg = load_config(c);
  const auto records = parse_trace_file(path);
  System sys = build_system(cfg);
  std::unique_ptr<std::ofstream> bus;
  if (!c.bus_trace.empty()) {
    bus = std::make_unique<std::ofstream>(c.bus_trace);
    if (!*bus) throw ConfigError("bus-trace", "cannot write '" + c.bus_trace + "'");
    sys.set_trace(bus.get());
  }
  HarnessOptions opts{!c.no_fast_forward, false};
  const ReplayResult r = replay_trace(records, sys, opts);
  std::cout << r.stats.to_table();
  std::cout << "mismatches: " << r.mismatches << "\n";
  RunManifest m = manifest_for("trace", c, cfg);
  m.params.emplace_back("trace", path);
  emit(c, m, r.stats.to_csv());
  return r.mismatches == 0 && r.memory_mismatches.empty() ? kClean : kFailed;
}

int run_synth_cmd(const Common& c, const SynthOpts& s) {
  const SystemConfig cfg = load_config(c);
  const RunResult r = run_synth(cfg, synth_params(s, cfg.seed), {!c.no_fast_forward, false});
  std::cerr << r.stats.to_table();
  RunManifest m = manifest_for("synth", c, cfg);
  add_synth_params(m, s);
  emit(c, m, r.stats.to_csv());
  return r.mismatches == 0 && r.memory_mismatches.empty() ? kClean : kFailed;
}

int run_compare_cmd(const Common& c, const SynthOpts& s, const std::vector<std::string>& variants) {
  const SystemConfig cfg = load_config(c);
  const auto rows = cmd_compare(cfg, synth_params(s, cfg.seed), variants);
  RunManifest m = manifest_for("compare", c, cfg);
  add_synth_params(m, s);
  std::string names;
  for (const auto& v : variants) names += (names.empty() ? "" : ",") + v;
  m.params.emplace_back("configs", names);
  emit(c, m, compare_csv(rows));
  return kClean;
}

int run_sweep_cmd(const Common& c, const SynthOpts& s, const std::string& core_list,
                  const std::string& level_list, unsigned jobs) {
  const SystemConfig cfg = load_config(c);
  const auto cores = parse_list(core_list, "core-counts");
  const auto levels = parse_list(level_list, "level-list");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::string csv = cmd_sweep(cfg, cores, levels, synth_params(s, cfg.seed), jobs);
  RunManifest m = manifest_for("sweep", c, cfg);
  add_synth_params(m, s);
  m.params.emplace_back("core_counts", core_list);
  m.params.emplace_back("levels", level_list);
  emit(c, m, csv);
  return csv.find(",error: ") == std::string::npos && csv.find(",mismatch,") == std::string::npos
             ? kClean
             : kFailed;
}

int run_tables_cmd(const Common& c) {
  const SystemConfig cfg = load_config(c);
  const ProtocolTables t = protocol_table(cfg.protocol);
  std::cout << "# L1\n" << dump_csv(t.l1) << "# directory\n" << dump_csv(t.dir);
  return kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level directory coherence simulator and verification harness"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "Configuration file")->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>(
      "--seed",
      [&](std::uint64_t v) {
        common.seed = v;
        common.seed_set = true;
      },
      "Random seed");
  app.add_option("--cores", common.cores, "Override core count");
  app.add_option("--levels", common.levels, "Override cache levels (1 or 2)");
  app.add_option("--protocol", common.protocol, "Override protocol (msi or mi)");
  app.add_option("--csv", common.csv, "Write CSV here plus a .manifest echo");
  app.add_option("--bus-trace", common.bus_trace, "Per-message bus log (trace subcommand)");
  app.add_flag("--no-fast-forward", common.no_fast_forward, "Tick every cycle");

  std::size_t checks = 16;
  std::uint64_t completions = 10000;
  std::string mutation;
  bool coverage = false;
  auto* randtest = app.add_subcommand("randtest", "Random coherence tester");
  randtest->add_option("--checks", checks, "Number of checks")->check(CLI::PositiveNumber);
  randtest->add_option("--completions", completions, "Check rounds to complete");
  randtest->add_option("--mutation", mutation, "Seed a protocol-table bug by name");
  randtest->add_flag("--coverage", coverage, "Print per-row transition coverage");

  std::string trace_path;
  auto* trace = app.add_subcommand("trace", "Replay a trace file against the oracle");
  trace->add_option("file", trace_path, "Trace file")->required()->check(CLI::ExistingFile);

  SynthOpts synth_opts;
  auto add_synth = [&](CLI::App* sub) {
    sub->add_option("--pattern", synth_opts.pattern,
                    "private_stream|shared_read|producer_consumer|false_sharing");
    sub->add_option("--ops", synth_opts.ops, "Operations per core");
    sub->add_option("--working-set", synth_opts.working_set, "Working set in bytes");
    sub->add_option("--think", synth_opts.think, "Maximum idle gap between a core's operations");
  };
  auto* synth = app.add_subcommand("synth", "Run one synthetic workload");
  add_synth(synth);

  std::vector<std::string> variants{"MI", "MSI-1L", "MSI-2L"};
  auto* compare = app.add_subcommand("compare", "Normalized cycles across configurations");
  add_synth(compare);
  compare->add_option("--configs", variants, "Configurations; the first is the baseline")
      ->delimiter(',');

  std::string core_list = "2,4,8,16";
  std::string level_list = "1,2";
  unsigned jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Cores x levels cross product");
  add_synth(sweep);
  sweep->add_option("--core-counts", core_list, "Comma-separated core counts");
  sweep->add_option("--level-list", level_list, "Comma-separated cache level counts");
  sweep->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");

  auto* tables = app.add_subcommand("tables", "Print the protocol transition tables as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*randtest) return run_randtest_cmd(common, checks, completions, mutation, coverage);
    if (*trace) return run_trace_cmd(common, trace_path);
    if (*synth) return run_synth_cmd(common, synth_opts);
    if (*compare) return run_compare_cmd(common, synth_opts, variants);
    if (*sweep) return run_sweep_cmd(common, synth_opts, core_list, level_list, jobs);
    if (*tables) return run_tables_cmd(common);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "trace " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kFailed;
  }
  return kClean;
}

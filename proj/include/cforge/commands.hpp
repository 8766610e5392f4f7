#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cforge/config.hpp"
#include "cforge/workload.hpp"

namespace cforge {

/// Everything needed to reproduce a run from its output directory.
struct RunManifest {
  std::string subcommand;
  std::string config_path;  // empty means built-in defaults
  ConfigOverrides overrides;
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> outputs;
  SystemConfig effective;

  std::string to_text() const;
};

/// Named points of the protocol/level comparison: "MI", "MSI-1L", "MSI-2L".
SystemConfig variant(const SystemConfig& base, std::string_view name);

struct CompareRow {
  std::string workload;
  std::string config;
  Cycle cycles = 0;
  double speedup = 1.0;  // first config's cycles over this config's cycles
};

/// Runs one workload on each named variant; errors propagate.
std::vector<CompareRow> cmd_compare(const SystemConfig& base, const SynthParams& params,
                                    const std::vector<std::string>& variants);
/// `workload,config,cycles,speedup`
std::string compare_csv(const std::vector<CompareRow>& rows);

struct SweepCell {
  std::uint32_t cores = 0;
  std::uint32_t levels = 0;
};

/// Cross product of core counts and levels, one row per cell in
/// (cores, levels) order. A failing cell reports its error and the sweep goes on.
std::string cmd_sweep(const SystemConfig& base, const std::vector<std::uint32_t>& core_counts,
                      const std::vector<std::uint32_t>& levels, const SynthParams& params,
                      unsigned jobs);
std::string sweep_header();
std::string sweep_row(const SystemConfig& base, SweepCell cell, const SynthParams& params);

/// Fixed-precision formatting shared by every CSV writer.
std::string format_ratio(double v);

}  // namespace cforge

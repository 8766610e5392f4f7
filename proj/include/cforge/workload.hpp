#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cforge/config.hpp"
#include "cforge/harness.hpp"
#include "cforge/stats.hpp"

namespace cforge {

/// Desk-scale sharing patterns, one coherence behavior each.
enum class Pattern : std::uint8_t {
  PrivateStream,     // disjoint per-core regions, no sharing
  SharedRead,        // every core reads one shared region
  ProducerConsumer,  // lines migrate between writers and readers
  FalseSharing,      // each core writes its own slot of shared lines
};

std::string_view to_string(Pattern p);
/// Throws ConfigError for an unknown name.
Pattern parse_pattern(std::string_view name);

struct SynthParams {
  Pattern pattern = Pattern::SharedRead;
  std::uint64_t ops_per_core = 2000;
  std::uint64_t working_set_bytes = 4096;
  std::uint64_t seed = 1;
  Cycle think_cycles = 0;  // per-op idle gap drawn uniformly from [0, think_cycles]
  Addr base = 0x400000;
};

struct SynthOp {
  CpuRequest request;
  Cycle gap = 0;
};

/// Per-core request streams; a pure function of (params, n_cores, line_bytes).
std::vector<std::vector<SynthOp>> generate(const SynthParams& params, std::uint32_t n_cores,
                                           std::uint64_t line_bytes);

struct RunResult {
  StatsBundle stats;
  std::vector<Cycle> latencies;  // by scoreboard entry id
  std::size_t mismatches = 0;
  std::vector<Addr> memory_mismatches;
  std::uint64_t memory_hash = 0;  // main memory after flushing every cache
  Cycle skipped = 0;
};

/// Builds a system, submits every stream, runs to drain, then flushes and
/// hashes main memory.
RunResult run_synth(const SystemConfig& config, const SynthParams& params,
                    HarnessOptions options = {});

/// FNV-1a over (line address, bytes) of every touched memory line.
std::uint64_t memory_hash(const MainMemory& memory);

}  // namespace cforge

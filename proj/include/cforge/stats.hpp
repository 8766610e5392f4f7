#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cforge/bus.hpp"
#include "cforge/types.hpp"

namespace cforge {

/// Bucket i holds latencies in [2^i, 2^(i+1)); the last bucket is open-ended.
inline constexpr std::size_t kLatencyBuckets = 20;
std::size_t latency_bucket(Cycle latency);

struct CoreStats {
  std::uint64_t requests = 0;
  std::uint64_t loads = 0;
  std::uint64_t stores = 0;
  std::uint64_t latency_sum = 0;
  std::uint64_t load_latency_sum = 0;
  std::uint64_t l1_hits = 0;
  std::uint64_t l1_misses = 0;
  std::uint64_t snoops_received = 0;
  std::array<std::uint64_t, kLatencyBuckets> histogram{};

  void record(MemOp op, Cycle latency, bool hit);

  friend bool operator==(const CoreStats&, const CoreStats&) = default;
};

struct StatsBundle {
  Cycle cycles = 0;
  std::vector<CoreStats> cores;
  std::uint64_t l2_hits = 0;
  std::uint64_t l2_misses = 0;
  std::uint64_t l2_writebacks = 0;
  std::uint64_t mem_reads = 0;
  std::uint64_t mem_writes = 0;
  std::uint64_t snoops = 0;
  std::array<std::uint64_t, kNumChannels> channel_busy{};
  std::uint64_t dir_high_water = 0;

  std::uint64_t requests() const;
  std::uint64_t l1_hits() const;
  std::uint64_t l1_misses() const;
  std::uint64_t latency_sum() const;
  std::uint64_t loads() const;
  std::uint64_t load_latency_sum() const;
  double avg_latency() const;
  double avg_load_latency() const;

  /// Long format: `metric,core,value`; system-wide metrics use core "all".
  std::string to_csv() const;
  std::string to_table() const;

  friend bool operator==(const StatsBundle&, const StatsBundle&) = default;
};

}  // namespace cforge

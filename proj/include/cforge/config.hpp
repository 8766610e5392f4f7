#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cforge/cache.hpp"
#include "cforge/memside.hpp"
#include "cforge/protocol.hpp"

namespace cforge {

struct SystemConfig {
  std::uint32_t n_cores = 4;
  std::uint32_t cache_levels = 1;
  CacheGeometry l1{8 * 1024, 4, 64};
  std::uint32_t l2_count = 2;
  CacheGeometry l2{256 * 1024, 8, 64};
  Cycle l2_hit_latency = 10;
  unsigned bus_width_bits = 32;
  std::size_t fifo_depth = 0;  // 0 selects 2 x n_cores
  std::uint64_t memory_bytes = std::uint64_t{1} << 30;
  Cycle mem_first_latency = 100;
  Cycle mem_beat_latency = 1;
  ProtocolId protocol = ProtocolId::MSI;
  std::uint64_t seed = 1;
  bool check_invariants = true;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  std::size_t effective_fifo_depth() const { return fifo_depth ? fifo_depth : 2 * n_cores; }
  std::uint32_t beats_per_line() const;
  MemoryTiming memory_timing() const;
  std::optional<L2Config> l2_config() const;
  /// Upper bound on request-to-ack cycles; exceeding it is a liveness failure.
  Cycle liveness_bound() const;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct ConfigOverrides {
  std::optional<std::uint32_t> cores;
  std::optional<std::uint32_t> levels;
  std::optional<std::string> protocol;
  std::optional<std::uint64_t> seed;
};

/// Parses the sectioned key-value format documented in docs/formats.md.
/// Unknown sections or keys are rejected.
SystemConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});
SystemConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});
void apply_overrides(SystemConfig& config, const ConfigOverrides& overrides);

/// Renders a config in the same format parse_config_text reads.
std::string to_config_text(const SystemConfig& config);

}  // namespace cforge

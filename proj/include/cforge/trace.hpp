#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "cforge/harness.hpp"
#include "cforge/stats.hpp"
#include "cforge/types.hpp"

namespace cforge {

/// One `core op addr size [data]` record. Without data a store writes the
/// fill pattern derived from its scoreboard entry id.
struct TraceRecord {
  CoreId core = 0;
  MemOp op = MemOp::Load;
  Addr addr = 0;
  std::uint8_t size = 1;
  bool has_data = false;
  std::uint64_t data = 0;  // little-endian, low `size` bytes

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Throws ParseError carrying the 1-based line number.
std::vector<TraceRecord> parse_trace(std::istream& in);
std::vector<TraceRecord> parse_trace_file(const std::string& path);
std::string format_trace(const std::vector<TraceRecord>& records);

/// Byte k of the store with scoreboard entry `id`.
inline std::uint8_t fill_byte(std::uint64_t id, std::size_t k) {
  return static_cast<std::uint8_t>((id + k) & 0xff);
}

struct ReplayResult {
  StatsBundle stats;
  std::size_t requests = 0;
  std::size_t mismatches = 0;
  std::vector<Cycle> latencies;  // by scoreboard entry id
  std::vector<Addr> memory_mismatches;
};

/// Submits every record in file order, runs to drain, and checks the final
/// memory image against the oracle.
ReplayResult replay_trace(const std::vector<TraceRecord>& records, System& system,
                          HarnessOptions options = {});

}  // namespace cforge

#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "cforge/bus.hpp"
#include "cforge/protocol.hpp"
#include "cforge/stats.hpp"

namespace cforge {

/// Mutable per-simulation state shared by the components of one System:
/// coverage, statistics, the optional bus trace, and the list of lines whose
/// coherence state changed during the current tick.
struct SimContext {
  Cycle now = 0;
  CoverageCounters coverage;
  std::vector<CoreStats> cores;
  std::uint64_t snoops = 0;
  std::array<std::uint64_t, kNumChannels> channel_busy{};
  std::array<bool, kNumChannels> channel_active{};
  std::vector<Addr> touched;
  std::ostream* trace = nullptr;

  void delivered(const BusMessage& m) {
    channel_active[static_cast<std::size_t>(m.channel)] = true;
    if (trace) write_trace_line(*trace, now, m);
  }
  void touch(Addr line) { touched.push_back(line); }
  void end_cycle() {
    for (std::size_t i = 0; i < kNumChannels; ++i) {
      if (channel_active[i]) ++channel_busy[i];
      channel_active[i] = false;
    }
  }
};

}  // namespace cforge

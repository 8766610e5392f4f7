#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cforge/config.hpp"
#include "cforge/context.hpp"
#include "cforge/interconnect.hpp"
#include "cforge/l1_controller.hpp"
#include "cforge/memside.hpp"
#include "cforge/protocol.hpp"
#include "cforge/stats.hpp"

namespace cforge {

struct Violation {
  std::string invariant;  // "SWMR", "mirror", "structure"
  Addr line = 0;
  Cycle cycle = 0;
  std::string detail;

  std::string to_string() const;
};

/// N L1 controllers, the interconnect, and the memory side, stepped by a
/// two-phase cycle engine: every component evaluates against committed
/// state, then all staged FIFO pushes commit together.
class System {
 public:
  explicit System(const SystemConfig& config, std::optional<ProtocolTables> tables = std::nullopt);
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  /// One clock period. Throws InvariantViolation (fail-stop) when checking is enabled.
  void tick();
  /// Advances the cycle counter without evaluating anything. Only legal when quiescent().
  void advance_idle(Cycle n = 1);
  /// No request, message, transaction, or memory access pending anywhere.
  bool quiescent() const;

  Cycle cycle() const { return ctx_.now; }
  const SystemConfig& config() const { return config_; }
  const ProtocolTables& tables() const { return tables_; }
  std::uint32_t cores() const { return config_.n_cores; }

  CpuPort& cpu(CoreId c) { return cpus_.at(c); }
  const CpuPort& cpu(CoreId c) const { return cpus_.at(c); }
  L1Controller& l1(CoreId c) { return l1s_.at(c); }
  const L1Controller& l1(CoreId c) const { return l1s_.at(c); }
  const Interconnect& interconnect() const { return *ic_; }
  MemSide& memside() { return mem_; }
  const MemSide& memside() const { return mem_; }
  const CoverageCounters& coverage() const { return ctx_.coverage; }

  /// Bus trace sink, one line per delivered message; nullptr disables.
  void set_trace(std::ostream* os) { ctx_.trace = os; }

  /// Full walk over every line known to any L1 or the directory.
  std::vector<Violation> check_global_invariants() const;
  StatsBundle collect_stats() const;
  /// FNV-1a over cycle, cache arrays, MSHRs, directory, and FSM states.
  std::uint64_t state_hash() const;

  /// Current coherent value of a line: the owning L1's copy when one holds it in M.
  std::vector<std::uint8_t> coherent_line(Addr line_addr) const;
  /// Functional write-back of every dirty L1 line and L2 bank into main memory.
  void flush_to_memory();

 private:
  std::vector<Violation> check_line(Addr line, bool skip_held) const;

  SystemConfig config_;
  ProtocolTables tables_;
  SimContext ctx_;
  MemSide mem_;
  std::vector<L1Port> ports_;
  std::vector<CpuPort> cpus_;
  std::deque<L1Controller> l1s_;
  std::unique_ptr<Interconnect> ic_;
};

/// Validates the config and wires a fresh system at cycle 0. `tables`
/// overrides the protocol named by the config (used for seeded mutations).
System build_system(const SystemConfig& config,
                    std::optional<ProtocolTables> tables = std::nullopt);

}  // namespace cforge

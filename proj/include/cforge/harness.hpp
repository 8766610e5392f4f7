#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cforge/system.hpp"
#include "cforge/types.hpp"

namespace cforge {

/// Reference memory. Writes are applied in DUT ack order, so its contents
/// are the fold of all acknowledged stores.
class OracleMemory {
 public:
  void write(Addr addr, std::span<const std::uint8_t> bytes);
  std::uint8_t byte(Addr addr) const;
  std::array<std::uint8_t, 8> read(Addr addr, std::size_t len) const;
  const std::unordered_map<Addr, std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::unordered_map<Addr, std::uint8_t> bytes_;
};

enum class EntryStatus : std::uint8_t { Queued, Issued, Pass, Mismatch };

struct ScoreEntry {
  std::uint64_t id = 0;
  CoreId core = 0;
  CpuRequest request;
  Cycle gap = 0;  // idle cycles required after the core's previous ack
  Cycle issue_cycle = 0;
  Cycle ack_cycle = 0;
  std::array<std::uint8_t, 8> expected{};
  std::array<std::uint8_t, 8> got{};
  EntryStatus status = EntryStatus::Queued;

  Cycle latency() const { return ack_cycle - issue_cycle; }
  bool closed() const { return status == EntryStatus::Pass || status == EntryStatus::Mismatch; }
};

/// `cycle,core,op,addr,expected_hex,got_hex` for one closed entry.
std::string failure_line(const ScoreEntry& e);

class Scoreboard {
 public:
  std::uint64_t open(CoreId core, const CpuRequest& request, Cycle gap);
  ScoreEntry& at(std::uint64_t id) { return entries_.at(id); }
  const ScoreEntry& at(std::uint64_t id) const { return entries_.at(id); }
  const std::vector<ScoreEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t open_count() const { return entries_.size() - closed_; }
  std::size_t mismatches() const { return mismatches_; }
  void close(std::uint64_t id, bool pass);
  /// Header plus one failure_line per mismatched entry.
  std::string failure_dump() const;

 private:
  std::vector<ScoreEntry> entries_;
  std::size_t closed_ = 0;
  std::size_t mismatches_ = 0;
};

struct HarnessOptions {
  bool fast_forward = true;
  bool stop_on_mismatch = true;  // throw ScoreboardMismatch at the first bad load
};

struct Completion {
  std::uint64_t id = 0;
  CoreId core = 0;
  CpuRequest request;
  std::array<std::uint8_t, 8> data{};
  Cycle latency = 0;
  bool pass = true;
};

/// Drives a System the way a CPU-side simulator would: per-core request
/// queues, an ack scan at the start of every cycle, issue to idle cores, and
/// a clock tick that is skipped when nothing anywhere is pending.
class Harness {
 public:
  explicit Harness(System& system, HarnessOptions options = {});

  /// Queues a request behind the core's earlier ones. Throws MalformedRequest.
  std::uint64_t submit(CoreId core, const CpuRequest& request, Cycle gap = 0);

  /// Ack scan, issue, then tick or skip. Returns this cycle's completions.
  const std::vector<Completion>& cycle();
  /// Runs cycles until every submitted request has closed and the system is quiescent.
  void run_to_drain();

  bool fast_forward_eligible() const;
  /// Work queued or in flight on the core (the tester only picks idle cores).
  bool core_busy(CoreId core) const;
  bool pending() const;

  System& system() { return *sys_; }
  const System& system() const { return *sys_; }
  const Scoreboard& scoreboard() const { return board_; }
  const OracleMemory& oracle() const { return oracle_; }
  Cycle skipped_cycles() const { return skipped_; }

  /// Oracle bytes the DUT disagrees with, reading through the coherent view.
  std::vector<Addr> final_memory_mismatches() const;

 private:
  void scan_acks();
  void issue();
  void check_liveness() const;
  Cycle next_ready_cycle() const;

  System* sys_;
  HarnessOptions opts_;
  Scoreboard board_;
  OracleMemory oracle_;
  std::vector<std::deque<std::uint64_t>> queues_;
  std::vector<std::optional<std::uint64_t>> inflight_;
  std::vector<Cycle> last_ack_;
  std::vector<Completion> done_;
  Cycle bound_;
  Cycle skipped_ = 0;
};

}  // namespace cforge

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "cforge/config.hpp"
#include "cforge/harness.hpp"
#include "cforge/protocol.hpp"
#include "cforge/stats.hpp"

namespace cforge {

/// 64-bit Mersenne Twister (std::mt19937_64) with unbiased bounded draws by
/// rejection, so a seed yields the same sequence on every platform.
class TesterRng {
 public:
  explicit TesterRng(std::uint64_t seed) : gen_(seed) {}
  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
};

enum class CheckPhase : std::uint8_t { Idle, ActionPending, CheckPending };

/// Four single-byte stores to base..base+3 in order, then one 4-byte load.
/// Byte k of a round holds (expected + k) mod 256.
struct Check {
  Addr base = 0;
  std::uint8_t expected = 0;
  CheckPhase phase = CheckPhase::Idle;
  std::uint8_t next_byte = 0;  // first byte not yet issued
  bool in_flight = false;
  std::array<bool, 4> acked{};
  std::array<CoreId, 4> cores{};
  std::uint64_t rounds = 0;
};

struct Verdict {
  bool pass = true;
  int byte = -1;  // first mismatching byte
  std::array<std::uint8_t, 4> expected{};
  std::array<std::uint8_t, 4> got{};
};

Verdict verify(const Check& check, const std::array<std::uint8_t, 4>& read);

struct Placement {
  std::uint64_t line_bytes = 64;
  std::uint64_t line_stride = 2048;  // one L1 set span keeps every check line in one set
};

/// Core selection, in blocks of `shift_every` completed check rounds. Even
/// blocks draw from a window of `window` consecutive cores (with probability
/// local_percent/100) and move the window by one core per even block; odd
/// blocks draw from all cores. window == 0 always draws uniformly.
/// Concentrating traffic lets a few controllers overflow an L1 set, which
/// uniform draws over many cores almost never do.
struct CoreDraw {
  std::uint32_t window = 4;
  std::uint32_t local_percent = 100;
  std::uint64_t shift_every = 250;
};

struct TesterRequest {
  CoreId core = 0;
  CpuRequest request;
  std::size_t check = 0;
};

class Tester {
 public:
  /// Half the checks share lines four to a line, the rest get a line each.
  /// Throws SpanTooSmall when the lines do not fit in [span_base, span_base + span_bytes).
  Tester(std::uint64_t seed, std::size_t n_checks, Addr span_base, std::uint64_t span_bytes,
         Placement placement = {}, CoreDraw draw = {});

  /// One attempt: a random check and a random core. Nothing is issued when the
  /// check already has a request in flight or the drawn core is busy.
  std::optional<TesterRequest> next_request(std::uint32_t n_cores,
                                            const std::function<bool(CoreId)>& core_busy);
  /// Records the request's scoreboard id so its completion can be routed back.
  void bind(std::uint64_t entry_id, std::size_t check) { owner_[entry_id] = check; }
  /// Advances the owning check. Returns the verdict for verifying reads.
  std::optional<Verdict> on_complete(const Completion& c);

  const std::vector<Check>& checks() const { return checks_; }
  std::uint64_t completions() const { return completions_; }
  std::uint64_t mismatches() const { return mismatches_; }

 private:
  CoreId draw_core(std::uint32_t n_cores);

  TesterRng rng_;
  CoreDraw draw_;
  std::vector<Check> checks_;
  std::unordered_map<std::uint64_t, std::size_t> owner_;
  std::uint64_t completions_ = 0;
  std::uint64_t mismatches_ = 0;
};

struct RandtestParams {
  std::size_t checks = 16;
  std::uint64_t completions = 10000;
  std::uint64_t seed = 1;
  Addr span_base = 0x100000;
  std::uint64_t span_bytes = 1 << 20;
  std::optional<ProtocolTables> tables;
  bool fast_forward = true;
  CoreDraw draw;
};

enum class RandtestOutcome : std::uint8_t {
  Pass,
  Mismatch,
  InvariantViolation,
  ProtocolViolation,
  LivenessViolation,
  Error,
};

std::string_view to_string(RandtestOutcome o);

struct RandtestReport {
  RandtestOutcome outcome = RandtestOutcome::Pass;
  std::string error;
  std::uint64_t completions = 0;
  std::uint64_t mismatches = 0;
  std::uint64_t violations = 0;
  Cycle cycles = 0;
  CoverageCounters coverage;
  CoverageSummary coverage_summary;
  StatsBundle stats;

  bool clean() const { return outcome == RandtestOutcome::Pass; }
  std::string to_text() const;
  /// `metric,value` rows.
  std::string to_csv() const;
};

/// Builds a system, drives it with a tester until `completions` checks have
/// verified, drains, and walks every invariant. Fail-stop errors end the run
/// and are reported, not thrown.
RandtestReport run_randtest(const SystemConfig& config, const RandtestParams& params);

}  // namespace cforge

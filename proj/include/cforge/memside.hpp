#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "cforge/cache.hpp"
#include "cforge/types.hpp"

namespace cforge {

struct MemoryTiming {
  Cycle first_access = 100;
  Cycle per_beat = 1;
  std::uint32_t beats = 16;

  Cycle line_latency() const { return first_access + per_beat * beats; }
};

struct LineRead {
  std::vector<std::uint8_t> data;
  Cycle latency = 0;
  bool hit = false;  // L2 hit; always false without an L2
};

/// Sparse flat memory. Untouched bytes read as zero.
class MainMemory {
 public:
  MainMemory(std::uint64_t size_bytes, std::uint64_t line_bytes, MemoryTiming timing);

  LineRead read_line(Addr line_addr);
  Cycle write_line(Addr line_addr, std::span<const std::uint8_t> data);

  /// Functional access without timing or statistics.
  std::vector<std::uint8_t> peek_line(Addr line_addr) const;
  void poke_line(Addr line_addr, std::span<const std::uint8_t> data);
  std::uint8_t peek_byte(Addr addr) const;

  std::uint64_t size() const { return size_; }
  std::uint64_t line_bytes() const { return line_bytes_; }
  const MemoryTiming& timing() const { return timing_; }
  std::uint64_t reads() const { return reads_; }
  std::uint64_t writes() const { return writes_; }
  /// Touched line addresses, ascending.
  std::vector<Addr> touched_lines() const;

 private:
  void check(Addr line_addr) const;

  std::uint64_t size_;
  std::uint64_t line_bytes_;
  MemoryTiming timing_;
  std::unordered_map<Addr, std::vector<std::uint8_t>> lines_;
  std::uint64_t reads_ = 0;
  std::uint64_t writes_ = 0;
};

struct L2Config {
  CacheGeometry geometry{256 * 1024, 8, 64};
  std::uint32_t banks = 2;
  Cycle hit_latency = 10;
};

struct L2BankStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t writebacks = 0;
};

enum class L2Op { ReadLine, WriteLine };

struct L2Result {
  std::optional<std::vector<std::uint8_t>> data;
  bool hit = false;
  Cycle latency = 0;
};

/// Everything behind the interconnect's memory port: main memory plus the
/// optional shared L2 banks. L2 lines are plain clean (S) / dirty (M) copies;
/// coherence lives entirely in the interconnect's directory.
class MemSide {
 public:
  MemSide(MainMemory memory, std::optional<L2Config> l2);

  LineRead read_line(Addr line_addr);
  Cycle write_line(Addr line_addr, std::span<const std::uint8_t> data);

  /// Requires an L2. Miss fills the bank (writing back a dirty victim);
  /// WriteLine installs the line dirty without touching main memory.
  L2Result l2_access(Addr line_addr, L2Op op, std::span<const std::uint8_t> data = {});

  bool has_l2() const { return l2_.has_value(); }
  std::uint32_t bank_of(Addr line_addr) const;
  std::uint32_t bank_count() const { return l2_ ? l2_->banks : 0; }
  const CacheArray& bank(std::uint32_t i) const { return banks_.at(i); }
  const L2BankStats& bank_stats(std::uint32_t i) const { return bank_stats_.at(i); }

  /// Writes every dirty L2 line to main memory and marks it clean (functional).
  void flush();
  /// Current value of a line as seen through the L2 (functional).
  std::vector<std::uint8_t> peek_line(Addr line_addr) const;

  MainMemory& memory() { return memory_; }
  const MainMemory& memory() const { return memory_; }

 private:
  MainMemory memory_;
  std::optional<L2Config> l2_;
  std::vector<CacheArray> banks_;
  std::vector<L2BankStats> bank_stats_;
};

}  // namespace cforge

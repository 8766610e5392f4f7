#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cforge/protocol.hpp"
#include "cforge/types.hpp"

namespace cforge {

struct CacheGeometry {
  std::uint64_t capacity_bytes = 8 * 1024;
  std::uint64_t ways = 4;
  std::uint64_t line_bytes = 64;

  /// Throws ConfigError naming `what` when the shape is not realizable.
  void validate(const std::string& what = "cache") const;

  std::uint64_t sets() const { return capacity_bytes / (ways * line_bytes); }
  unsigned offset_bits() const { return log2_exact(line_bytes); }
  unsigned index_bits() const { return log2_exact(sets()); }

  Addr line_addr(Addr a) const { return a & ~(line_bytes - 1); }
  std::uint64_t set_index(Addr a) const { return (a >> offset_bits()) & (sets() - 1); }
  std::uint64_t tag(Addr a) const { return a >> (offset_bits() + index_bits()); }
  Addr addr_of(std::uint64_t tag, std::uint64_t set) const {
    return (tag << (offset_bits() + index_bits())) | (set << offset_bits());
  }

  friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;
};

struct CacheLine {
  std::uint64_t tag = 0;
  LineState state = LineState::I;
  bool dirty = false;
  std::uint32_t lru_rank = 0;  // 0 = most recently used
};

struct LookupHit {
  std::uint32_t way;
  LineState state;
};

struct Victim {
  Addr line_addr = 0;
  std::vector<std::uint8_t> data;
  LineState state = LineState::I;
  bool dirty = false;
};

/// Set-associative array with strict LRU. Stores states as opaque tags: the
/// L1 keeps MSI stable states here, the L2 uses S for clean and M for dirty.
class CacheArray {
 public:
  explicit CacheArray(CacheGeometry geometry);

  const CacheGeometry& geometry() const { return geo_; }

  /// Hit iff a way in the set matches the tag with state != I. No side effects.
  std::optional<LookupHit> lookup(Addr addr) const;
  LineState state(Addr addr) const;

  /// Installs the line as most recently used. Returns the displaced LRU line
  /// when the set was full. Throws DoubleFill if the line is already present.
  std::optional<Victim> fill(Addr addr, std::span<const std::uint8_t> data, LineState state);

  /// The line a fill of `addr` would displace, or nullopt if an invalid way exists.
  std::optional<Victim> peek_victim(Addr addr) const;

  void touch(Addr addr);
  void set_state(Addr addr, LineState state);
  void invalidate(Addr addr);

  /// Byte access at `addr + offset` within one line. Writes require M and set
  /// dirty; reads require S or M. Throws StateViolation otherwise.
  void write_bytes(Addr addr, std::size_t offset, std::span<const std::uint8_t> bytes);
  std::vector<std::uint8_t> read_bytes(Addr addr, std::size_t offset, std::size_t len) const;

  /// Whole-line access for controllers; the line must be present.
  std::span<const std::uint8_t> line_data(Addr addr) const;
  void store_line(Addr addr, std::span<const std::uint8_t> data, LineState state, bool dirty);

  const CacheLine& line(std::uint64_t set, std::uint32_t way) const {
    return lines_[set * geo_.ways + way];
  }
  std::span<const std::uint8_t> way_data(std::uint64_t set, std::uint32_t way) const;
  bool is_dirty(Addr addr) const;

  /// `set=<i> way=<w> tag=<hex> state=<X> dirty=<0|1> lru=<r>` per way.
  std::string dump_set(std::uint64_t set) const;

  /// Calls f(line_addr, CacheLine, data) for every valid line.
  template <class F>
  void for_each_valid(F&& f) const {
    for (std::uint64_t set = 0; set < geo_.sets(); ++set) {
      for (std::uint32_t way = 0; way < geo_.ways; ++way) {
        const CacheLine& l = line(set, way);
        if (l.state != LineState::I) f(geo_.addr_of(l.tag, set), l, way_data(set, way));
      }
    }
  }

 private:
  std::optional<std::uint32_t> find_way(Addr addr) const;
  std::uint32_t choose_way(std::uint64_t set) const;
  void promote(std::uint64_t set, std::uint32_t way);
  CacheLine& line_mut(std::uint64_t set, std::uint32_t way) { return lines_[set * geo_.ways + way]; }
  std::uint8_t* data_ptr(std::uint64_t set, std::uint32_t way) {
    return data_.data() + (set * geo_.ways + way) * geo_.line_bytes;
  }

  CacheGeometry geo_;
  std::vector<CacheLine> lines_;
  std::vector<std::uint8_t> data_;
};

/// Pending eviction held in the MSHR: the line left the array when the
/// write-back or evict was issued and waits here for its acknowledgment.
struct PendingVictim {
  Addr line_addr = 0;
  LineState state = LineState::I;  // MI_A or SI_A
  std::vector<std::uint8_t> data;
};

struct MshrEntry {
  bool valid = false;
  Addr line_addr = 0;
  CpuRequest request;
  /// IS_D / IM_D / SM_D once issued; I while waiting for the victim to drain.
  LineState transient = LineState::I;
  std::optional<PendingVictim> victim;
};

enum class MshrStatus { Ok, Busy };

/// The single miss register of an L1 controller.
class Mshr {
 public:
  MshrStatus allocate(Addr line_addr, const CpuRequest& request);
  /// Releases the entry and returns its request. Throws MshrError if empty.
  CpuRequest complete();

  bool busy() const { return entry_.valid; }
  const MshrEntry& entry() const { return entry_; }
  MshrEntry& entry() { return entry_; }

 private:
  MshrEntry entry_;
};

}  // namespace cforge

#include "cforge/cache.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

void CacheGeometry::validate(const std::string& what) const {
  if (line_bytes == 0 || !is_pow2(line_bytes)) {
    throw ConfigError(what + ".line", "line size must be a power of two");
  }
  if (ways == 0 || !is_pow2(ways)) {
    throw ConfigError(what + ".ways", "associativity must be a power of two");
  }
  if (capacity_bytes == 0 || capacity_bytes % (ways * line_bytes) != 0) {
    throw ConfigError(what + ".capacity", "capacity " + std::to_string(capacity_bytes) +
                                              " is not divisible by ways x line size");
  }
  if (!is_pow2(sets())) {
    throw ConfigError(what + ".capacity", "set count must be a power of two");
  }
}

CacheArray::CacheArray(CacheGeometry geometry) : geo_(geometry) {
  geo_.validate();
  const std::uint64_t n = geo_.sets() * geo_.ways;
  lines_.resize(n);
  data_.assign(n * geo_.line_bytes, 0);
  for (std::uint64_t set = 0; set < geo_.sets(); ++set) {
    for (std::uint32_t way = 0; way < geo_.ways; ++way) line_mut(set, way).lru_rank = way;
  }
}

std::optional<std::uint32_t> CacheArray::find_way(Addr addr) const {
  const std::uint64_t set = geo_.set_index(addr);
  const std::uint64_t tag = geo_.tag(addr);
  for (std::uint32_t way = 0; way < geo_.ways; ++way) {
    const CacheLine& l = line(set, way);
    if (l.state != LineState::I && l.tag == tag) return way;
  }
  return std::nullopt;
}

std::optional<LookupHit> CacheArray::lookup(Addr addr) const {
  if (auto way = find_way(addr)) return LookupHit{*way, line(geo_.set_index(addr), *way).state};
  return std::nullopt;
}

LineState CacheArray::state(Addr addr) const {
  auto hit = lookup(addr);
  return hit ? hit->state : LineState::I;
}

std::uint32_t CacheArray::choose_way(std::uint64_t set) const {
  std::uint32_t victim = 0;
  std::uint32_t worst = 0;
  for (std::uint32_t way = 0; way < geo_.ways; ++way) {
    const CacheLine& l = line(set, way);
    if (l.state == LineState::I) return way;
    if (l.lru_rank >= worst) {
      worst = l.lru_rank;
      victim = way;
    }
  }
  return victim;
}

void CacheArray::promote(std::uint64_t set, std::uint32_t way) {
  const std::uint32_t old = line(set, way).lru_rank;
  for (std::uint32_t w = 0; w < geo_.ways; ++w) {
    CacheLine& l = line_mut(set, w);
    if (l.lru_rank < old) ++l.lru_rank;
  }
  line_mut(set, way).lru_rank = 0;
}

std::optional<Victim> CacheArray::peek_victim(Addr addr) const {
  const std::uint64_t set = geo_.set_index(addr);
  const std::uint32_t way = choose_way(set);
  const CacheLine& l = line(set, way);
  if (l.state == LineState::I) return std::nullopt;
  auto bytes = way_data(set, way);
  return Victim{geo_.addr_of(l.tag, set), {bytes.begin(), bytes.end()}, l.state, l.dirty};
}

std::optional<Victim> CacheArray::fill(Addr addr, std::span<const std::uint8_t> data,
                                       LineState state) {
  if (find_way(addr)) {
    throw DoubleFill("fill of line 0x" + [&] {
      std::ostringstream os;
      os << std::hex << geo_.line_addr(addr);
      return os.str();
    }() + " which is already present");
  }
  if (data.size() != geo_.line_bytes) throw StateViolation("fill with a partial line");
  std::optional<Victim> victim = peek_victim(addr);
  const std::uint64_t set = geo_.set_index(addr);
  const std::uint32_t way = choose_way(set);
  CacheLine& l = line_mut(set, way);
  l.tag = geo_.tag(addr);
  l.state = state;
  l.dirty = false;
  std::memcpy(data_ptr(set, way), data.data(), geo_.line_bytes);
  promote(set, way);
  return victim;
}

void CacheArray::touch(Addr addr) {
  if (auto way = find_way(addr)) promote(geo_.set_index(addr), *way);
}

void CacheArray::set_state(Addr addr, LineState state) {
  auto way = find_way(addr);
  if (!way) throw StateViolation("set_state on an absent line");
  CacheLine& l = line_mut(geo_.set_index(addr), *way);
  l.state = state;
  if (state != LineState::M) l.dirty = false;
}

void CacheArray::invalidate(Addr addr) {
  if (auto way = find_way(addr)) {
    CacheLine& l = line_mut(geo_.set_index(addr), *way);
    l.state = LineState::I;
    l.dirty = false;
  }
}

void CacheArray::write_bytes(Addr addr, std::size_t offset, std::span<const std::uint8_t> bytes) {
  if (offset + bytes.size() > geo_.line_bytes) throw StateViolation("write crosses a line boundary");
  auto way = find_way(addr);
  if (!way) throw StateViolation("write to a line in I");
  const std::uint64_t set = geo_.set_index(addr);
  CacheLine& l = line_mut(set, *way);
  if (l.state != LineState::M) {
    throw StateViolation("write to a line in " + std::string(to_string(l.state)));
  }
  std::memcpy(data_ptr(set, *way) + offset, bytes.data(), bytes.size());
  l.dirty = true;
}

std::vector<std::uint8_t> CacheArray::read_bytes(Addr addr, std::size_t offset,
                                                 std::size_t len) const {
  if (offset + len > geo_.line_bytes) throw StateViolation("read crosses a line boundary");
  auto way = find_way(addr);
  if (!way) throw StateViolation("read of a line in I");
  const std::uint64_t set = geo_.set_index(addr);
  auto bytes = way_data(set, *way).subspan(offset, len);
  return {bytes.begin(), bytes.end()};
}

std::span<const std::uint8_t> CacheArray::way_data(std::uint64_t set, std::uint32_t way) const {
  return {data_.data() + (set * geo_.ways + way) * geo_.line_bytes, geo_.line_bytes};
}

std::span<const std::uint8_t> CacheArray::line_data(Addr addr) const {
  auto way = find_way(addr);
  if (!way) throw StateViolation("line_data of an absent line");
  return way_data(geo_.set_index(addr), *way);
}

void CacheArray::store_line(Addr addr, std::span<const std::uint8_t> data, LineState state,
                            bool dirty) {
  auto way = find_way(addr);
  if (!way) throw StateViolation("store_line on an absent line");
  const std::uint64_t set = geo_.set_index(addr);
  CacheLine& l = line_mut(set, *way);
  std::memcpy(data_ptr(set, *way), data.data(), geo_.line_bytes);
  l.state = state;
  l.dirty = dirty && state == LineState::M;
}

bool CacheArray::is_dirty(Addr addr) const {
  auto way = find_way(addr);
  return way && line(geo_.set_index(addr), *way).dirty;
}

std::string CacheArray::dump_set(std::uint64_t set) const {
  std::ostringstream os;
  for (std::uint32_t way = 0; way < geo_.ways; ++way) {
    const CacheLine& l = line(set, way);
    os << "set=" << set << " way=" << way << " tag=" << std::hex << l.tag << std::dec
       << " state=" << to_string(l.state) << " dirty=" << (l.dirty ? 1 : 0)
       << " lru=" << l.lru_rank << '\n';
  }
  return os.str();
}

MshrStatus Mshr::allocate(Addr line_addr, const CpuRequest& request) {
  if (entry_.valid) return MshrStatus::Busy;
  entry_ = MshrEntry{};
  entry_.valid = true;
  entry_.line_addr = line_addr;
  entry_.request = request;
  return MshrStatus::Ok;
}

CpuRequest Mshr::complete() {
  if (!entry_.valid) throw MshrError("completion with no pending miss");
  CpuRequest req = entry_.request;
  entry_ = MshrEntry{};
  return req;
}

}  // namespace cforge

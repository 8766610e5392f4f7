#include "cforge/memside.hpp"

#include <algorithm>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

MainMemory::MainMemory(std::uint64_t size_bytes, std::uint64_t line_bytes, MemoryTiming timing)
    : size_(size_bytes), line_bytes_(line_bytes), timing_(timing) {
  if (line_bytes_ == 0 || !is_pow2(line_bytes_)) {
    throw ConfigError("memory.line", "line size must be a power of two");
  }
  if (size_ < line_bytes_ || size_ % line_bytes_ != 0) {
    throw ConfigError("memory.size", "size must be a whole number of lines");
  }
}

void MainMemory::check(Addr line_addr) const {
  if (line_addr % line_bytes_ != 0 || line_addr + line_bytes_ > size_) {
    std::ostringstream os;
    os << "line address 0x" << std::hex << line_addr << " outside 0x" << size_ << "-byte memory";
    throw OutOfRange(os.str());
  }
}

LineRead MainMemory::read_line(Addr line_addr) {
  check(line_addr);
  ++reads_;
  return {peek_line(line_addr), timing_.line_latency(), false};
}

Cycle MainMemory::write_line(Addr line_addr, std::span<const std::uint8_t> data) {
  check(line_addr);
  ++writes_;
  poke_line(line_addr, data);
  return timing_.line_latency();
}

std::vector<std::uint8_t> MainMemory::peek_line(Addr line_addr) const {
  check(line_addr);
  auto it = lines_.find(line_addr);
  if (it == lines_.end()) return std::vector<std::uint8_t>(line_bytes_, 0);
  return it->second;
}

void MainMemory::poke_line(Addr line_addr, std::span<const std::uint8_t> data) {
  check(line_addr);
  if (data.size() != line_bytes_) throw OutOfRange("partial line write");
  lines_[line_addr].assign(data.begin(), data.end());
}

std::uint8_t MainMemory::peek_byte(Addr addr) const {
  const Addr line = addr & ~(line_bytes_ - 1);
  check(line);
  auto it = lines_.find(line);
  return it == lines_.end() ? 0 : it->second[addr - line];
}

std::vector<Addr> MainMemory::touched_lines() const {
  std::vector<Addr> out;
  out.reserve(lines_.size());
  for (const auto& [addr, _] : lines_) out.push_back(addr);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

MemSide::MemSide(MainMemory memory, std::optional<L2Config> l2)
    : memory_(std::move(memory)), l2_(std::move(l2)) {
  if (!l2_) return;
  if (l2_->banks == 0) throw ConfigError("l2.count", "at least one L2 bank is required");
  l2_->geometry.validate("l2");
  if (l2_->geometry.line_bytes != memory_.line_bytes()) {
    throw ConfigError("l2.line", "L2 line size must match the L1 line size");
  }
  for (std::uint32_t i = 0; i < l2_->banks; ++i) banks_.emplace_back(l2_->geometry);
  bank_stats_.resize(l2_->banks);
}

std::uint32_t MemSide::bank_of(Addr line_addr) const {
  if (!l2_) return 0;
  return static_cast<std::uint32_t>((line_addr / memory_.line_bytes()) % l2_->banks);
}

LineRead MemSide::read_line(Addr line_addr) {
  if (!l2_) return memory_.read_line(line_addr);
  L2Result r = l2_access(line_addr, L2Op::ReadLine);
  return {std::move(*r.data), r.latency, r.hit};
}

Cycle MemSide::write_line(Addr line_addr, std::span<const std::uint8_t> data) {
  if (!l2_) return memory_.write_line(line_addr, data);
  return l2_access(line_addr, L2Op::WriteLine, data).latency;
}

L2Result MemSide::l2_access(Addr line_addr, L2Op op, std::span<const std::uint8_t> data) {
  if (!l2_) throw ConfigError("levels", "L2 access on a single-level system");
  if (line_addr % memory_.line_bytes() != 0 || line_addr + memory_.line_bytes() > memory_.size()) {
    std::ostringstream os;
    os << "line address 0x" << std::hex << line_addr << " outside memory";
    throw OutOfRange(os.str());
  }
  const std::uint32_t b = bank_of(line_addr);
  CacheArray& bank = banks_[b];
  L2BankStats& stats = bank_stats_[b];
  L2Result out;
  out.latency = l2_->hit_latency;

  if (bank.lookup(line_addr)) {
    out.hit = true;
    ++stats.hits;
    bank.touch(line_addr);
    if (op == L2Op::ReadLine) {
      auto bytes = bank.line_data(line_addr);
      out.data.emplace(bytes.begin(), bytes.end());
    } else {
      bank.store_line(line_addr, data, LineState::M, true);
    }
    return out;
  }

  ++stats.misses;
  std::vector<std::uint8_t> line;
  if (op == L2Op::ReadLine) {
    LineRead fetched = memory_.read_line(line_addr);
    out.latency += fetched.latency;
    line = std::move(fetched.data);
  } else {
    line.assign(data.begin(), data.end());
  }
  if (auto victim = bank.peek_victim(line_addr); victim && victim->dirty) {
    ++stats.writebacks;
    out.latency += memory_.write_line(victim->line_addr, victim->data);
  }
  if (op == L2Op::ReadLine) {
    bank.fill(line_addr, line, LineState::S);
    out.data = std::move(line);
  } else {
    bank.fill(line_addr, line, LineState::M);
    bank.store_line(line_addr, line, LineState::M, true);
  }
  return out;
}

void MemSide::flush() {
  for (auto& bank : banks_) {
    std::vector<Addr> dirty;
    bank.for_each_valid([&](Addr a, const CacheLine& l, auto) {
      if (l.dirty) dirty.push_back(a);
    });
    for (Addr a : dirty) {
      auto bytes = bank.line_data(a);
      memory_.poke_line(a, bytes);
      std::vector<std::uint8_t> copy(bytes.begin(), bytes.end());
      bank.store_line(a, copy, LineState::S, false);
    }
  }
}

std::vector<std::uint8_t> MemSide::peek_line(Addr line_addr) const {
  if (l2_) {
    const CacheArray& bank = banks_[bank_of(line_addr)];
    if (bank.lookup(line_addr)) {
      auto bytes = bank.line_data(line_addr);
      return {bytes.begin(), bytes.end()};
    }
  }
  return memory_.peek_line(line_addr);
}

}  // namespace cforge

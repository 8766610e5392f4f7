#include "cforge/system.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

std::string Violation::to_string() const {
  std::ostringstream os;
  os << invariant << " violation at cycle " << cycle << " line 0x" << std::hex << line << std::dec
     << ": " << detail;
  return os.str();
}

namespace {

class Fnv {
 public:
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
      h_ ^= b;
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

bool in(LineState s, std::initializer_list<LineState> set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

}  // namespace

System::System(const SystemConfig& config, std::optional<ProtocolTables> tables)
    : config_((config.validate(), config)),
      tables_(tables ? std::move(*tables) : protocol_table(config.protocol)),
      mem_(MainMemory(config.memory_bytes, config.l1.line_bytes, config.memory_timing()),
           config.l2_config()),
      ports_(config.n_cores),
      cpus_(config.n_cores) {
  ctx_.cores.resize(config_.n_cores);
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    l1s_.emplace_back(c, config_, tables_, ports_[c], cpus_[c], ctx_);
  }
  ic_ = std::make_unique<Interconnect>(config_, tables_, ports_, mem_, ctx_);
}

System build_system(const SystemConfig& config, std::optional<ProtocolTables> tables) {
  return System(config, std::move(tables));
}

void System::tick() {
  ctx_.touched.clear();
  for (L1Controller& l1 : l1s_) l1.tick();
  ic_->tick();
  for (L1Port& p : ports_) p.commit();
  ic_->commit();
  ctx_.end_cycle();

  if (config_.check_invariants && !ctx_.touched.empty()) {
    std::sort(ctx_.touched.begin(), ctx_.touched.end());
    ctx_.touched.erase(std::unique(ctx_.touched.begin(), ctx_.touched.end()), ctx_.touched.end());
    for (Addr line : ctx_.touched) {
      auto v = check_line(line, true);
      if (!v.empty()) {
        std::ostringstream os;
        os << "seed=" << config_.seed << " cycle=" << ctx_.now << " addr=0x" << std::hex << line
           << std::dec << ": " << v.front().to_string();
        throw InvariantViolation(os.str());
      }
    }
  }
  ++ctx_.now;
}

void System::advance_idle(Cycle n) {
  if (!quiescent()) throw StateViolation("idle advance of a busy system");
  ctx_.now += n;
}

bool System::quiescent() const {
  if (!ic_->idle()) return false;
  return std::all_of(l1s_.begin(), l1s_.end(), [](const L1Controller& l) { return l.quiescent(); });
}

std::vector<Violation> System::check_line(Addr line, bool skip_held) const {
  std::vector<Violation> out;
  auto report = [&](const char* inv, std::string detail) {
    out.push_back({inv, line, ctx_.now, std::move(detail)});
  };

  std::vector<LineState> states(config_.n_cores);
  unsigned m = 0;
  unsigned s = 0;
  for (CoreId c = 0; c < config_.n_cores; ++c) {
    states[c] = l1s_[c].line_state(line);
    if (states[c] == LineState::M) ++m;
    if (states[c] == LineState::S) ++s;
  }
  if (m > 1) report("SWMR", std::to_string(m) + " caches hold the line in M");
  if (m == 1 && s > 0) report("SWMR", "a cache holds the line in M while " + std::to_string(s) +
                                          " hold it in S");

  if (skip_held && ic_->read_line_held() == line) return out;

  const DirectoryEntry e = ic_->directory().lookup(line);
  const std::string dir = describe(e);
  auto is_sharer = [&](CoreId c) { return e.state == DirState::Shared && (e.sharers >> c) & 1; };
  auto is_owner = [&](CoreId c) { return e.state == DirState::Modified && e.owner == c; };

  for (CoreId c = 0; c < config_.n_cores; ++c) {
    const std::string who = "core " + std::to_string(c) + " in " + std::string(to_string(states[c]));
    switch (states[c]) {
      case LineState::M:
        if (!is_owner(c)) report("mirror", who + " but directory has " + dir);
        break;
      case LineState::S:
        if (!is_sharer(c)) report("mirror", who + " but directory has " + dir);
        break;
      case LineState::SM_D:
        if (!is_sharer(c) && !is_owner(c)) report("mirror", who + " but directory has " + dir);
        break;
      default:
        break;
    }
  }
  if (e.state == DirState::Modified) {
    const LineState o = states.at(e.owner);
    if (!in(o, {LineState::M, LineState::MI_A, LineState::IM_D, LineState::SM_D})) {
      report("mirror", dir + " but the owner is in " + std::string(to_string(o)));
    }
  } else if (e.state == DirState::Shared) {
    for (std::uint64_t bits = e.sharers; bits; bits &= bits - 1) {
      const auto c = static_cast<CoreId>(std::countr_zero(bits));
      if (c >= config_.n_cores) {
        report("structure", dir + " names a core that does not exist");
        continue;
      }
      if (!in(states[c], {LineState::S, LineState::SI_A, LineState::IS_D, LineState::SM_D})) {
        report("mirror", dir + " but core " + std::to_string(c) + " is in " +
                             std::string(to_string(states[c])));
      }
    }
  }
  return out;
}

std::vector<Violation> System::check_global_invariants() const {
  std::set<Addr> lines;
  for (const L1Controller& l1 : l1s_) {
    l1.array().for_each_valid([&](Addr a, const CacheLine&, auto) { lines.insert(a); });
    const MshrEntry& e = l1.mshr().entry();
    if (e.valid) {
      lines.insert(e.line_addr);
      if (e.victim) lines.insert(e.victim->line_addr);
    }
  }
  for (const auto& [a, entry] : ic_->directory().entries()) lines.insert(a);

  std::vector<Violation> out;
  for (const L1Controller& l1 : l1s_) {
    l1.array().for_each_valid([&](Addr a, const CacheLine& l, auto) {
      if (l.dirty && l.state != LineState::M) {
        out.push_back({"structure", a, ctx_.now,
                       "core " + std::to_string(l1.id()) + " holds a dirty line in " +
                           std::string(to_string(l.state))});
      }
    });
  }
  for (const std::string& p : ic_->directory().check_entries()) {
    out.push_back({"structure", 0, ctx_.now, p});
  }
  for (Addr a : lines) {
    auto v = check_line(a, true);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

StatsBundle System::collect_stats() const {
  StatsBundle s;
  s.cycles = ctx_.now;
  s.cores = ctx_.cores;
  for (std::uint32_t b = 0; b < mem_.bank_count(); ++b) {
    const L2BankStats& bs = mem_.bank_stats(b);
    s.l2_hits += bs.hits;
    s.l2_misses += bs.misses;
    s.l2_writebacks += bs.writebacks;
  }
  s.mem_reads = mem_.memory().reads();
  s.mem_writes = mem_.memory().writes();
  s.snoops = ctx_.snoops;
  s.channel_busy = ctx_.channel_busy;
  s.dir_high_water = ic_->directory().high_water();
  return s;
}

std::uint64_t System::state_hash() const {
  Fnv h;
  h.add(ctx_.now);
  for (const L1Controller& l1 : l1s_) {
    l1.array().for_each_valid([&](Addr a, const CacheLine& l, std::span<const std::uint8_t> d) {
      h.add(a);
      h.add(static_cast<std::uint64_t>(l.state) | (std::uint64_t{l.dirty} << 8) |
            (std::uint64_t{l.lru_rank} << 16));
      h.add(d);
    });
    const MshrEntry& e = l1.mshr().entry();
    h.add(e.valid);
    if (e.valid) {
      h.add(e.line_addr);
      h.add(static_cast<std::uint64_t>(e.transient));
      if (e.victim) {
        h.add(e.victim->line_addr);
        h.add(static_cast<std::uint64_t>(e.victim->state));
      }
    }
  }
  for (const auto& [a, entry] : ic_->directory().entries()) {
    h.add(a);
    h.add(static_cast<std::uint64_t>(entry.state));
    h.add(entry.sharers);
    h.add(entry.owner);
  }
  h.add(static_cast<std::uint64_t>(ic_->read_state()));
  h.add(static_cast<std::uint64_t>(ic_->wb_state()));
  h.add(ic_->fifo_enqueued());
  h.add(ic_->fifo_dequeued());
  return h.value();
}

std::vector<std::uint8_t> System::coherent_line(Addr line_addr) const {
  for (const L1Controller& l1 : l1s_) {
    if (l1.array().state(line_addr) == LineState::M) {
      auto d = l1.array().line_data(line_addr);
      return {d.begin(), d.end()};
    }
    const MshrEntry& e = l1.mshr().entry();
    if (e.valid && e.victim && e.victim->line_addr == line_addr &&
        e.victim->state == LineState::MI_A && !e.victim->data.empty()) {
      return e.victim->data;
    }
  }
  return mem_.peek_line(line_addr);
}

void System::flush_to_memory() {
  mem_.flush();
  for (const L1Controller& l1 : l1s_) {
    l1.array().for_each_valid([&](Addr a, const CacheLine& l, std::span<const std::uint8_t> d) {
      if (l.state == LineState::M && l.dirty) mem_.memory().poke_line(a, d);
    });
  }
}

}  // namespace cforge

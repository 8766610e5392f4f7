#include "cforge/harness.hpp"

#include <algorithm>
#include <cstring>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

void OracleMemory::write(Addr addr, std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes_[addr + i] = bytes[i];
}

std::uint8_t OracleMemory::byte(Addr addr) const {
  auto it = bytes_.find(addr);
  return it == bytes_.end() ? 0 : it->second;
}

std::array<std::uint8_t, 8> OracleMemory::read(Addr addr, std::size_t len) const {
  std::array<std::uint8_t, 8> out{};
  for (std::size_t i = 0; i < len && i < out.size(); ++i) out[i] = byte(addr + i);
  return out;
}

namespace {

std::string hex_bytes(const std::array<std::uint8_t, 8>& b, std::size_t n) {
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (std::size_t i = 0; i < n; ++i) os << std::setw(2) << static_cast<unsigned>(b[i]);
  return os.str();
}

}  // namespace

std::string failure_line(const ScoreEntry& e) {
  std::ostringstream os;
  os << e.ack_cycle << ',' << e.core << ',' << to_string(e.request.op) << ",0x" << std::hex
     << e.request.addr << std::dec << ',' << hex_bytes(e.expected, e.request.size) << ','
     << hex_bytes(e.got, e.request.size);
  return os.str();
}

std::uint64_t Scoreboard::open(CoreId core, const CpuRequest& request, Cycle gap) {
  ScoreEntry e;
  e.id = entries_.size();
  e.core = core;
  e.request = request;
  e.gap = gap;
  entries_.push_back(e);
  return e.id;
}

void Scoreboard::close(std::uint64_t id, bool pass) {
  ScoreEntry& e = entries_.at(id);
  if (e.closed()) throw StateViolation("scoreboard entry " + std::to_string(id) + " closed twice");
  e.status = pass ? EntryStatus::Pass : EntryStatus::Mismatch;
  ++closed_;
  if (!pass) ++mismatches_;
}

std::string Scoreboard::failure_dump() const {
  std::string out = "cycle,core,op,addr,expected_hex,got_hex\n";
  for (const ScoreEntry& e : entries_) {
    if (e.status == EntryStatus::Mismatch) out += failure_line(e) + '\n';
  }
  return out;
}

Harness::Harness(System& system, HarnessOptions options)
    : sys_(&system),
      opts_(options),
      queues_(system.cores()),
      inflight_(system.cores()),
      last_ack_(system.cores(), 0),
      bound_(system.config().liveness_bound()) {}

std::uint64_t Harness::submit(CoreId core, const CpuRequest& r, Cycle gap) {
  const SystemConfig& cfg = sys_->config();
  if (core >= cfg.n_cores) {
    throw MalformedRequest("core " + std::to_string(core) + " does not exist");
  }
  if (r.size != 1 && r.size != 2 && r.size != 4 && r.size != 8) {
    throw MalformedRequest("size " + std::to_string(r.size) + " is not 1, 2, 4 or 8");
  }
  if (r.addr % cfg.l1.line_bytes + r.size > cfg.l1.line_bytes) {
    throw MalformedRequest("request crosses a line boundary");
  }
  if (r.addr + r.size > cfg.memory_bytes) throw MalformedRequest("address outside memory");
  const std::uint64_t id = board_.open(core, r, gap);
  queues_[core].push_back(id);
  return id;
}

bool Harness::core_busy(CoreId core) const {
  return !queues_[core].empty() || sys_->l1(core).busy();
}

bool Harness::pending() const {
  return std::any_of(queues_.begin(), queues_.end(), [](const auto& q) { return !q.empty(); });
}

void Harness::scan_acks() {
  const Cycle now = sys_->cycle();
  for (CoreId c = 0; c < sys_->cores(); ++c) {
    CpuPort& port = sys_->cpu(c);
    if (!port.ack) continue;
    if (!inflight_[c]) throw StateViolation("ack on core " + std::to_string(c) + " with no request");
    ScoreEntry& e = board_.at(*inflight_[c]);
    e.ack_cycle = now;
    e.got = port.data;
    bool pass = true;
    const std::size_t n = e.request.size;
    if (e.request.op == MemOp::Store) {
      oracle_.write(e.request.addr, std::span(e.request.data.data(), n));
      e.expected = e.request.data;
    } else {
      e.expected = oracle_.read(e.request.addr, n);
      pass = std::equal(e.expected.begin(), e.expected.begin() + n, e.got.begin());
    }
    board_.close(e.id, pass);
    done_.push_back({e.id, c, e.request, e.got, e.latency(), pass});
    port.reset();
    inflight_[c].reset();
    last_ack_[c] = now;
    queues_[c].pop_front();
    if (!pass && opts_.stop_on_mismatch) {
      throw ScoreboardMismatch("seed=" + std::to_string(sys_->config().seed) +
                               " data mismatch\ncycle,core,op,addr,expected_hex,got_hex\n" +
                               failure_line(e));
    }
  }
}

void Harness::issue() {
  const Cycle now = sys_->cycle();
  for (CoreId c = 0; c < sys_->cores(); ++c) {
    if (inflight_[c] || queues_[c].empty() || sys_->l1(c).busy()) continue;
    ScoreEntry& e = board_.at(queues_[c].front());
    if (now < last_ack_[c] + e.gap) continue;
    sys_->cpu(c).drive(e.request);
    e.issue_cycle = now;
    e.status = EntryStatus::Issued;
    inflight_[c] = e.id;
  }
}

void Harness::check_liveness() const {
  const Cycle now = sys_->cycle();
  for (CoreId c = 0; c < sys_->cores(); ++c) {
    if (!inflight_[c]) continue;
    const ScoreEntry& e = board_.at(*inflight_[c]);
    if (now - e.issue_cycle > bound_) {
      std::ostringstream os;
      os << "seed=" << sys_->config().seed << " cycle=" << now << " addr=0x" << std::hex
         << e.request.addr << std::dec << ": request " << e.id << " on core " << c
         << " outstanding for more than " << bound_ << " cycles";
      throw LivenessViolation(os.str());
    }
  }
}

Cycle Harness::next_ready_cycle() const {
  Cycle next = std::numeric_limits<Cycle>::max();
  for (CoreId c = 0; c < sys_->cores(); ++c) {
    if (queues_[c].empty() || inflight_[c]) continue;
    next = std::min(next, last_ack_[c] + board_.at(queues_[c].front()).gap);
  }
  return next;
}

bool Harness::fast_forward_eligible() const {
  for (CoreId c = 0; c < sys_->cores(); ++c) {
    if (inflight_[c] || sys_->cpu(c).ack || sys_->cpu(c).request) return false;
  }
  if (next_ready_cycle() <= sys_->cycle()) return false;
  return sys_->quiescent();
}

const std::vector<Completion>& Harness::cycle() {
  done_.clear();
  scan_acks();
  issue();
  check_liveness();
  if (opts_.fast_forward && fast_forward_eligible()) {
    const Cycle next = next_ready_cycle();
    const Cycle now = sys_->cycle();
    const Cycle n = next == std::numeric_limits<Cycle>::max() ? 1 : next - now;
    sys_->advance_idle(n);
    skipped_ += n;
  } else {
    sys_->tick();
  }
  return done_;
}

void Harness::run_to_drain() {
  while (pending() || !sys_->quiescent()) cycle();
}

std::vector<Addr> Harness::final_memory_mismatches() const {
  const std::uint64_t line_bytes = sys_->config().l1.line_bytes;
  std::map<Addr, std::vector<std::pair<Addr, std::uint8_t>>> by_line;
  for (const auto& [addr, value] : oracle_.bytes()) {
    by_line[addr - addr % line_bytes].emplace_back(addr, value);
  }
  std::vector<Addr> bad;
  for (const auto& [line, bytes] : by_line) {
    const auto data = sys_->coherent_line(line);
    for (const auto& [addr, value] : bytes) {
      if (data[addr - line] != value) bad.push_back(addr);
    }
  }
  std::sort(bad.begin(), bad.end());
  return bad;
}

}  // namespace cforge

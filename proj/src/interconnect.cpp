#include "cforge/interconnect.hpp"

#include <bit>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

std::string_view to_string(WbState s) {
  switch (s) {
    case WbState::Idle: return "Idle";
    case WbState::CollectBeats: return "CollectBeats";
    case WbState::UpdateDir: return "UpdateDir";
    case WbState::WriteMem: return "WriteMem";
    case WbState::Ack: return "Ack";
  }
  return "?";
}

std::string_view to_string(ReadState s) {
  switch (s) {
    case ReadState::Idle: return "Idle";
    case ReadState::DirLookup: return "DirLookup";
    case ReadState::Snooping: return "Snooping";
    case ReadState::MemRead: return "MemRead";
    case ReadState::SendData: return "SendData";
    case ReadState::MemWrite: return "MemWrite";
  }
  return "?";
}

namespace {

std::string hex(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

bool carries_line(Opcode op) { return op == Opcode::WriteBack || op == Opcode::SnoopRespData; }

}  // namespace

template <class Outbox, class Route>
void ChannelPath::step(std::uint32_t n_cores, Outbox outbox, Route route, SimContext& ctx) {
  if (locked_) {
    Fifo<BusMessage>& src = outbox(*locked_);
    if (src.empty()) return;
    Fifo<BusMessage>& dst = route(src.front());
    if (!dst.can_push()) return;
    const BusMessage m = src.pop();
    dst.push(m);
    ctx.delivered(m);
    if (--remaining_ == 0) locked_.reset();
    return;
  }
  std::uint64_t mask = 0;
  for (std::uint32_t i = 0; i < n_cores; ++i) {
    Fifo<BusMessage>& src = outbox(i);
    if (!src.empty() && route(src.front()).can_push()) mask |= std::uint64_t{1} << i;
  }
  const auto grant = rr_.arbitrate(mask);
  if (!grant) return;
  const BusMessage m = outbox(*grant).pop();
  route(m).push(m);
  ctx.delivered(m);
  if (carries_line(m.opcode)) {
    locked_ = *grant;
    remaining_ = beats_;
  }
}

Interconnect::Interconnect(const SystemConfig& config, const ProtocolTables& tables,
                           std::vector<L1Port>& ports, MemSide& memside, SimContext& ctx)
    : tables_(&tables),
      ports_(&ports),
      mem_(&memside),
      ctx_(&ctx),
      n_cores_(config.n_cores),
      beats_(config.beats_per_line()),
      line_bytes_(config.l1.line_bytes),
      bus_width_(config.bus_width_bits),
      aw_(config.effective_fifo_depth()),
      w_(config.effective_fifo_depth()),
      ar_(config.effective_fifo_depth()),
      cr_(config.effective_fifo_depth()),
      cd_(config.effective_fifo_depth()),
      aw_path_(config.n_cores, config.beats_per_line()),
      ar_path_(config.n_cores, config.beats_per_line()),
      cr_path_(config.n_cores, config.beats_per_line()) {}

std::optional<Addr> Interconnect::read_line_held() const {
  if (read_.state == ReadState::Idle || read_.state == ReadState::DirLookup) return std::nullopt;
  return read_.header.line_addr;
}

std::optional<Addr> Interconnect::wb_line_held() const {
  if (wb_.state == WbState::WriteMem || wb_.state == WbState::Ack) return wb_.header.line_addr;
  return std::nullopt;
}

bool Interconnect::idle() const {
  return wb_.state == WbState::Idle && read_.state == ReadState::Idle && aw_.idle() && w_.idle() &&
         ar_.idle() && cr_.idle() && cd_.idle() && !aw_path_.locked() && !cr_path_.locked() &&
         memory_free();
}

std::uint64_t Interconnect::fifo_enqueued() const {
  return aw_.enqueued() + w_.enqueued() + ar_.enqueued() + cr_.enqueued() + cd_.enqueued();
}

std::uint64_t Interconnect::fifo_dequeued() const {
  return aw_.dequeued() + w_.dequeued() + ar_.dequeued() + cr_.dequeued() + cd_.dequeued();
}

std::uint64_t Interconnect::fifo_resident() const {
  return aw_.resident() + w_.resident() + ar_.resident() + cr_.resident() + cd_.resident();
}

void Interconnect::deliver(Fifo<BusMessage>& inbox, const BusMessage& m) {
  inbox.push(m);
  ctx_->delivered(m);
}

void Interconnect::move_channels() {
  auto& ports = *ports_;
  aw_path_.step(
      n_cores_, [&](std::uint32_t i) -> Fifo<BusMessage>& { return ports[i].aw_w; },
      [&](const BusMessage& m) -> Fifo<BusMessage>& { return m.channel == Channel::AW ? aw_ : w_; },
      *ctx_);
  ar_path_.step(
      n_cores_, [&](std::uint32_t i) -> Fifo<BusMessage>& { return ports[i].ar; },
      [&](const BusMessage&) -> Fifo<BusMessage>& { return ar_; }, *ctx_);
  cr_path_.step(
      n_cores_, [&](std::uint32_t i) -> Fifo<BusMessage>& { return ports[i].cr_cd; },
      [&](const BusMessage& m) -> Fifo<BusMessage>& { return m.channel == Channel::CR ? cr_ : cd_; },
      *ctx_);
}

void Interconnect::grant_ports() {
  wb_dir_grant_ = read_dir_grant_ = wb_mem_grant_ = read_mem_grant_ = false;

  const bool wb_dir = wb_.state == WbState::UpdateDir && read_line_held() != wb_.header.line_addr;
  const bool read_dir =
      read_.state == ReadState::DirLookup && wb_line_held() != read_.header.line_addr;
  if (auto g = dir_arb_.grant(wb_dir, read_dir)) {
    (*g == PortClient::WriteBackFsm ? wb_dir_grant_ : read_dir_grant_) = true;
  }

  if (!memory_free()) return;
  const bool wb_mem = wb_.state == WbState::WriteMem && !wb_.mem_issued;
  const bool read_mem =
      (read_.state == ReadState::MemRead || read_.state == ReadState::MemWrite) &&
      !read_.mem_issued;
  if (auto g = mem_arb_.grant(wb_mem, read_mem)) {
    (*g == PortClient::WriteBackFsm ? wb_mem_grant_ : read_mem_grant_) = true;
  }
}

void Interconnect::step_wb() {
  WbTxn& t = wb_;
  switch (t.state) {
    case WbState::Idle:
      if (aw_.empty()) return;
      t = WbTxn{};
      t.header = aw_.pop();
      t.state = t.header.opcode == Opcode::WriteBack ? WbState::CollectBeats : WbState::UpdateDir;
      return;
    case WbState::CollectBeats: {
      if (w_.empty()) return;
      const BusMessage m = w_.pop();
      if (m.source != t.header.source || m.line_addr != t.header.line_addr) {
        throw ProtocolViolation("W beat from core " + std::to_string(m.source) +
                                " interleaved with a write-back from core " +
                                std::to_string(t.header.source));
      }
      t.beats.push_back(m.payload);
      if (t.beats.size() == beats_) {
        t.data = deserialize_beats(t.beats, line_bytes_, bus_width_);
        t.state = WbState::UpdateDir;
      }
      return;
    }
    case WbState::UpdateDir: {
      if (!wb_dir_grant_) return;
      const DirRequest req =
          t.header.opcode == Opcode::WriteBack ? DirRequest::WriteBack : DirRequest::Evict;
      const Addr line = t.header.line_addr;
      const DirOutcome out =
          dir_transition(tables_->dir, dir_.lookup(line), req, t.header.source, &ctx_->coverage);
      dir_.update(line, out.next);
      ctx_->touch(line);
      const bool write = out.has(DirAction::WriteMemory) && req == DirRequest::WriteBack;
      t.state = write ? WbState::WriteMem : WbState::Ack;
      return;
    }
    case WbState::WriteMem:
      if (!t.mem_issued) {
        if (!wb_mem_grant_) return;
        t.wait_until = ctx_->now + mem_->write_line(t.header.line_addr, t.data);
        mem_busy_until_ = t.wait_until;
        t.mem_issued = true;
        return;
      }
      if (ctx_->now >= t.wait_until) t.state = WbState::Ack;
      return;
    case WbState::Ack:
      deliver((*ports_)[t.header.source].b,
              {Channel::B, Opcode::Ack, t.header.line_addr, t.header.source, 0, 0});
      t.state = WbState::Idle;
      return;
  }
}

void Interconnect::finish_snoops() {
  ReadTxn& t = read_;
  if (t.supplier) {
    t.data = deserialize_beats(t.snoop_beats, line_bytes_, bus_width_);
    t.has_data = true;
  }
  const bool reply = t.outcome.has(DirAction::ReplyData);
  if (reply && t.role != RequesterRole::Sharer && !t.has_data) {
    t.state = ReadState::MemRead;
  } else if (reply) {
    t.state = ReadState::SendData;
  } else {
    after_data();
  }
}

void Interconnect::after_data() {
  ReadTxn& t = read_;
  if (t.outcome.has(DirAction::WriteMemory) && t.supplier) {
    t.state = ReadState::MemWrite;
    t.mem_issued = false;
  } else {
    t.state = ReadState::Idle;
    ctx_->touch(t.header.line_addr);
  }
}

void Interconnect::step_read() {
  ReadTxn& t = read_;
  const Addr line = t.header.line_addr;
  switch (t.state) {
    case ReadState::Idle:
      if (ar_.empty()) return;
      t = ReadTxn{};
      t.header = ar_.pop();
      t.state = ReadState::DirLookup;
      return;
    case ReadState::DirLookup: {
      if (!read_dir_grant_) return;
      const DirRequest req =
          t.header.opcode == Opcode::ReadClean ? DirRequest::ReadClean : DirRequest::ReadUnique;
      const DirectoryEntry entry = dir_.lookup(line);
      t.role = role_of(entry, t.header.source);
      t.outcome = dir_transition(tables_->dir, entry, req, t.header.source, &ctx_->coverage);
      dir_.update(line, t.outcome.next);
      ctx_->touch(line);
      const Opcode snoop =
          req == DirRequest::ReadClean ? Opcode::SnoopReadClean : Opcode::SnoopReadUnique;
      for (std::uint64_t m = t.outcome.snoop_targets; m; m &= m - 1) {
        const auto core = static_cast<CoreId>(std::countr_zero(m));
        deliver((*ports_)[core].ac, {Channel::AC, snoop, line, core, 0, 0});
        ++ctx_->snoops;
      }
      t.awaiting = t.outcome.snoop_targets;
      t.state = ReadState::Snooping;
      if (t.awaiting == 0) finish_snoops();
      return;
    }
    case ReadState::Snooping:
      if (!cr_.empty()) {
        const BusMessage m = cr_.pop();
        const std::uint64_t bit = std::uint64_t{1} << m.source;
        if (!(t.awaiting & bit) || m.line_addr != line) {
          throw ProtocolViolation("unexpected snoop response from core " +
                                  std::to_string(m.source) + " for " + hex(m.line_addr));
        }
        t.awaiting &= ~bit;
        if (m.opcode == Opcode::SnoopRespData) {
          if (t.supplier) throw ProtocolViolation("two cores supplied data for " + hex(line));
          t.supplier = m.source;
        }
      }
      if (t.supplier && !cd_.empty() && cd_.front().source == *t.supplier &&
          t.snoop_beats.size() < beats_) {
        t.snoop_beats.push_back(cd_.pop().payload);
      }
      if (t.awaiting == 0 && (!t.supplier || t.snoop_beats.size() == beats_)) finish_snoops();
      return;
    case ReadState::MemRead:
      if (!t.mem_issued) {
        if (!read_mem_grant_) return;
        LineRead r = mem_->read_line(line);
        t.data = std::move(r.data);
        t.has_data = true;
        t.wait_until = ctx_->now + r.latency;
        mem_busy_until_ = t.wait_until;
        t.mem_issued = true;
        return;
      }
      if (ctx_->now >= t.wait_until) t.state = ReadState::SendData;
      return;
    case ReadState::SendData: {
      Fifo<BusMessage>& r = (*ports_)[t.header.source].r;
      if (t.role == RequesterRole::Sharer) {
        deliver(r, {Channel::R, Opcode::Ack, line, t.header.source, 0, 0});
        after_data();
        return;
      }
      if (t.next_beat == 0) t.snoop_beats = serialize_line(t.data, bus_width_);
      deliver(r, {Channel::R, Opcode::DataBeat, line, t.header.source, t.next_beat,
                  t.snoop_beats[t.next_beat]});
      if (++t.next_beat == beats_) after_data();
      return;
    }
    case ReadState::MemWrite:
      if (!t.mem_issued) {
        if (!read_mem_grant_) return;
        t.wait_until = ctx_->now + mem_->write_line(line, t.data);
        mem_busy_until_ = t.wait_until;
        t.mem_issued = true;
        return;
      }
      if (ctx_->now >= t.wait_until) {
        t.state = ReadState::Idle;
        ctx_->touch(line);
      }
      return;
  }
}

void Interconnect::tick() {
  move_channels();
  grant_ports();
  step_wb();
  step_read();
}

void Interconnect::commit() {
  aw_.commit();
  w_.commit();
  ar_.commit();
  cr_.commit();
  cd_.commit();
}

}  // namespace cforge

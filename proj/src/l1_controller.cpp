#include "cforge/l1_controller.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

ProtocolEvent cpu_event(MemOp op) {
  return op == MemOp::Load ? ProtocolEvent::Load : ProtocolEvent::Store;
}

std::string hex(Addr a) {
  std::ostringstream os;
  os << "0x" << std::hex << a;
  return os.str();
}

}  // namespace

L1Controller::L1Controller(CoreId id, const SystemConfig& config, const ProtocolTables& tables,
                           L1Port& port, CpuPort& cpu, SimContext& ctx)
    : id_(id),
      tables_(&tables),
      port_(&port),
      cpu_(&cpu),
      ctx_(&ctx),
      bus_width_(config.bus_width_bits),
      beats_(config.beats_per_line()),
      array_(config.l1) {}

bool L1Controller::quiescent() const {
  return !mshr_.busy() && !cpu_->request && port_->idle() && rbuf_.empty();
}

LineState L1Controller::line_state(Addr line) const {
  const MshrEntry& e = mshr_.entry();
  if (e.valid) {
    if (e.victim && e.victim->line_addr == line) return e.victim->state;
    if (e.line_addr == line && e.transient != LineState::I) return e.transient;
  }
  return array_.state(line);
}

L1Controller::LineCtx L1Controller::load(Addr line) const {
  LineCtx c;
  c.line = line;
  const MshrEntry& e = mshr_.entry();
  if (e.valid && e.victim && e.victim->line_addr == line) {
    c.state = e.victim->state;
    c.where = Where::Victim;
    c.data = e.victim->data;
    c.has_data = !c.data.empty();
    return c;
  }
  if (auto hit = array_.lookup(line)) {
    c.state = hit->state;
    c.where = Where::Array;
    auto bytes = array_.line_data(line);
    c.data.assign(bytes.begin(), bytes.end());
    c.has_data = true;
    c.dirty = array_.is_dirty(line);
  }
  if (e.valid && e.line_addr == line && e.transient != LineState::I) c.state = e.transient;
  return c;
}

void L1Controller::send_line(Fifo<BusMessage>& out, Channel ch, Opcode header_op, Channel beat_ch,
                             const LineCtx& c) {
  out.push({ch, header_op, c.line, id_, 0, 0});
  if (!c.has_data) throw StateViolation("core " + std::to_string(id_) + " has no data for " + hex(c.line));
  const auto beats = serialize_line(c.data, bus_width_);
  for (std::uint32_t i = 0; i < beats.size(); ++i) {
    out.push({beat_ch, Opcode::DataBeat, c.line, id_, i, beats[i]});
  }
}

void L1Controller::run(LineCtx c, ProtocolEvent event, const std::vector<std::uint8_t>* incoming) {
  const L1Row& row = l1_transition(tables_->l1, c.state, event, &ctx_->coverage);
  if (incoming) {
    c.data = *incoming;
    c.has_data = true;
    c.dirty = false;
  }
  const bool snoop =
      event == ProtocolEvent::SnoopReadClean || event == ProtocolEvent::SnoopReadUnique;
  bool supplied = false;
  bool replied = false;

  for (Action a : row.actions) {
    switch (a) {
      case Action::IssueReadClean:
        port_->ar.push({Channel::AR, Opcode::ReadClean, c.line, id_, 0, 0});
        break;
      case Action::IssueReadUnique:
        port_->ar.push({Channel::AR, Opcode::ReadUnique, c.line, id_, 0, 0});
        break;
      case Action::IssueWriteBack:
        send_line(port_->aw_w, Channel::AW, Opcode::WriteBack, Channel::W, c);
        break;
      case Action::IssueEvict:
        port_->aw_w.push({Channel::AW, Opcode::Evict, c.line, id_, 0, 0});
        break;
      case Action::SupplyData:
        send_line(port_->cr_cd, Channel::CR, Opcode::SnoopRespData, Channel::CD, c);
        supplied = true;
        break;
      case Action::InvalidateSelf:
        c.has_data = false;
        c.dirty = false;
        break;
      case Action::WriteData:
        if (active_ && active_->op == MemOp::Store) {
          if (!c.has_data) throw StateViolation("store into a line without data at " + hex(c.line));
          const std::size_t off = active_->addr - c.line;
          std::memcpy(c.data.data() + off, active_->data.data(), active_->size);
          c.dirty = true;
        }
        break;
      case Action::ReplyCpu:
        reply_cpu(c);
        replied = true;
        break;
      case Action::Stall:
        break;
    }
  }
  if (snoop && !supplied) port_->cr_cd.push({Channel::CR, Opcode::SnoopRespAck, c.line, id_, 0, 0});

  commit(c, row.next);
  ctx_->touch(c.line);

  if (replied && mshr_.busy() && mshr_.entry().line_addr == c.line) mshr_.complete();
}

void L1Controller::commit(const LineCtx& c, LineState next) {
  MshrEntry& e = mshr_.entry();
  switch (next) {
    case LineState::I:
      if (c.where == Where::Array) array_.invalidate(c.line);
      if (c.where == Where::Victim) e.victim.reset();
      break;
    case LineState::S:
    case LineState::M: {
      if (c.where == Where::Victim) {
        throw StateViolation("pending victim " + hex(c.line) + " cannot become stable valid");
      }
      if (!c.has_data) throw StateViolation("valid state without data at " + hex(c.line));
      const bool dirty = c.dirty && next == LineState::M;
      if (c.where == Where::Array) {
        array_.store_line(c.line, c.data, next, dirty);
      } else {
        if (array_.fill(c.line, c.data, next)) {
          throw StateViolation("fill of " + hex(c.line) + " displaced a line without eviction");
        }
        if (dirty) array_.store_line(c.line, c.data, next, true);
      }
      break;
    }
    case LineState::IS_D:
    case LineState::IM_D:
    case LineState::SM_D:
      e.transient = next;
      if (c.where == Where::Array && !c.has_data) array_.invalidate(c.line);
      break;
    case LineState::MI_A:
    case LineState::SI_A:
      if (c.where == Where::Victim) {
        e.victim->state = next;
        if (!c.has_data) e.victim->data.clear();
      } else {
        e.victim = PendingVictim{c.line, next, c.has_data ? c.data : std::vector<std::uint8_t>{}};
        if (c.where == Where::Array) array_.invalidate(c.line);
      }
      break;
  }
}

void L1Controller::reply_cpu(const LineCtx& c) {
  if (!active_) throw StateViolation("core " + std::to_string(id_) + " replied with no request");
  const CpuRequest& req = *active_;
  cpu_->ack = true;
  cpu_->data.fill(0);
  if (req.op == MemOp::Load) {
    if (!c.has_data) throw StateViolation("load reply without data at " + hex(c.line));
    const std::size_t off = req.addr - c.line;
    std::memcpy(cpu_->data.data(), c.data.data() + off, req.size);
  }
  ctx_->cores[id_].record(req.op, ctx_->now + 1 - accept_cycle_, active_hit_);
  if (c.where == Where::Array) array_.touch(c.line);
  active_.reset();
}

void L1Controller::accept() {
  cpu_->taken = true;
  const CpuRequest req = *cpu_->request;
  active_ = req;
  accept_cycle_ = ctx_->now;
  active_hit_ = true;

  const Addr line = array_.geometry().line_addr(req.addr);
  const ProtocolEvent event = cpu_event(req.op);
  const LineState state = array_.state(line);

  if (state == LineState::I) {
    active_hit_ = false;
    mshr_.allocate(line, req);
    if (auto victim = array_.peek_victim(line)) {
      run(load(victim->line_addr), ProtocolEvent::Evict);
    } else {
      issue_pending();
    }
    return;
  }
  const L1Row* row = tables_->l1.find(state, event);
  if (row && !is_stable(row->next)) {
    active_hit_ = false;
    mshr_.allocate(line, req);
  }
  run(load(line), event);
}

void L1Controller::issue_pending() {
  const MshrEntry& e = mshr_.entry();
  run(load(e.line_addr), cpu_event(e.request.op));
}

void L1Controller::on_r(const BusMessage& m) {
  if (!mshr_.busy() || mshr_.entry().line_addr != m.line_addr) {
    throw StateViolation("core " + std::to_string(id_) + " got an unexpected R for " +
                         hex(m.line_addr));
  }
  if (m.opcode == Opcode::Ack) {
    run(load(m.line_addr), ProtocolEvent::InvAck);
    return;
  }
  rbuf_.push_back(m.payload);
  if (rbuf_.size() == beats_) {
    const auto data = deserialize_beats(rbuf_, array_.geometry().line_bytes, bus_width_);
    rbuf_.clear();
    run(load(m.line_addr), ProtocolEvent::DataResp, &data);
  }
}

void L1Controller::on_b(const BusMessage& m) {
  run(load(m.line_addr), ProtocolEvent::WriteBackAck);
  const MshrEntry& e = mshr_.entry();
  if (e.valid && !e.victim && e.transient == LineState::I) issue_pending();
}

void L1Controller::on_snoop(const BusMessage& m) {
  ++ctx_->cores[id_].snoops_received;
  const ProtocolEvent event = m.opcode == Opcode::SnoopReadClean ? ProtocolEvent::SnoopReadClean
                                                                 : ProtocolEvent::SnoopReadUnique;
  run(load(m.line_addr), event);
}

void L1Controller::tick() {
  while (!port_->r.empty()) on_r(port_->r.pop());
  while (!port_->b.empty()) on_b(port_->b.pop());
  if (!port_->ac.empty()) on_snoop(port_->ac.pop());
  if (cpu_->request && !cpu_->taken && !mshr_.busy()) accept();
}

}  // namespace cforge

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cforge/bus.hpp"
#include "cforge/cache.hpp"
#include "cforge/config.hpp"
#include "cforge/context.hpp"
#include "cforge/protocol.hpp"

namespace cforge {

/// CPU-facing request/response signals of one core.
struct CpuPort {
  std::optional<CpuRequest> request;
  bool taken = false;  // sampled by the controller
  bool ack = false;
  std::array<std::uint8_t, 8> data{};

  void drive(const CpuRequest& req) {
    request = req;
    taken = false;
    ack = false;
  }
  void reset() { *this = CpuPort{}; }
};

/// Bus-side wiring of one L1 controller. Outboxes are drained by the
/// interconnect's channel arbiters; inboxes are filled by its FSMs.
struct L1Port {
  Fifo<BusMessage> aw_w;   // AW header followed by its W beats
  Fifo<BusMessage> ar;
  Fifo<BusMessage> cr_cd;  // CR response followed by its CD beats
  Fifo<BusMessage> r;
  Fifo<BusMessage> b;
  Fifo<BusMessage> ac;

  void commit() {
    aw_w.commit();
    ar.commit();
    cr_cd.commit();
    r.commit();
    b.commit();
    ac.commit();
  }
  bool idle() const {
    return aw_w.idle() && ar.idle() && cr_cd.idle() && r.idle() && b.idle() && ac.idle();
  }
};

/// Private L1 cache controller: a CPU FSM that turns loads/stores into
/// coherent requests, an AXI side that consumes R/B responses, and an ACE
/// side that answers snoops. All coherence decisions come from the L1 table.
class L1Controller {
 public:
  L1Controller(CoreId id, const SystemConfig& config, const ProtocolTables& tables, L1Port& port,
               CpuPort& cpu, SimContext& ctx);

  void tick();

  /// A request is outstanding (driven and not yet acknowledged) or a miss is pending.
  bool busy() const { return mshr_.busy() || cpu_->request.has_value(); }
  /// Nothing pending anywhere in this controller or its bus wiring.
  bool quiescent() const;

  /// Coherence state of a line as the rest of the system sees it.
  LineState line_state(Addr line_addr) const;

  CoreId id() const { return id_; }
  const CacheArray& array() const { return array_; }
  CacheArray& array() { return array_; }
  const Mshr& mshr() const { return mshr_; }

 private:
  enum class Where { None, Array, Victim };

  struct LineCtx {
    Addr line = 0;
    LineState state = LineState::I;
    Where where = Where::None;
    std::vector<std::uint8_t> data;
    bool has_data = false;
    bool dirty = false;
  };

  LineCtx load(Addr line) const;
  void run(LineCtx ctx, ProtocolEvent event, const std::vector<std::uint8_t>* incoming = nullptr);
  void commit(const LineCtx& ctx, LineState next);
  void accept();
  void issue_pending();
  void reply_cpu(const LineCtx& ctx);
  void send_line(Fifo<BusMessage>& out, Channel ch, Opcode header_op, Channel beat_ch,
                 const LineCtx& ctx);
  void on_r(const BusMessage& m);
  void on_b(const BusMessage& m);
  void on_snoop(const BusMessage& m);

  CoreId id_;
  const ProtocolTables* tables_;
  L1Port* port_;
  CpuPort* cpu_;
  SimContext* ctx_;
  unsigned bus_width_;
  std::uint32_t beats_;
  CacheArray array_;
  Mshr mshr_;
  std::optional<CpuRequest> active_;
  Cycle accept_cycle_ = 0;
  bool active_hit_ = false;
  std::vector<std::uint64_t> rbuf_;
};

}  // namespace cforge

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cforge/arbiter.hpp"
#include "cforge/bus.hpp"
#include "cforge/config.hpp"
#include "cforge/context.hpp"
#include "cforge/directory.hpp"
#include "cforge/l1_controller.hpp"
#include "cforge/memside.hpp"
#include "cforge/protocol.hpp"

namespace cforge {

enum class WbState : std::uint8_t { Idle, CollectBeats, UpdateDir, WriteMem, Ack };
enum class ReadState : std::uint8_t { Idle, DirLookup, Snooping, MemRead, SendData, MemWrite };

std::string_view to_string(WbState s);
std::string_view to_string(ReadState s);

/// Moves one message per cycle from the L1 outboxes into one interconnect
/// FIFO path. A data-bearing header locks the arbiter to its source until
/// every beat of the line has moved.
class ChannelPath {
 public:
  ChannelPath(std::uint32_t n_cores, std::uint32_t beats) : rr_(n_cores), beats_(beats) {}

  /// `outbox(i)` yields core i's outbox; `route(m)` the FIFO a message goes to.
  template <class Outbox, class Route>
  void step(std::uint32_t n_cores, Outbox outbox, Route route, SimContext& ctx);

  bool locked() const { return locked_.has_value(); }

 private:
  RoundRobinArbiter rr_;
  std::uint32_t beats_;
  std::optional<CoreId> locked_;
  std::uint32_t remaining_ = 0;
};

/// The coherent bus: channel arbiters, request-path FIFOs, full-map
/// directory, write-back FSM, read FSM, and the memory port shared by both.
/// The read FSM is the single serialization point for coherent reads.
class Interconnect {
 public:
  Interconnect(const SystemConfig& config, const ProtocolTables& tables, std::vector<L1Port>& ports,
               MemSide& memside, SimContext& ctx);

  /// Arbiters, then FSM steps; pushes land in staging until commit().
  void tick();
  void commit();

  /// No transaction, message, or memory access anywhere in the interconnect.
  bool idle() const;

  const Directory& directory() const { return dir_; }
  /// Line held by the read FSM from its directory update until it returns to Idle.
  std::optional<Addr> read_line_held() const;
  /// Line held by the write-back FSM from its directory update until its Ack.
  std::optional<Addr> wb_line_held() const;
  ReadState read_state() const { return read_.state; }
  WbState wb_state() const { return wb_.state; }
  std::uint64_t fifo_enqueued() const;
  std::uint64_t fifo_dequeued() const;
  std::uint64_t fifo_resident() const;

 private:
  struct WbTxn {
    WbState state = WbState::Idle;
    BusMessage header;
    std::vector<std::uint64_t> beats;
    std::vector<std::uint8_t> data;
    bool dir_done = false;
    Cycle wait_until = 0;
    bool mem_issued = false;
  };

  struct ReadTxn {
    ReadState state = ReadState::Idle;
    BusMessage header;
    DirOutcome outcome;
    RequesterRole role = RequesterRole::None;
    std::uint64_t awaiting = 0;  // snoop targets yet to answer on CR
    std::optional<CoreId> supplier;
    std::vector<std::uint64_t> snoop_beats;
    std::vector<std::uint8_t> data;
    bool has_data = false;
    bool dir_done = false;
    bool mem_issued = false;
    Cycle wait_until = 0;
    std::uint32_t next_beat = 0;
  };

  void move_channels();
  void grant_ports();
  void step_wb();
  void step_read();
  void finish_snoops();
  void after_data();
  void deliver(Fifo<BusMessage>& inbox, const BusMessage& m);
  bool memory_free() const { return ctx_->now >= mem_busy_until_; }

  const ProtocolTables* tables_;
  std::vector<L1Port>* ports_;
  MemSide* mem_;
  SimContext* ctx_;
  std::uint32_t n_cores_;
  std::uint32_t beats_;
  std::uint64_t line_bytes_;
  unsigned bus_width_;

  Fifo<BusMessage> aw_, w_, ar_, cr_, cd_;
  ChannelPath aw_path_, ar_path_, cr_path_;
  PortArbiter mem_arb_;
  PortArbiter dir_arb_;
  Directory dir_;
  Cycle mem_busy_until_ = 0;
  bool wb_mem_grant_ = false;
  bool read_mem_grant_ = false;
  bool wb_dir_grant_ = false;
  bool read_dir_grant_ = false;
  WbTxn wb_;
  ReadTxn read_;
};

}  // namespace cforge

#pragma once

#include <cstdint>
#include <deque>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "cforge/types.hpp"

namespace cforge {

enum class Channel : std::uint8_t { AW, W, B, AR, R, AC, CR, CD };
inline constexpr std::size_t kNumChannels = 8;

enum class Opcode : std::uint8_t {
  ReadClean,
  ReadUnique,
  WriteBack,
  Evict,
  DataBeat,
  Ack,
  SnoopReadClean,
  SnoopReadUnique,
  SnoopRespData,
  SnoopRespAck,
};

std::string_view to_string(Channel c);
std::string_view to_string(Opcode o);

struct BusMessage {
  Channel channel = Channel::AR;
  Opcode opcode = Opcode::ReadClean;
  Addr line_addr = 0;
  CoreId source = 0;
  std::uint32_t beat = 0;
  std::uint64_t payload = 0;  // one bus-width beat, low bits

  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

/// Beats needed to move one line; throws BeatCountMismatch if the width does not divide it.
std::uint32_t beats_per_line(std::uint64_t line_bytes, unsigned bus_width_bits);

/// Splits a line into bus-width beats, lowest address in beat 0, little-endian within a beat.
std::vector<std::uint64_t> serialize_line(std::span<const std::uint8_t> line,
                                          unsigned bus_width_bits);
/// Inverse of serialize_line; throws BeatCountMismatch on a short or long beat list.
std::vector<std::uint8_t> deserialize_beats(std::span<const std::uint64_t> beats,
                                            std::uint64_t line_bytes, unsigned bus_width_bits);

/// A queue with two-phase semantics: pushes land in a staging area and
/// become visible to consumers only after commit(), which the cycle engine
/// calls once per tick. depth == 0 means unbounded.
template <class T>
class Fifo {
 public:
  explicit Fifo(std::size_t depth = 0) : depth_(depth) {}

  std::size_t depth() const { return depth_; }
  bool can_push() const { return depth_ == 0 || items_.size() + staged_.size() < depth_; }

  /// Refused (returns false) when full.
  bool push(const T& item) {
    if (!can_push()) return false;
    staged_.push_back(item);
    ++enqueued_;
    return true;
  }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::size_t resident() const { return items_.size() + staged_.size(); }
  const T& front() const { return items_.front(); }
  T pop() {
    T item = std::move(items_.front());
    items_.pop_front();
    ++dequeued_;
    return item;
  }

  void commit() {
    while (!staged_.empty()) {
      items_.push_back(std::move(staged_.front()));
      staged_.pop_front();
    }
  }

  bool idle() const { return items_.empty() && staged_.empty(); }
  std::uint64_t enqueued() const { return enqueued_; }
  std::uint64_t dequeued() const { return dequeued_; }

  const std::deque<T>& items() const { return items_; }
  const std::deque<T>& staged() const { return staged_; }

 private:
  std::size_t depth_;
  std::deque<T> items_;
  std::deque<T> staged_;
  std::uint64_t enqueued_ = 0;
  std::uint64_t dequeued_ = 0;
};

/// `cycle,channel,opcode,addr,src,beat`
void write_trace_line(std::ostream& os, Cycle cycle, const BusMessage& m);

}  // namespace cforge

#include "cforge/bus.hpp"

#include "cforge/errors.hpp"

namespace cforge {

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::AW: return "AW";
    case Channel::W: return "W";
    case Channel::B: return "B";
    case Channel::AR: return "AR";
    case Channel::R: return "R";
    case Channel::AC: return "AC";
    case Channel::CR: return "CR";
    case Channel::CD: return "CD";
  }
  return "?";
}

std::string_view to_string(Opcode o) {
  switch (o) {
    case Opcode::ReadClean: return "ReadClean";
    case Opcode::ReadUnique: return "ReadUnique";
    case Opcode::WriteBack: return "WriteBack";
    case Opcode::Evict: return "Evict";
    case Opcode::DataBeat: return "DataBeat";
    case Opcode::Ack: return "Ack";
    case Opcode::SnoopReadClean: return "SnoopReadClean";
    case Opcode::SnoopReadUnique: return "SnoopReadUnique";
    case Opcode::SnoopRespData: return "SnoopRespData";
    case Opcode::SnoopRespAck: return "SnoopRespAck";
  }
  return "?";
}

std::uint32_t beats_per_line(std::uint64_t line_bytes, unsigned bus_width_bits) {
  if (bus_width_bits == 0 || bus_width_bits > 64 || bus_width_bits % 8 != 0 ||
      (line_bytes * 8) % bus_width_bits != 0) {
    throw BeatCountMismatch("bus width " + std::to_string(bus_width_bits) +
                            " does not evenly divide a " + std::to_string(line_bytes) +
                            "-byte line");
  }
  return static_cast<std::uint32_t>(line_bytes * 8 / bus_width_bits);
}

std::vector<std::uint64_t> serialize_line(std::span<const std::uint8_t> line,
                                          unsigned bus_width_bits) {
  const std::uint32_t beats = beats_per_line(line.size(), bus_width_bits);
  const std::size_t bytes_per_beat = bus_width_bits / 8;
  std::vector<std::uint64_t> out(beats, 0);
  for (std::uint32_t b = 0; b < beats; ++b) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes_per_beat; ++i) {
      v |= std::uint64_t{line[b * bytes_per_beat + i]} << (8 * i);
    }
    out[b] = v;
  }
  return out;
}

std::vector<std::uint8_t> deserialize_beats(std::span<const std::uint64_t> beats,
                                            std::uint64_t line_bytes, unsigned bus_width_bits) {
  const std::uint32_t expected = beats_per_line(line_bytes, bus_width_bits);
  if (beats.size() != expected) {
    throw BeatCountMismatch("expected " + std::to_string(expected) + " beats, got " +
                            std::to_string(beats.size()));
  }
  const std::size_t bytes_per_beat = bus_width_bits / 8;
  std::vector<std::uint8_t> out(line_bytes, 0);
  for (std::size_t b = 0; b < beats.size(); ++b) {
    for (std::size_t i = 0; i < bytes_per_beat; ++i) {
      out[b * bytes_per_beat + i] = static_cast<std::uint8_t>(beats[b] >> (8 * i));
    }
  }
  return out;
}

void write_trace_line(std::ostream& os, Cycle cycle, const BusMessage& m) {
  os << cycle << ',' << to_string(m.channel) << ',' << to_string(m.opcode) << ",0x" << std::hex
     << m.line_addr << std::dec << ',' << m.source << ',' << m.beat << '\n';
}

}  // namespace cforge

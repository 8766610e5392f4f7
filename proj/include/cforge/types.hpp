#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace cforge {

using Addr = std::uint64_t;
using CoreId = std::uint32_t;
using Cycle = std::uint64_t;

enum class MemOp : std::uint8_t { Load, Store };

std::string_view to_string(MemOp op);

/// A CPU-side memory request. Store payload is little-endian, `size` bytes.
struct CpuRequest {
  MemOp op = MemOp::Load;
  Addr addr = 0;
  std::uint8_t size = 1;
  std::array<std::uint8_t, 8> data{};

  friend bool operator==(const CpuRequest&, const CpuRequest&) = default;
};

constexpr bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr unsigned log2_exact(std::uint64_t v) {
  unsigned n = 0;
  while (v > 1) {
    v >>= 1;
    ++n;
  }
  return n;
}

}  // namespace cforge

#pragma once

#include <cstdint>
#include <optional>

namespace cforge {

/// Round-robin arbiter over up to 64 requesters. The search starts one past
/// the last grant, so a requester waits at most n-1 grants under contention.
class RoundRobinArbiter {
 public:
  explicit RoundRobinArbiter(std::uint32_t n_requesters);
  RoundRobinArbiter(std::uint32_t n_requesters, std::uint32_t last_grant);

  /// Bit i of `request_mask` set means requester i wants a grant.
  std::optional<std::uint32_t> arbitrate(std::uint64_t request_mask);

  std::uint32_t last_grant() const { return last_; }
  std::uint32_t size() const { return n_; }

 private:
  std::uint32_t n_;
  std::uint32_t last_;
};

/// Two-party arbiter for the memory and directory ports.
enum class PortClient : std::uint32_t { WriteBackFsm = 0, ReadFsm = 1 };

class PortArbiter {
 public:
  PortArbiter() : rr_(2, static_cast<std::uint32_t>(PortClient::ReadFsm)) {}

  std::optional<PortClient> grant(bool wb_requests, bool read_requests);
  PortClient last_grant() const { return static_cast<PortClient>(rr_.last_grant()); }
  void set_last(PortClient c) { rr_ = RoundRobinArbiter(2, static_cast<std::uint32_t>(c)); }

 private:
  RoundRobinArbiter rr_;
};

}  // namespace cforge

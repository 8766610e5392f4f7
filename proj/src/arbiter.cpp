#include "cforge/arbiter.hpp"

#include "cforge/errors.hpp"

namespace cforge {

RoundRobinArbiter::RoundRobinArbiter(std::uint32_t n_requesters)
    : RoundRobinArbiter(n_requesters, n_requesters == 0 ? 0 : n_requesters - 1) {}

RoundRobinArbiter::RoundRobinArbiter(std::uint32_t n_requesters, std::uint32_t last_grant)
    : n_(n_requesters), last_(last_grant) {
  if (n_ == 0 || n_ > 64) throw ConfigError("arbiter", "requester count must be in 1..64");
  if (last_ >= n_) throw ConfigError("arbiter", "last grant out of range");
}

std::optional<std::uint32_t> RoundRobinArbiter::arbitrate(std::uint64_t request_mask) {
  if (n_ < 64) request_mask &= (std::uint64_t{1} << n_) - 1;
  if (request_mask == 0) return std::nullopt;
  for (std::uint32_t step = 1; step <= n_; ++step) {
    const std::uint32_t candidate = (last_ + step) % n_;
    if (request_mask & (std::uint64_t{1} << candidate)) {
      last_ = candidate;
      return candidate;
    }
  }
  return std::nullopt;
}

std::optional<PortClient> PortArbiter::grant(bool wb_requests, bool read_requests) {
  std::uint64_t mask = 0;
  if (wb_requests) mask |= 1u << static_cast<std::uint32_t>(PortClient::WriteBackFsm);
  if (read_requests) mask |= 1u << static_cast<std::uint32_t>(PortClient::ReadFsm);
  if (auto g = rr_.arbitrate(mask)) return static_cast<PortClient>(*g);
  return std::nullopt;
}

}  // namespace cforge

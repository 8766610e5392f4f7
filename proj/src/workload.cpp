#include "cforge/workload.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "cforge/errors.hpp"
#include "cforge/system.hpp"
#include "cforge/tester.hpp"

namespace cforge {

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::PrivateStream: return "private_stream";
    case Pattern::SharedRead: return "shared_read";
    case Pattern::ProducerConsumer: return "producer_consumer";
    case Pattern::FalseSharing: return "false_sharing";
  }
  return "?";
}

Pattern parse_pattern(std::string_view name) {
  for (Pattern p : {Pattern::PrivateStream, Pattern::SharedRead, Pattern::ProducerConsumer,
                    Pattern::FalseSharing}) {
    if (name == to_string(p)) return p;
  }
  throw ConfigError("pattern", "unknown workload '" + std::string(name) + "'");
}

std::vector<std::vector<SynthOp>> generate(const SynthParams& p, std::uint32_t n_cores,
                                           std::uint64_t line_bytes) {
  if (p.working_set_bytes < line_bytes || p.working_set_bytes % line_bytes != 0) {
    throw ConfigError("working_set", "working set must be a whole number of lines");
  }
  const std::uint64_t lines = p.working_set_bytes / line_bytes;
  const std::uint64_t words = p.working_set_bytes / 8;
  const std::uint64_t slots = line_bytes / 8;
  std::vector<std::vector<SynthOp>> out(n_cores);
  for (CoreId c = 0; c < n_cores; ++c) {
    TesterRng rng(p.seed * 0x9e3779b97f4a7c15ULL + c);
    out[c].reserve(p.ops_per_core);
    for (std::uint64_t i = 0; i < p.ops_per_core; ++i) {
      SynthOp op;
      CpuRequest& r = op.request;
      r.size = 8;
      switch (p.pattern) {
        case Pattern::PrivateStream:
          r.addr = p.base + c * p.working_set_bytes + (i * 8) % p.working_set_bytes;
          r.op = i % 4 == 3 ? MemOp::Store : MemOp::Load;
          break;
        case Pattern::SharedRead:
          r.addr = p.base + 8 * rng.below(words);
          r.op = MemOp::Load;
          break;
        case Pattern::ProducerConsumer: {
          const Addr line = p.base + line_bytes * rng.below(lines);
          const bool produce = i % 2 == 0;
          const std::uint64_t slot = (produce ? c : c + 1) % std::min<std::uint64_t>(n_cores, slots);
          r.addr = line + 8 * slot;
          r.op = produce ? MemOp::Store : MemOp::Load;
          break;
        }
        case Pattern::FalseSharing:
          r.addr = p.base + line_bytes * rng.below(lines) + 8 * (c % slots);
          r.op = i % 2 == 0 ? MemOp::Store : MemOp::Load;
          break;
      }
      if (r.op == MemOp::Store) {
        const std::uint64_t v = rng.next();
        for (int k = 0; k < 8; ++k) r.data[k] = static_cast<std::uint8_t>(v >> (8 * k));
      }
      op.gap = p.think_cycles ? rng.below(p.think_cycles + 1) : 0;
      out[c].push_back(op);
    }
  }
  return out;
}

std::uint64_t memory_hash(const MainMemory& memory) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (Addr line : memory.touched_lines()) {
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(line >> (8 * i)));
    for (std::uint8_t b : memory.peek_line(line)) mix(b);
  }
  return h;
}

RunResult run_synth(const SystemConfig& config, const SynthParams& params, HarnessOptions options) {
  System sys = build_system(config);
  Harness h(sys, options);
  const auto streams = generate(params, config.n_cores, config.l1.line_bytes);
  // Interleave submissions so entry ids do not depend on stream lengths.
  for (std::uint64_t i = 0; i < params.ops_per_core; ++i) {
    for (CoreId c = 0; c < config.n_cores; ++c) h.submit(c, streams[c][i].request, streams[c][i].gap);
  }
  h.run_to_drain();

  RunResult out;
  out.stats = sys.collect_stats();
  out.mismatches = h.scoreboard().mismatches();
  for (const ScoreEntry& e : h.scoreboard().entries()) out.latencies.push_back(e.latency());
  out.memory_mismatches = h.final_memory_mismatches();
  out.skipped = h.skipped_cycles();
  sys.flush_to_memory();
  out.memory_hash = memory_hash(sys.memside().memory());
  return out;
}

}  // namespace cforge

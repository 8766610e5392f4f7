#include "cforge/tester.hpp"

#include <limits>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

std::uint64_t TesterRng::below(std::uint64_t n) {
  const std::uint64_t threshold = (std::numeric_limits<std::uint64_t>::max() - n + 1) % n;
  for (;;) {
    const std::uint64_t r = gen_();
    if (r >= threshold) return r % n;
  }
}

Verdict verify(const Check& check, const std::array<std::uint8_t, 4>& read) {
  Verdict v;
  v.got = read;
  for (int k = 0; k < 4; ++k) {
    v.expected[k] = static_cast<std::uint8_t>(check.expected + k);
    if (v.pass && v.expected[k] != read[k]) {
      v.pass = false;
      v.byte = k;
    }
  }
  return v;
}

Tester::Tester(std::uint64_t seed, std::size_t n_checks, Addr span_base, std::uint64_t span_bytes,
               Placement placement, CoreDraw draw)
    : rng_(seed), draw_(draw) {
  if (n_checks == 0) throw SpanTooSmall("a tester needs at least one check");
  const std::uint64_t line = placement.line_bytes;
  if (line < 16 || placement.line_stride < line || span_base % line != 0) {
    throw SpanTooSmall("placement needs line-aligned lines of at least 16 bytes");
  }
  const std::size_t packed = n_checks / 2;
  const std::size_t single = n_checks - packed;
  const std::uint64_t lines = (packed + 3) / 4 + single;
  if (span_bytes < (lines - 1) * placement.line_stride + line) {
    throw SpanTooSmall(std::to_string(n_checks) + " checks need " + std::to_string(lines) +
                       " lines at stride " + std::to_string(placement.line_stride));
  }
  const std::uint64_t slot_stride = line / 4;
  Addr next_line = span_base;
  for (std::size_t i = 0; i < packed; ++i) {
    if (i > 0 && i % 4 == 0) next_line += placement.line_stride;
    checks_.push_back(Check{.base = next_line + (i % 4) * slot_stride});
  }
  if (packed > 0) next_line += placement.line_stride;
  for (std::size_t i = 0; i < single; ++i) {
    checks_.push_back(Check{.base = next_line + (4 * i) % line});
    next_line += placement.line_stride;
  }
}

CoreId Tester::draw_core(std::uint32_t n_cores) {
  if (draw_.window == 0 || n_cores <= draw_.window) return static_cast<CoreId>(rng_.below(n_cores));
  const std::uint64_t block = draw_.shift_every ? completions_ / draw_.shift_every : 0;
  // Odd blocks draw uniformly so every core still contends for the checks.
  if (block % 2 == 1 || rng_.below(100) >= draw_.local_percent) {
    return static_cast<CoreId>(rng_.below(n_cores));
  }
  const auto base = static_cast<CoreId>((block / 2) % n_cores);
  return static_cast<CoreId>((base + rng_.below(draw_.window)) % n_cores);
}

std::optional<TesterRequest> Tester::next_request(std::uint32_t n_cores,
                                                  const std::function<bool(CoreId)>& core_busy) {
  const std::size_t idx = rng_.below(checks_.size());
  Check& c = checks_[idx];
  if (c.in_flight) return std::nullopt;

  const CoreId core = draw_core(n_cores);
  if (core_busy(core)) return std::nullopt;

  TesterRequest out;
  out.core = core;
  out.check = idx;
  if (c.phase == CheckPhase::Idle) {
    c.phase = CheckPhase::ActionPending;
    c.next_byte = 0;
    c.acked = {};
  }
  if (c.phase == CheckPhase::ActionPending) {
    const std::uint8_t k = c.next_byte++;
    c.cores[k] = core;
    out.request = CpuRequest{MemOp::Store, c.base + k, 1, {}};
    out.request.data[0] = static_cast<std::uint8_t>(c.expected + k);
  } else {
    out.request = CpuRequest{MemOp::Load, c.base, 4, {}};
  }
  c.in_flight = true;
  return out;
}

std::optional<Verdict> Tester::on_complete(const Completion& done) {
  auto it = owner_.find(done.id);
  if (it == owner_.end()) return std::nullopt;
  Check& c = checks_[it->second];
  owner_.erase(it);
  c.in_flight = false;
  if (done.request.op == MemOp::Store) {
    c.acked[done.request.addr - c.base] = true;
    if (c.next_byte == 4) c.phase = CheckPhase::CheckPending;
    return std::nullopt;
  }
  Verdict v = verify(c, {done.data[0], done.data[1], done.data[2], done.data[3]});
  if (v.pass) {
    ++c.expected;
    ++c.rounds;
    ++completions_;
    c.phase = CheckPhase::Idle;
    c.next_byte = 0;
  } else {
    ++mismatches_;
  }
  return v;
}

std::string_view to_string(RandtestOutcome o) {
  switch (o) {
    case RandtestOutcome::Pass: return "pass";
    case RandtestOutcome::Mismatch: return "mismatch";
    case RandtestOutcome::InvariantViolation: return "invariant-violation";
    case RandtestOutcome::ProtocolViolation: return "protocol-violation";
    case RandtestOutcome::LivenessViolation: return "liveness-violation";
    case RandtestOutcome::Error: return "error";
  }
  return "?";
}

std::string RandtestReport::to_text() const {
  std::ostringstream os;
  os << "outcome:      " << to_string(outcome) << '\n'
     << "completions:  " << completions << '\n'
     << "mismatches:   " << mismatches << '\n'
     << "violations:   " << violations << '\n'
     << "cycles:       " << cycles << '\n'
     << "l1 coverage:  " << coverage_summary.hit << '/' << coverage_summary.defined << '\n';
  if (!error.empty()) os << "error:        " << error << '\n';
  return os.str();
}

std::string RandtestReport::to_csv() const {
  std::ostringstream os;
  os << "metric,value\n"
     << "outcome," << to_string(outcome) << '\n'
     << "completions," << completions << '\n'
     << "mismatches," << mismatches << '\n'
     << "violations," << violations << '\n'
     << "cycles," << cycles << '\n'
     << "requests," << stats.requests() << '\n'
     << "snoops," << stats.snoops << '\n'
     << "l1_rows_hit," << coverage_summary.hit << '\n'
     << "l1_rows_defined," << coverage_summary.defined << '\n';
  return os.str();
}

RandtestReport run_randtest(const SystemConfig& base_config, const RandtestParams& p) {
  SystemConfig config = base_config;
  config.seed = p.seed;
  System sys = build_system(config, p.tables);
  Harness h(sys, HarnessOptions{p.fast_forward, true});
  Placement placement{config.l1.line_bytes, config.l1.sets() * config.l1.line_bytes};
  Tester tester(p.seed, p.checks, p.span_base, p.span_bytes, placement, p.draw);

  RandtestReport report;
  auto busy = [&](CoreId c) { return h.core_busy(c); };
  try {
    while (tester.completions() < p.completions) {
      for (std::uint32_t attempt = 0; attempt < config.n_cores; ++attempt) {
        if (auto r = tester.next_request(config.n_cores, busy)) {
          tester.bind(h.submit(r->core, r->request), r->check);
        }
      }
      for (const Completion& c : h.cycle()) {
        if (auto v = tester.on_complete(c); v && !v->pass) {
          std::ostringstream os;
          os << "check at 0x" << std::hex << c.request.addr << std::dec << " byte " << v->byte
             << " expected " << unsigned{v->expected[v->byte]} << " got "
             << unsigned{v->got[v->byte]};
          throw ScoreboardMismatch(os.str());
        }
      }
    }
    h.run_to_drain();
    const auto violations = sys.check_global_invariants();
    report.violations = violations.size();
    if (!violations.empty()) {
      report.outcome = RandtestOutcome::InvariantViolation;
      report.error = violations.front().to_string();
    } else if (!h.final_memory_mismatches().empty()) {
      report.outcome = RandtestOutcome::Mismatch;
      report.error = "final memory image differs from the oracle";
    }
  } catch (const ScoreboardMismatch& e) {
    report.outcome = RandtestOutcome::Mismatch;
    report.error = e.what();
  } catch (const InvariantViolation& e) {
    report.outcome = RandtestOutcome::InvariantViolation;
    report.violations = 1;
    report.error = e.what();
  } catch (const LivenessViolation& e) {
    report.outcome = RandtestOutcome::LivenessViolation;
    report.error = e.what();
  } catch (const ProtocolViolation& e) {
    report.outcome = RandtestOutcome::ProtocolViolation;
    report.error = e.what();
  } catch (const Error& e) {
    report.outcome = RandtestOutcome::Error;
    report.error = e.what();
  }
  report.completions = tester.completions();
  report.mismatches = h.scoreboard().mismatches() + tester.mismatches();
  if (report.outcome == RandtestOutcome::Mismatch && report.mismatches == 0) report.mismatches = 1;
  report.cycles = sys.cycle();
  report.coverage = sys.coverage();
  report.coverage_summary = coverage_report(sys.coverage(), sys.tables().l1);
  report.stats = sys.collect_stats();
  return report;
}

}  // namespace cforge

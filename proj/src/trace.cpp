#include "cforge/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

namespace {

std::uint64_t parse_hex(std::string_view tok, std::size_t line, const char* what) {
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) tok.remove_prefix(2);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, 16);
  if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

std::uint64_t parse_dec(std::string_view tok, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, 10);
  if (tok.empty() || ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::vector<TraceRecord> parse_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream ls(text);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() < 4 || tok.size() > 5) {
      throw ParseError(line_no, "expected 'core op addr size [data]'");
    }
    TraceRecord r;
    r.core = static_cast<CoreId>(parse_dec(tok[0], line_no, "core"));
    if (tok[1] == "LD" || tok[1] == "ld") {
      r.op = MemOp::Load;
    } else if (tok[1] == "ST" || tok[1] == "st") {
      r.op = MemOp::Store;
    } else {
      throw ParseError(line_no, "unknown op '" + tok[1] + "'");
    }
    r.addr = parse_hex(tok[2], line_no, "address");
    const std::uint64_t size = parse_dec(tok[3], line_no, "size");
    if (size != 1 && size != 2 && size != 4 && size != 8) {
      throw ParseError(line_no, "size must be 1, 2, 4 or 8");
    }
    r.size = static_cast<std::uint8_t>(size);
    if (tok.size() == 5) {
      if (r.op == MemOp::Load) throw ParseError(line_no, "loads take no data");
      r.has_data = true;
      r.data = parse_hex(tok[4], line_no, "data");
      if (size < 8 && (r.data >> (8 * size)) != 0) {
        throw ParseError(line_no, "data wider than the access size");
      }
    }
    out.push_back(r);
  }
  return out;
}

std::vector<TraceRecord> parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace", "cannot open '" + path + "'");
  return parse_trace(in);
}

std::string format_trace(const std::vector<TraceRecord>& records) {
  std::ostringstream os;
  for (const TraceRecord& r : records) {
    os << r.core << ' ' << to_string(r.op) << " 0x" << std::hex << r.addr << std::dec << ' '
       << unsigned{r.size};
    if (r.has_data) os << " 0x" << std::hex << r.data << std::dec;
    os << '\n';
  }
  return os.str();
}

ReplayResult replay_trace(const std::vector<TraceRecord>& records, System& system,
                          HarnessOptions options) {
  Harness h(system, options);
  for (const TraceRecord& r : records) {
    CpuRequest req{r.op, r.addr, r.size, {}};
    const std::uint64_t id = h.scoreboard().size();
    if (r.op == MemOp::Store) {
      for (std::size_t k = 0; k < r.size; ++k) {
        req.data[k] = r.has_data ? static_cast<std::uint8_t>(r.data >> (8 * k)) : fill_byte(id, k);
      }
    }
    h.submit(r.core, req);
  }
  h.run_to_drain();

  ReplayResult out;
  out.stats = system.collect_stats();
  out.requests = h.scoreboard().size();
  out.mismatches = h.scoreboard().mismatches();
  for (const ScoreEntry& e : h.scoreboard().entries()) out.latencies.push_back(e.latency());
  out.memory_mismatches = h.final_memory_mismatches();
  return out;
}

}  // namespace cforge

#include "cforge/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cforge/errors.hpp"

namespace cforge {

std::string RunManifest::to_text() const {
  std::ostringstream os;
  os << "# run manifest\n"
     << "subcommand = " << subcommand << '\n'
     << "config = " << (config_path.empty() ? "(defaults)" : config_path) << '\n'
     << "seed = " << seed << '\n';
  if (overrides.cores) os << "override.cores = " << *overrides.cores << '\n';
  if (overrides.levels) os << "override.levels = " << *overrides.levels << '\n';
  if (overrides.protocol) os << "override.protocol = " << *overrides.protocol << '\n';
  if (overrides.seed) os << "override.seed = " << *overrides.seed << '\n';
  for (const auto& [k, v] : params) os << "param." << k << " = " << v << '\n';
  for (const std::string& o : outputs) os << "output = " << o << '\n';
  os << "\n# effective configuration\n" << to_config_text(effective);
  return os.str();
}

std::string format_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

SystemConfig variant(const SystemConfig& base, std::string_view name) {
  SystemConfig c = base;
  if (name == "MI") {
    c.protocol = ProtocolId::MI;
    c.cache_levels = 1;
  } else if (name == "MSI-1L") {
    c.protocol = ProtocolId::MSI;
    c.cache_levels = 1;
  } else if (name == "MSI-2L") {
    c.protocol = ProtocolId::MSI;
    c.cache_levels = 2;
  } else if (name == "MI-2L") {
    c.protocol = ProtocolId::MI;
    c.cache_levels = 2;
  } else {
    throw ConfigError("compare", "unknown configuration '" + std::string(name) + "'");
  }
  c.validate();
  return c;
}

std::vector<CompareRow> cmd_compare(const SystemConfig& base, const SynthParams& params,
                                    const std::vector<std::string>& variants) {
  if (variants.size() < 2) throw ConfigError("compare", "at least two configurations are needed");
  std::vector<CompareRow> rows;
  for (const std::string& v : variants) {
    const RunResult r = run_synth(variant(base, v), params);
    if (r.mismatches != 0 || !r.memory_mismatches.empty()) {
      throw ScoreboardMismatch("configuration " + v + " returned wrong data");
    }
    rows.push_back({std::string(to_string(params.pattern)), v, r.stats.cycles, 1.0});
  }
  for (CompareRow& row : rows) {
    row.speedup = static_cast<double>(rows.front().cycles) / static_cast<double>(row.cycles);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "workload,config,cycles,speedup\n";
  for (const CompareRow& r : rows) {
    os << r.workload << ',' << r.config << ',' << r.cycles << ',' << format_ratio(r.speedup)
       << '\n';
  }
  return os.str();
}

std::string sweep_header() {
  return "workload,protocol,cores,levels,status,cycles,requests,avg_latency,avg_load_latency,"
         "l1_hits,l1_misses,l2_hits,l2_misses,snoops\n";
}

std::string sweep_row(const SystemConfig& base, SweepCell cell, const SynthParams& params) {
  SystemConfig c = base;
  c.n_cores = cell.cores;
  c.cache_levels = cell.levels;
  std::ostringstream os;
  os << to_string(params.pattern) << ',' << to_string(c.protocol) << ',' << cell.cores << ','
     << cell.levels << ',';
  try {
    c.validate();
    const RunResult r = run_synth(c, params);
    const bool ok = r.mismatches == 0 && r.memory_mismatches.empty();
    const StatsBundle& s = r.stats;
    os << (ok ? "ok" : "mismatch") << ',' << s.cycles << ',' << s.requests() << ','
       << format_ratio(s.avg_latency()) << ',' << format_ratio(s.avg_load_latency()) << ','
       << s.l1_hits() << ',' << s.l1_misses() << ',' << s.l2_hits << ',' << s.l2_misses << ','
       << s.snoops << '\n';
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    os << "error: " << msg << ",,,,,,,,,\n";
  }
  return os.str();
}

std::string cmd_sweep(const SystemConfig& base, const std::vector<std::uint32_t>& core_counts,
                      const std::vector<std::uint32_t>& levels, const SynthParams& params,
                      unsigned jobs) {
  std::vector<SweepCell> cells;
  for (std::uint32_t n : core_counts) {
    for (std::uint32_t l : levels) cells.push_back({n, l});
  }
  std::vector<std::string> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      rows[i] = sweep_row(base, cells[i], params);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < n; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::string out = sweep_header();
  for (const std::string& r : rows) out += r;
  return out;
}

}  // namespace cforge

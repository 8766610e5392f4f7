#include "cforge/stats.hpp"

#include <iomanip>
#include <sstream>

namespace cforge {

std::size_t latency_bucket(Cycle latency) {
  std::size_t b = 0;
  while (latency > 1 && b + 1 < kLatencyBuckets) {
    latency >>= 1;
    ++b;
  }
  return b;
}

void CoreStats::record(MemOp op, Cycle latency, bool hit) {
  ++requests;
  latency_sum += latency;
  if (op == MemOp::Load) {
    ++loads;
    load_latency_sum += latency;
  } else {
    ++stores;
  }
  if (hit) {
    ++l1_hits;
  } else {
    ++l1_misses;
  }
  ++histogram[latency_bucket(latency)];
}

namespace {
template <class F>
std::uint64_t sum(const std::vector<CoreStats>& cores, F f) {
  std::uint64_t s = 0;
  for (const CoreStats& c : cores) s += f(c);
  return s;
}
}  // namespace

std::uint64_t StatsBundle::requests() const {
  return sum(cores, [](const CoreStats& c) { return c.requests; });
}
std::uint64_t StatsBundle::l1_hits() const {
  return sum(cores, [](const CoreStats& c) { return c.l1_hits; });
}
std::uint64_t StatsBundle::l1_misses() const {
  return sum(cores, [](const CoreStats& c) { return c.l1_misses; });
}
std::uint64_t StatsBundle::latency_sum() const {
  return sum(cores, [](const CoreStats& c) { return c.latency_sum; });
}
std::uint64_t StatsBundle::loads() const {
  return sum(cores, [](const CoreStats& c) { return c.loads; });
}
std::uint64_t StatsBundle::load_latency_sum() const {
  return sum(cores, [](const CoreStats& c) { return c.load_latency_sum; });
}
double StatsBundle::avg_latency() const {
  const auto n = requests();
  return n ? static_cast<double>(latency_sum()) / static_cast<double>(n) : 0.0;
}
double StatsBundle::avg_load_latency() const {
  const auto n = loads();
  return n ? static_cast<double>(load_latency_sum()) / static_cast<double>(n) : 0.0;
}

std::string StatsBundle::to_csv() const {
  std::ostringstream os;
  os << "metric,core,value\n";
  os << "cycles,all," << cycles << '\n';
  for (std::size_t i = 0; i < cores.size(); ++i) {
    const CoreStats& c = cores[i];
    os << "requests," << i << ',' << c.requests << '\n';
    os << "loads," << i << ',' << c.loads << '\n';
    os << "stores," << i << ',' << c.stores << '\n';
    os << "latency_sum," << i << ',' << c.latency_sum << '\n';
    os << "load_latency_sum," << i << ',' << c.load_latency_sum << '\n';
    os << "l1_hits," << i << ',' << c.l1_hits << '\n';
    os << "l1_misses," << i << ',' << c.l1_misses << '\n';
    os << "snoops_received," << i << ',' << c.snoops_received << '\n';
    for (std::size_t b = 0; b < kLatencyBuckets; ++b) {
      if (c.histogram[b]) os << "latency_hist_" << (std::uint64_t{1} << b) << ',' << i << ',' << c.histogram[b] << '\n';
    }
  }
  os << "l2_hits,all," << l2_hits << '\n';
  os << "l2_misses,all," << l2_misses << '\n';
  os << "l2_writebacks,all," << l2_writebacks << '\n';
  os << "mem_reads,all," << mem_reads << '\n';
  os << "mem_writes,all," << mem_writes << '\n';
  os << "snoops,all," << snoops << '\n';
  for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
    os << "busy_" << to_string(static_cast<Channel>(ch)) << ",all," << channel_busy[ch] << '\n';
  }
  os << "dir_high_water,all," << dir_high_water << '\n';
  return os.str();
}

std::string StatsBundle::to_table() const {
  std::ostringstream os;
  os << "cycles " << cycles << "  requests " << requests() << "  snoops " << snoops
     << "  dir high-water " << dir_high_water << '\n';
  os << std::left << std::setw(6) << "core" << std::right << std::setw(10) << "requests"
     << std::setw(10) << "hits" << std::setw(10) << "misses" << std::setw(12) << "avg lat" << '\n';
  for (std::size_t i = 0; i < cores.size(); ++i) {
    const CoreStats& c = cores[i];
    const double avg = c.requests ? static_cast<double>(c.latency_sum) / c.requests : 0.0;
    os << std::left << std::setw(6) << i << std::right << std::setw(10) << c.requests
       << std::setw(10) << c.l1_hits << std::setw(10) << c.l1_misses << std::setw(12)
       << std::fixed << std::setprecision(2) << avg << '\n';
  }
  if (l2_hits + l2_misses) {
    os << "L2 hits " << l2_hits << "  misses " << l2_misses << "  write-backs " << l2_writebacks
       << '\n';
  }
  os << "memory reads " << mem_reads << "  writes " << mem_writes << '\n';
  return os.str();
}

}  // namespace cforge

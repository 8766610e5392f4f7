#include "cforge/config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "cforge/bus.hpp"
#include "cforge/errors.hpp"

namespace cforge {

void SystemConfig::validate() const {
  if (n_cores == 0 || n_cores > 64 || !is_pow2(n_cores)) {
    throw ConfigError("system.cores", "core count must be a power of two in 1..64");
  }
  if (cache_levels != 1 && cache_levels != 2) {
    throw ConfigError("system.levels", "cache levels must be 1 or 2");
  }
  l1.validate("l1");
  if (cache_levels == 2) {
    if (l2_count == 0) throw ConfigError("l2.count", "two-level systems need at least one L2");
    l2.validate("l2");
    if (l2.line_bytes != l1.line_bytes) {
      throw ConfigError("l2.line", "L2 line size must match the L1 line size");
    }
  }
  try {
    (void)cforge::beats_per_line(l1.line_bytes, bus_width_bits);
  } catch (const BeatCountMismatch& e) {
    throw ConfigError("bus.width", e.what());
  }
  if (memory_bytes < l1.line_bytes || memory_bytes % l1.line_bytes != 0) {
    throw ConfigError("memory.size", "memory size must be a whole number of lines");
  }
}

std::uint32_t SystemConfig::beats_per_line() const {
  return cforge::beats_per_line(l1.line_bytes, bus_width_bits);
}

MemoryTiming SystemConfig::memory_timing() const {
  return {mem_first_latency, mem_beat_latency, beats_per_line()};
}

std::optional<L2Config> SystemConfig::l2_config() const {
  if (cache_levels < 2) return std::nullopt;
  return L2Config{l2, l2_count, l2_hit_latency};
}

Cycle SystemConfig::liveness_bound() const {
  // Each core ahead of us may need a victim write-back plus a snooped read,
  // each touching memory twice; beats stream through a FIFO of the given depth.
  const Cycle per_request =
      4 * (memory_timing().line_latency() + l2_hit_latency + 4 * beats_per_line() + 16);
  return per_request * (n_cores + 2) + effective_fifo_depth() * beats_per_line();
}

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = value.data() + value.size();
  int base = 10;
  if (value.size() > 2 && value[0] == '0' && (value[1] == 'x' || value[1] == 'X')) {
    begin += 2;
    base = 16;
  }
  auto [ptr, ec] = std::from_chars(begin, end, out, base);
  if (ec != std::errc{} || ptr != end || begin == end) {
    throw ConfigError(key, "expected an unsigned integer, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

void assign(SystemConfig& c, const std::string& key, const std::string& v) {
  if (key == "system.cores") c.n_cores = parse_number<std::uint32_t>(key, v);
  else if (key == "system.levels") c.cache_levels = parse_number<std::uint32_t>(key, v);
  else if (key == "system.protocol") {
    try {
      c.protocol = parse_protocol(v);
    } catch (const UnknownProtocol& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "system.seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "system.check_invariants") c.check_invariants = parse_bool(key, v);
  else if (key == "l1.capacity") c.l1.capacity_bytes = parse_number<std::uint64_t>(key, v);
  else if (key == "l1.ways") c.l1.ways = parse_number<std::uint64_t>(key, v);
  else if (key == "l1.line") c.l1.line_bytes = c.l2.line_bytes = parse_number<std::uint64_t>(key, v);
  else if (key == "l2.count") c.l2_count = parse_number<std::uint32_t>(key, v);
  else if (key == "l2.capacity") c.l2.capacity_bytes = parse_number<std::uint64_t>(key, v);
  else if (key == "l2.ways") c.l2.ways = parse_number<std::uint64_t>(key, v);
  else if (key == "l2.hit_latency") c.l2_hit_latency = parse_number<Cycle>(key, v);
  else if (key == "bus.width") c.bus_width_bits = parse_number<unsigned>(key, v);
  else if (key == "bus.fifo_depth") c.fifo_depth = parse_number<std::size_t>(key, v);
  else if (key == "memory.size") c.memory_bytes = parse_number<std::uint64_t>(key, v);
  else if (key == "memory.first_latency") c.mem_first_latency = parse_number<Cycle>(key, v);
  else if (key == "memory.beat_latency") c.mem_beat_latency = parse_number<Cycle>(key, v);
  else throw ConfigError(key, "unknown key");
}

SystemConfig parse_items(std::istream& in, const ConfigOverrides& overrides) {
  CLI::ConfigTOML reader;
  std::vector<CLI::ConfigItem> items;
  try {
    items = reader.from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError("file", e.what());
  }
  SystemConfig config;
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = item.fullname();
    if (item.parents.size() != 1) throw ConfigError(key, "keys must live in a section");
    if (item.inputs.size() != 1) throw ConfigError(key, "expected exactly one value");
    assign(config, key, item.inputs.front());
  }
  apply_overrides(config, overrides);
  config.validate();
  return config;
}

}  // namespace

void apply_overrides(SystemConfig& config, const ConfigOverrides& o) {
  if (o.cores) config.n_cores = *o.cores;
  if (o.levels) config.cache_levels = *o.levels;
  if (o.protocol) {
    try {
      config.protocol = parse_protocol(*o.protocol);
    } catch (const UnknownProtocol& e) {
      throw ConfigError("system.protocol", e.what());
    }
  }
  if (o.seed) config.seed = *o.seed;
}

SystemConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
  std::istringstream in(text);
  return parse_items(in, overrides);
}

SystemConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("file", "cannot open '" + path + "'");
  return parse_items(in, overrides);
}

std::string to_config_text(const SystemConfig& c) {
  std::ostringstream os;
  os << "[system]\n"
     << "cores = " << c.n_cores << "\n"
     << "levels = " << c.cache_levels << "\n"
     << "protocol = \"" << to_string(c.protocol) << "\"\n"
     << "seed = " << c.seed << "\n"
     << "check_invariants = " << (c.check_invariants ? "true" : "false") << "\n\n"
     << "[l1]\n"
     << "capacity = " << c.l1.capacity_bytes << "\n"
     << "ways = " << c.l1.ways << "\n"
     << "line = " << c.l1.line_bytes << "\n\n"
     << "[l2]\n"
     << "count = " << c.l2_count << "\n"
     << "capacity = " << c.l2.capacity_bytes << "\n"
     << "ways = " << c.l2.ways << "\n"
     << "hit_latency = " << c.l2_hit_latency << "\n\n"
     << "[bus]\n"
     << "width = " << c.bus_width_bits << "\n"
     << "fifo_depth = " << c.fifo_depth << "\n\n"
     << "[memory]\n"
     << "size = " << c.memory_bytes << "\n"
     << "first_latency = " << c.mem_first_latency << "\n"
     << "beat_latency = " << c.mem_beat_latency << "\n";
  return os.str();
}

}  // namespace cforge

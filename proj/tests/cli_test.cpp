#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cforge/commands.hpp"
#include "cforge/config.hpp"
#include "cforge/errors.hpp"

using namespace cforge;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args) {
  const std::string cmd = std::string(CFORGE_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cforge_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

std::string default_config_path() {
  const char* src = std::getenv("CFORGE_SOURCE_DIR");
  return std::string(src ? src : ".") + "/configs/default.ini";
}

}  // namespace

TEST(ConfigParse, DefaultsFile) {
  const SystemConfig c = parse_config(default_config_path());
  EXPECT_EQ(c, SystemConfig{});
  EXPECT_EQ(c.n_cores, 4u);
  EXPECT_EQ(c.protocol, ProtocolId::MSI);
  EXPECT_EQ(c.cache_levels, 1u);
  EXPECT_EQ(c.l1.capacity_bytes, 8192u);
  EXPECT_EQ(c.l1.ways, 4u);
  EXPECT_EQ(c.bus_width_bits, 32u);
  EXPECT_EQ(c.memory_bytes, std::uint64_t{1} << 30);
}

TEST(ConfigParse, Overrides) {
  ConfigOverrides o;
  o.cores = 16;
  o.levels = 2;
  const SystemConfig c = parse_config(default_config_path(), o);
  EXPECT_EQ(c.n_cores, 16u);
  EXPECT_EQ(c.cache_levels, 2u);
  EXPECT_EQ(c.l2_count, 2u);
  EXPECT_EQ(c.l2.capacity_bytes, 256u * 1024);
  EXPECT_EQ(c.l2.ways, 8u);
}

TEST(ConfigParse, Rejections) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<accepted>");
  };
  EXPECT_EQ(key_of("[system]\nprotocol = \"moesi\"\n"), "system.protocol");
  EXPECT_EQ(key_of("[system]\ncolour = 3\n"), "system.colour");
  EXPECT_EQ(key_of("[l1]\nways = four\n"), "l1.ways");
  EXPECT_EQ(key_of("[l1]\ncapacity = 8000\n"), "l1.capacity");
  EXPECT_EQ(key_of("[system]\ncores = 3\n"), "system.cores");
  EXPECT_EQ(key_of("[bus]\nwidth = 24\n"), "bus.width");
  EXPECT_EQ(key_of("[system]\ncores = 16\n"), "<accepted>");
}

TEST(ConfigParse, TextRoundTrip) {
  SystemConfig c;
  c.n_cores = 8;
  c.cache_levels = 2;
  c.protocol = ProtocolId::MI;
  c.fifo_depth = 5;
  c.mem_first_latency = 60;
  EXPECT_EQ(parse_config_text(to_config_text(c)), c);
}

TEST(Commands, BaselineNormalizesToOne) {
  SynthParams p;
  p.ops_per_core = 200;
  const auto rows = cmd_compare(SystemConfig{}, p, {"MI", "MI"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].speedup, 1.0);
  EXPECT_EQ(rows[1].speedup, 1.0);
  EXPECT_EQ(compare_csv(rows).substr(0, 32), "workload,config,cycles,speedup\ns");
  EXPECT_THROW(cmd_compare(SystemConfig{}, p, {"MI"}), ConfigError);
  EXPECT_THROW(variant(SystemConfig{}, "MOESI"), ConfigError);
}

TEST(Commands, SweepShape) {
  SynthParams p;
  p.ops_per_core = 50;
  EXPECT_EQ(cmd_sweep(SystemConfig{}, {}, {1, 2}, p, 2), sweep_header());
  const std::string csv = cmd_sweep(SystemConfig{}, {2, 4, 8, 16}, {1, 2}, p, 4);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_EQ(csv, cmd_sweep(SystemConfig{}, {2, 4, 8, 16}, {1, 2}, p, 1));
}

TEST(Commands, FormatRatio) {
  EXPECT_EQ(format_ratio(1.0), "1.0000");
  EXPECT_EQ(format_ratio(2.0 / 3.0), "0.6667");
}

TEST_F(CliTest, TablesExitClean) {
  const CliRun r = cli("tables");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("state,event,next_state,actions"), std::string::npos);
}

TEST_F(CliTest, ExitCodeContract) {
  EXPECT_EQ(cli("randtest --completions 200").code, 0);
  EXPECT_EQ(cli("randtest --completions 2000 --mutation sharer-keeps-line-on-read-unique").code, 1);
  EXPECT_EQ(cli("--protocol moesi randtest --completions 10").code, 2);
  EXPECT_EQ(cli("--config " + (dir_ / "missing.ini").string() + " tables").code, 2);
  EXPECT_EQ(cli("--config " + write("bad.ini", "[l1]\nways = 3\n").string() + " tables").code, 2);
  EXPECT_EQ(cli("randtest --mutation no-such-bug").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("synth --pattern nope").code, 2);
}

TEST_F(CliTest, TraceSubcommand) {
  const fs::path good = write("good.trace", "0 ST 0x1000 4 0xdeadbeef\n1 LD 0x1000 4\n");
  const fs::path csv = dir_ / "trace.csv";
  EXPECT_EQ(cli("trace " + good.string() + " --csv " + csv.string()).code, 0);
  EXPECT_EQ(slurp(csv).rfind("metric,core,value\n", 0), 0u);
  const fs::path bad = write("bad.trace", "0 LD 0x1000 4\n0 LD 0x1000 5\n");
  EXPECT_EQ(cli("trace " + bad.string()).code, 2);
}

TEST_F(CliTest, ManifestEchoReproducesTheRun) {
  const fs::path csv = dir_ / "synth.csv";
  ASSERT_EQ(cli("--seed 9 --cores 2 synth --ops 300 --csv " + csv.string()).code, 0);
  const std::string manifest = slurp(csv.string() + ".manifest");
  EXPECT_NE(manifest.find("subcommand = synth"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("override.seed = 9"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("override.cores = 2"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("param.ops = 300"), std::string::npos) << manifest;
  EXPECT_NE(manifest.find("output = " + csv.string()), std::string::npos) << manifest;
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
  const fs::path a = dir_ / "a.csv";
  const fs::path b = dir_ / "b.csv";
  const std::string args = "--seed 4 sweep --core-counts 2,4 --ops 200 --pattern false_sharing";
  ASSERT_EQ(cli(args + " --csv " + a.string()).code, 0);
  ASSERT_EQ(cli(args + " --jobs 1 --csv " + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

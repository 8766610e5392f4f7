#include <gtest/gtest.h>

#include <set>

#include "cforge/errors.hpp"
#include "cforge/tester.hpp"

using namespace cforge;

namespace {

// Answers a tester's requests from a flat byte map, standing in for the system.
struct FakeMemory {
  std::map<Addr, std::uint8_t> bytes;
  std::uint64_t next_id = 0;

  std::optional<Verdict> serve(Tester& t, const TesterRequest& r) {
    const std::uint64_t id = next_id++;
    t.bind(id, r.check);
    Completion c{id, r.core, r.request, {}, 1, true};
    if (r.request.op == MemOp::Store) {
      bytes[r.request.addr] = r.request.data[0];
    } else {
      for (std::size_t k = 0; k < r.request.size; ++k) c.data[k] = bytes[r.request.addr + k];
    }
    return t.on_complete(c);
  }
};

const auto kIdle = [](CoreId) { return false; };

}  // namespace

TEST(TesterRng, SameSeedSameSequence) {
  TesterRng a(42);
  TesterRng b(42);
  TesterRng c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(TesterRng, IsStdMersenneTwister64) {
  TesterRng r(5489);
  std::mt19937_64 ref(5489);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(r.next(), ref());
}

TEST(TesterRng, BoundedDrawsStayInRangeAndCoverIt) {
  TesterRng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Placement, SixteenChecksStratified) {
  const Placement p;
  Tester t(1, 16, 0x100000, 1 << 20, p);
  ASSERT_EQ(t.checks().size(), 16u);
  std::set<Addr> bases;
  std::map<Addr, int> per_line;
  for (const Check& c : t.checks()) {
    EXPECT_EQ(c.base % 4, 0u);
    EXPECT_TRUE(bases.insert(c.base).second);
    ++per_line[c.base - c.base % p.line_bytes];
  }
  int shared = 0;
  int alone = 0;
  for (const auto& [line, n] : per_line) {
    EXPECT_TRUE(n == 4 || n == 1);
    (n == 4 ? shared : alone) += n;
  }
  EXPECT_EQ(shared, 8);
  EXPECT_EQ(alone, 8);
  EXPECT_EQ(per_line.size(), 10u);
  // Lines sit one L1 set span apart, so they all compete for one set.
  for (const auto& [line, n] : per_line) EXPECT_EQ((line - 0x100000) % p.line_stride, 0u);
}

TEST(Placement, SingleCheckAtSpanBase) {
  Tester t(1, 1, 0x4000, 64);
  ASSERT_EQ(t.checks().size(), 1u);
  EXPECT_EQ(t.checks()[0].base, 0x4000u);
}

TEST(Placement, SpanTooSmall) {
  EXPECT_THROW(Tester(1, 16, 0, 4096), SpanTooSmall);
  EXPECT_THROW(Tester(1, 0, 0, 1 << 20), SpanTooSmall);
}

TEST(Verify, Examples) {
  Check c;
  c.expected = 5;
  EXPECT_TRUE(verify(c, {5, 6, 7, 8}).pass);
  const Verdict bad = verify(c, {5, 6, 7, 0});
  EXPECT_FALSE(bad.pass);
  EXPECT_EQ(bad.byte, 3);
  EXPECT_EQ(bad.expected[3], 8);
  c.expected = 255;
  EXPECT_TRUE(verify(c, {0xff, 0x00, 0x01, 0x02}).pass);
}

TEST(Tester, EncodingAndPhaseOrder) {
  Tester t(3, 1, 0x1000, 64);
  FakeMemory mem;
  std::vector<CpuRequest> issued;
  while (t.completions() < 6) {
    auto r = t.next_request(4, kIdle);
    ASSERT_TRUE(r);
    if (t.completions() == 5) issued.push_back(r->request);
    const auto v = mem.serve(t, *r);
    if (v) {
      ASSERT_TRUE(v->pass);
    }
  }
  // Round six (e = 5): stores 05..08 to base..base+3 in order, then one 4-byte load.
  ASSERT_EQ(issued.size(), 5u);
  for (std::uint8_t k = 0; k < 4; ++k) {
    EXPECT_EQ(issued[k].op, MemOp::Store);
    EXPECT_EQ(issued[k].addr, 0x1000u + k);
    EXPECT_EQ(issued[k].size, 1);
    EXPECT_EQ(issued[k].data[0], 5 + k);
  }
  EXPECT_EQ(issued[4], (CpuRequest{MemOp::Load, 0x1000, 4, {}}));
  EXPECT_EQ(t.checks()[0].expected, 6);
}

TEST(Tester, InFlightCheckAndBusyCoreYieldNothing) {
  Tester t(3, 1, 0x1000, 64);
  auto r = t.next_request(2, kIdle);
  ASSERT_TRUE(r);
  EXPECT_FALSE(t.next_request(2, kIdle));
  Tester u(3, 4, 0x1000, 1 << 16);
  EXPECT_FALSE(u.next_request(2, [](CoreId) { return true; }));
}

TEST(Tester, DetectsCorruptedRead) {
  Tester t(3, 1, 0x1000, 64);
  FakeMemory mem;
  for (int i = 0; i < 4; ++i) mem.serve(t, *t.next_request(1, kIdle));
  mem.bytes[0x1002] ^= 0xff;
  const auto v = mem.serve(t, *t.next_request(1, kIdle));
  ASSERT_TRUE(v);
  EXPECT_FALSE(v->pass);
  EXPECT_EQ(v->byte, 2);
  EXPECT_EQ(t.mismatches(), 1u);
}

TEST(Randtest, FourCoresClean) {
  SystemConfig c;
  RandtestParams p;
  p.completions = 2000;
  const RandtestReport r = run_randtest(c, p);
  EXPECT_EQ(r.outcome, RandtestOutcome::Pass) << r.error;
  EXPECT_EQ(r.completions, 2000u);
  EXPECT_EQ(r.mismatches, 0u);
  EXPECT_EQ(r.violations, 0u);
}

TEST(Randtest, SingleCoreStillPasses) {
  SystemConfig c;
  c.n_cores = 1;
  RandtestParams p;
  p.completions = 500;
  EXPECT_EQ(run_randtest(c, p).outcome, RandtestOutcome::Pass);
}

TEST(Randtest, ReportIsPureFunctionOfInputs) {
  SystemConfig c;
  c.n_cores = 8;
  c.cache_levels = 2;
  RandtestParams p;
  p.completions = 1000;
  p.seed = 17;
  EXPECT_EQ(run_randtest(c, p).to_csv(), run_randtest(c, p).to_csv());
  RandtestParams q = p;
  q.seed = 18;
  EXPECT_NE(run_randtest(c, p).cycles, run_randtest(c, q).cycles);
}

TEST(Randtest, CatchesDroppedInvalidation) {
  SystemConfig c;
  RandtestParams p;
  p.tables = mutate(protocol_table(ProtocolId::MSI), Mutation::SharerKeepsLineOnReadUnique);
  const RandtestReport r = run_randtest(c, p);
  EXPECT_FALSE(r.clean());
  EXPECT_LT(r.completions, 10000u);
  EXPECT_FALSE(r.error.empty());
}

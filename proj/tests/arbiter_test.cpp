#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "cforge/arbiter.hpp"
#include "cforge/errors.hpp"

using namespace cforge;

TEST(RoundRobin, NextAfterLastGrant) {
  RoundRobinArbiter a(4, 0);
  EXPECT_EQ(a.arbitrate(0b0101), 2u);
  EXPECT_EQ(a.last_grant(), 2u);
}

TEST(RoundRobin, WrapsAround) {
  RoundRobinArbiter a(4, 2);
  EXPECT_EQ(a.arbitrate(0b0101), 0u);
}

TEST(RoundRobin, LoneRequesterAlwaysWins) {
  for (std::uint32_t last = 0; last < 16; ++last) {
    RoundRobinArbiter a(16, last);
    EXPECT_EQ(a.arbitrate(std::uint64_t{1} << 5), 5u);
  }
}

TEST(RoundRobin, EmptyMaskGrantsNothing) {
  RoundRobinArbiter a(4, 1);
  EXPECT_FALSE(a.arbitrate(0));
  EXPECT_EQ(a.last_grant(), 1u);
}

TEST(RoundRobin, RejectsBadSizes) {
  EXPECT_THROW(RoundRobinArbiter(0), ConfigError);
  EXPECT_THROW(RoundRobinArbiter(65), ConfigError);
  EXPECT_THROW(RoundRobinArbiter(4, 4), ConfigError);
}

TEST(RoundRobin, SixtyFourRequesters) {
  RoundRobinArbiter a(64, 63);
  EXPECT_EQ(a.arbitrate(~std::uint64_t{0}), 0u);
  EXPECT_EQ(a.arbitrate(std::uint64_t{1} << 63), 63u);
}

// Property: under full contention every requester is granted within n
// consecutive grants; with random masks a persistent requester waits at most n-1 grants.
TEST(RoundRobinProperty, StarvationBound) {
  std::mt19937_64 rng(99);
  for (std::uint32_t n : {2u, 3u, 4u, 8u, 16u, 64u}) {
    RoundRobinArbiter full(n);
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    std::vector<int> since(n, 0);
    for (int g = 0; g < 5000; ++g) {
      const auto w = full.arbitrate(all);
      ASSERT_TRUE(w);
      for (std::uint32_t i = 0; i < n; ++i) since[i] = i == *w ? 0 : since[i] + 1;
      for (std::uint32_t i = 0; i < n; ++i) ASSERT_LT(since[i], static_cast<int>(n));
    }

    RoundRobinArbiter a(n);
    const std::uint32_t victim = static_cast<std::uint32_t>(rng() % n);
    int waited = 0;
    for (int g = 0; g < 5000; ++g) {
      const std::uint64_t mask = (rng() & all) | (std::uint64_t{1} << victim);
      const auto w = a.arbitrate(mask);
      ASSERT_TRUE(w);
      ASSERT_TRUE(mask & (std::uint64_t{1} << *w));
      waited = *w == victim ? 0 : waited + 1;
      ASSERT_LE(waited, static_cast<int>(n) - 1);
    }
  }
}

TEST(PortArbiter, TwoPartyRotation) {
  PortArbiter p;
  p.set_last(PortClient::WriteBackFsm);
  EXPECT_EQ(p.grant(true, true), PortClient::ReadFsm);
  p.set_last(PortClient::ReadFsm);
  EXPECT_EQ(p.grant(true, true), PortClient::WriteBackFsm);
  EXPECT_EQ(p.grant(true, false), PortClient::WriteBackFsm);
  EXPECT_EQ(p.grant(false, true), PortClient::ReadFsm);
  EXPECT_FALSE(p.grant(false, false));
}

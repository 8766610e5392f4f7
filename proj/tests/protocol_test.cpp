#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cforge/errors.hpp"
#include "cforge/protocol.hpp"

using namespace cforge;
using A = Action;
using E = ProtocolEvent;
using L = LineState;

namespace {

bool has(const std::vector<A>& v, A a) { return std::find(v.begin(), v.end(), a) != v.end(); }

std::uint64_t bits(std::initializer_list<CoreId> cores) {
  std::uint64_t m = 0;
  for (CoreId c : cores) m |= std::uint64_t{1} << c;
  return m;
}

}  // namespace

TEST(ProtocolTable, MsiUpgradeUsesReadUnique) {
  const auto t = protocol_table(ProtocolId::MSI);
  const L1Row& r = l1_transition(t.l1, L::S, E::Store);
  EXPECT_EQ(r.next, L::SM_D);
  EXPECT_EQ(r.actions, std::vector<A>{A::IssueReadUnique});
}

TEST(ProtocolTable, OwnerSuppliesAndInvalidatesOnSnoopReadUnique) {
  const auto t = protocol_table(ProtocolId::MSI);
  const L1Row& r = l1_transition(t.l1, L::M, E::SnoopReadUnique);
  EXPECT_EQ(r.next, L::I);
  EXPECT_EQ(r.actions, (std::vector<A>{A::SupplyData, A::InvalidateSelf}));
}

TEST(ProtocolTable, SnoopOfInvalidLineIsUndefined) {
  const auto t = protocol_table(ProtocolId::MSI);
  EXPECT_THROW(l1_transition(t.l1, L::I, E::SnoopReadClean), ProtocolViolation);
}

TEST(ProtocolTable, LookupCountsCoverage) {
  const auto t = protocol_table(ProtocolId::MSI);
  CoverageCounters c;
  l1_transition(t.l1, L::I, E::Load, &c);
  l1_transition(t.l1, L::I, E::Load, &c);
  EXPECT_EQ(c.l1_rows[L1Table::index(L::I, E::Load)], 2u);
  EXPECT_EQ(c.l1_actions[static_cast<std::size_t>(A::IssueReadClean)], 2u);
}

TEST(ProtocolTable, MsiCoversAllStableStatesAndCpuEvents) {
  const auto t = protocol_table(ProtocolId::MSI);
  for (L s : {L::I, L::S, L::M}) {
    for (E e : {E::Load, E::Store}) EXPECT_NE(t.l1.find(s, e), nullptr);
  }
}

TEST(ProtocolTable, MiHasNoSharedState) {
  const auto t = protocol_table(ProtocolId::MI);
  for (const L1Key& k : t.l1.keys()) {
    EXPECT_NE(k.state, L::S);
    EXPECT_NE(k.state, L::IS_D);
    EXPECT_NE(k.state, L::SM_D);
    EXPECT_NE(t.l1.at(k.state, k.event).next, L::S);
    EXPECT_NE(k.event, E::SnoopReadClean);
  }
  // Stale write-back rows exist for every state, but no row can create Shared.
  for (const DirKey& k : t.dir.keys()) {
    const DirUpdate u = t.dir.at(k.state, k.request, k.role).update;
    EXPECT_NE(u, DirUpdate::AddRequester);
    EXPECT_NE(u, DirUpdate::OwnerAndRequester);
    EXPECT_NE(k.request, DirRequest::ReadClean);
  }
}

TEST(ProtocolTable, MiLoadMissTakesOwnership) {
  const auto t = protocol_table(ProtocolId::MI);
  EXPECT_EQ(t.l1.at(L::I, E::Load).next, L::IM_D);
  EXPECT_EQ(t.l1.at(L::I, E::Load).actions, std::vector<A>{A::IssueReadUnique});
}

TEST(ProtocolTable, ParseNames) {
  EXPECT_EQ(parse_protocol("MSI"), ProtocolId::MSI);
  EXPECT_EQ(parse_protocol("mi"), ProtocolId::MI);
  EXPECT_THROW(parse_protocol("moesi"), UnknownProtocol);
  EXPECT_THROW(protocol_table("mesi"), UnknownProtocol);
}

TEST(ProtocolTable, BothTablesAreClosed) {
  EXPECT_TRUE(check_table_closure(protocol_table(ProtocolId::MSI).l1).empty());
  EXPECT_TRUE(check_table_closure(protocol_table(ProtocolId::MI).l1).empty());
}

TEST(ProtocolTable, ClosureFindsMissingRows) {
  auto t = protocol_table(ProtocolId::MSI);
  t.l1.erase(L::IS_D, E::DataResp);
  const auto gaps = check_table_closure(t.l1);
  ASSERT_FALSE(gaps.empty());
  t = protocol_table(ProtocolId::MSI);
  t.l1.erase(L::S, E::Load);
  EXPECT_FALSE(check_table_closure(t.l1).empty());
}

TEST(ProtocolTable, StoresWriteDataOnEveryPathToM) {
  // Every row entering M from a non-M state must merge the pending store.
  for (ProtocolId id : {ProtocolId::MSI, ProtocolId::MI}) {
    const auto t = protocol_table(id);
    for (const L1Key& k : t.l1.keys()) {
      const L1Row& r = t.l1.at(k.state, k.event);
      if (r.next == L::M && k.state != L::M) {
        EXPECT_TRUE(has(r.actions, A::WriteData));
      }
    }
  }
}

TEST(ProtocolTable, CsvDump) {
  const auto t = protocol_table(ProtocolId::MSI);
  const std::string csv = dump_csv(t.l1);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(t.l1.size() + 1));
  EXPECT_EQ(csv.rfind("state,event,next_state,actions\n", 0), 0u);
  EXPECT_NE(csv.find("M,SnoopReadUnique,I,SupplyData|InvalidateSelf"), std::string::npos);
}

TEST(DirTransition, UncachedReadCleanReadsMemory) {
  const auto t = protocol_table(ProtocolId::MSI);
  const DirOutcome o = dir_transition(t.dir, DirectoryEntry{}, DirRequest::ReadClean, 2);
  EXPECT_EQ(o.next.state, DirState::Shared);
  EXPECT_EQ(o.next.sharers, bits({2}));
  EXPECT_TRUE(o.has(DirAction::ReadMemory));
  EXPECT_TRUE(o.has(DirAction::ReplyData));
  EXPECT_EQ(o.snoop_targets, 0u);
}

TEST(DirTransition, ReadUniqueInvalidatesOtherSharers) {
  const auto t = protocol_table(ProtocolId::MSI);
  const DirectoryEntry e{DirState::Shared, bits({0, 1, 3}), 0};
  const DirOutcome o = dir_transition(t.dir, e, DirRequest::ReadUnique, 0);
  EXPECT_EQ(o.next.state, DirState::Modified);
  EXPECT_EQ(o.next.owner, 0u);
  EXPECT_EQ(o.next.sharers, bits({0}));
  EXPECT_TRUE(o.has(DirAction::SnoopAllSharers));
  EXPECT_TRUE(o.has(DirAction::ReplyData));
  EXPECT_EQ(o.snoop_targets, bits({1, 3}));
}

TEST(DirTransition, ReadCleanWithOwnerSharesTheLine) {
  const auto t = protocol_table(ProtocolId::MSI);
  const DirectoryEntry e{DirState::Modified, bits({1}), 1};
  const DirOutcome o = dir_transition(t.dir, e, DirRequest::ReadClean, 3);
  EXPECT_EQ(o.next.state, DirState::Shared);
  EXPECT_EQ(o.next.sharers, bits({1, 3}));
  EXPECT_EQ(o.snoop_targets, bits({1}));
  EXPECT_TRUE(o.has(DirAction::SnoopOwner));
  EXPECT_TRUE(o.has(DirAction::WriteMemory));
}

TEST(DirTransition, LastEvictClearsEntry) {
  const auto t = protocol_table(ProtocolId::MSI);
  const DirectoryEntry e{DirState::Shared, bits({4}), 0};
  const DirOutcome o = dir_transition(t.dir, e, DirRequest::Evict, 4);
  EXPECT_EQ(o.next.state, DirState::Uncached);
  EXPECT_EQ(o.next.sharers, 0u);
}

TEST(DirTransition, OwnerWriteBackWritesMemory) {
  const auto t = protocol_table(ProtocolId::MSI);
  const DirectoryEntry e{DirState::Modified, bits({2}), 2};
  const DirOutcome o = dir_transition(t.dir, e, DirRequest::WriteBack, 2);
  EXPECT_EQ(o.next.state, DirState::Uncached);
  EXPECT_TRUE(o.has(DirAction::WriteMemory));
}

TEST(DirTransition, RolesFollowTheEntry) {
  const DirectoryEntry sh{DirState::Shared, bits({0, 5}), 0};
  EXPECT_EQ(role_of(sh, 5), RequesterRole::Sharer);
  EXPECT_EQ(role_of(sh, 1), RequesterRole::None);
  const DirectoryEntry mo{DirState::Modified, bits({7}), 7};
  EXPECT_EQ(role_of(mo, 7), RequesterRole::Owner);
  EXPECT_EQ(role_of(mo, 6), RequesterRole::None);
  EXPECT_EQ(role_of(DirectoryEntry{}, 0), RequesterRole::None);
}

TEST(DirTransition, UndefinedRowThrows) {
  const auto t = protocol_table(ProtocolId::MI);
  EXPECT_THROW(dir_transition(t.dir, DirectoryEntry{}, DirRequest::ReadClean, 0),
               ProtocolViolation);
}

TEST(Coverage, AllZeroAndAllHit) {
  const auto t = protocol_table(ProtocolId::MSI);
  CoverageCounters c;
  auto s = coverage_report(c, t.l1);
  EXPECT_EQ(s.fraction, 0.0);
  EXPECT_EQ(s.unhit.size(), t.l1.size());
  for (const L1Key& k : t.l1.keys()) l1_transition(t.l1, k.state, k.event, &c);
  s = coverage_report(c, t.l1);
  EXPECT_EQ(s.fraction, 1.0);
  EXPECT_TRUE(s.unhit.empty());
}

TEST(Coverage, PartialFraction) {
  const auto t = protocol_table(ProtocolId::MSI);
  const auto keys = t.l1.keys();
  CoverageCounters c;
  const std::size_t n_hit = keys.size() * 3 / 4;
  for (std::size_t i = 0; i < n_hit; ++i) l1_transition(t.l1, keys[i].state, keys[i].event, &c);
  const auto s = coverage_report(c, t.l1);
  EXPECT_EQ(s.defined, keys.size());
  EXPECT_EQ(s.hit, n_hit);
  EXPECT_DOUBLE_EQ(s.fraction, static_cast<double>(n_hit) / static_cast<double>(keys.size()));
  EXPECT_EQ(s.unhit.size(), keys.size() - n_hit);
}

TEST(Coverage, MergeIsMonotone) {
  CoverageCounters a;
  CoverageCounters b;
  a.l1_rows[3] = 2;
  b.l1_rows[3] = 5;
  b.dir_actions[1] = 1;
  a.merge(b);
  EXPECT_EQ(a.l1_rows[3], 7u);
  EXPECT_EQ(a.dir_actions[1], 1u);
}

TEST(Mutation, EachChangesTheTables) {
  const auto base = protocol_table(ProtocolId::MSI);
  std::set<std::string_view> names;
  ASSERT_GE(all_mutations().size(), 5u);
  for (Mutation m : all_mutations()) {
    names.insert(to_string(m));
    const auto t = mutate(base, m);
    EXPECT_TRUE(dump_csv(t.l1) != dump_csv(base.l1) || dump_csv(t.dir) != dump_csv(base.dir))
        << to_string(m);
  }
  EXPECT_EQ(names.size(), all_mutations().size());
}

TEST(Mutation, SharerKeepsLineDropsInvalidate) {
  const auto t = mutate(protocol_table(ProtocolId::MSI), Mutation::SharerKeepsLineOnReadUnique);
  EXPECT_FALSE(has(t.l1.at(L::S, E::SnoopReadUnique).actions, A::InvalidateSelf));
}

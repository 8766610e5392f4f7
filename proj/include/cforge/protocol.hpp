#pragma once

// Data-driven coherence protocol tables.
//
// The L1 table maps (LineState, ProtocolEvent) to a next state plus an ordered
// action list. The directory table maps (DirState, DirRequest, RequesterRole)
// to a directory update rule plus an ordered action list. Both are plain
// values: the simulator reads them, mutation tests copy and edit them.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cforge/types.hpp"

namespace cforge {

enum class LineState : std::uint8_t { I, S, M, IS_D, IM_D, SM_D, MI_A, SI_A };
inline constexpr std::size_t kNumLineStates = 8;

enum class ProtocolEvent : std::uint8_t {
  Load,
  Store,
  Evict,
  DataResp,
  WriteBackAck,
  InvAck,
  SnoopReadClean,
  SnoopReadUnique,
};
inline constexpr std::size_t kNumEvents = 8;

enum class Action : std::uint8_t {
  IssueReadClean,
  IssueReadUnique,
  IssueWriteBack,
  IssueEvict,
  SupplyData,
  InvalidateSelf,
  ReplyCpu,
  // Merges the MSHR's store bytes into the line; no-op when the pending op is a load.
  WriteData,
  Stall,
};
inline constexpr std::size_t kNumActions = 9;

enum class ProtocolId : std::uint8_t { MSI, MI };

enum class DirState : std::uint8_t { Uncached, Shared, Modified };
inline constexpr std::size_t kNumDirStates = 3;

enum class DirRequest : std::uint8_t { ReadClean, ReadUnique, WriteBack, Evict };
inline constexpr std::size_t kNumDirRequests = 4;

/// How the requester relates to the current directory entry.
enum class RequesterRole : std::uint8_t { None, Sharer, Owner };
inline constexpr std::size_t kNumRoles = 3;

enum class DirAction : std::uint8_t {
  SnoopOwner,
  SnoopAllSharers,  // every sharer except the requester
  ReadMemory,
  WriteMemory,
  ReplyData,  // to a requester that already shares the line this is a data-less grant
  ClearEntry,
};
inline constexpr std::size_t kNumDirActions = 6;

enum class DirUpdate : std::uint8_t {
  Unchanged,
  AddRequester,      // Shared, sharers |= requester
  OwnerAndRequester, // Shared{owner, requester}
  MakeOwner,         // Modified{requester}
  RemoveRequester,   // sharers &= ~requester; Uncached when empty
  Clear,             // Uncached
};

std::string_view to_string(LineState s);
std::string_view to_string(ProtocolEvent e);
std::string_view to_string(Action a);
std::string_view to_string(ProtocolId p);
std::string_view to_string(DirState s);
std::string_view to_string(DirRequest r);
std::string_view to_string(RequesterRole r);
std::string_view to_string(DirAction a);

/// Accepts "msi"/"mi" in any case.
ProtocolId parse_protocol(std::string_view name);

constexpr bool is_stable(LineState s) {
  return s == LineState::I || s == LineState::S || s == LineState::M;
}

struct L1Row {
  LineState next = LineState::I;
  std::vector<Action> actions;

  friend bool operator==(const L1Row&, const L1Row&) = default;
};

struct L1Key {
  LineState state;
  ProtocolEvent event;

  friend bool operator==(const L1Key&, const L1Key&) = default;
};

class L1Table {
 public:
  void define(LineState state, ProtocolEvent event, LineState next, std::vector<Action> actions);
  void erase(LineState state, ProtocolEvent event);

  const L1Row* find(LineState state, ProtocolEvent event) const;
  /// Throws ProtocolViolation for an undefined pair.
  const L1Row& at(LineState state, ProtocolEvent event) const;

  /// Defined keys in (state, event) enumeration order.
  std::vector<L1Key> keys() const;
  std::size_t size() const;

  static constexpr std::size_t index(LineState s, ProtocolEvent e) {
    return static_cast<std::size_t>(s) * kNumEvents + static_cast<std::size_t>(e);
  }

 private:
  std::array<std::optional<L1Row>, kNumLineStates * kNumEvents> rows_{};
};

struct DirRow {
  DirUpdate update = DirUpdate::Unchanged;
  std::vector<DirAction> actions;

  friend bool operator==(const DirRow&, const DirRow&) = default;
};

struct DirKey {
  DirState state;
  DirRequest request;
  RequesterRole role;

  friend bool operator==(const DirKey&, const DirKey&) = default;
};

class DirTable {
 public:
  void define(DirState state, DirRequest request, RequesterRole role, DirUpdate update,
              std::vector<DirAction> actions);
  void erase(DirState state, DirRequest request, RequesterRole role);

  const DirRow* find(DirState state, DirRequest request, RequesterRole role) const;
  const DirRow& at(DirState state, DirRequest request, RequesterRole role) const;

  std::vector<DirKey> keys() const;
  std::size_t size() const;

  static constexpr std::size_t index(DirState s, DirRequest r, RequesterRole role) {
    return (static_cast<std::size_t>(s) * kNumDirRequests + static_cast<std::size_t>(r)) *
               kNumRoles +
           static_cast<std::size_t>(role);
  }

 private:
  std::array<std::optional<DirRow>, kNumDirStates * kNumDirRequests * kNumRoles> rows_{};
};

struct ProtocolTables {
  ProtocolId id = ProtocolId::MSI;
  L1Table l1;
  DirTable dir;
};

/// Compiled-in tables for a supported protocol.
ProtocolTables protocol_table(ProtocolId id);
/// Same, by name; throws UnknownProtocol for anything but msi/mi.
ProtocolTables protocol_table(std::string_view name);

/// Hit counters, owned by whoever runs the simulation.
struct CoverageCounters {
  std::array<std::uint64_t, kNumLineStates * kNumEvents> l1_rows{};
  std::array<std::uint64_t, kNumActions> l1_actions{};
  std::array<std::uint64_t, kNumDirStates * kNumDirRequests * kNumRoles> dir_rows{};
  std::array<std::uint64_t, kNumDirActions> dir_actions{};

  void merge(const CoverageCounters& other);
};

/// Returns the row verbatim and bumps `counters` when given.
const L1Row& l1_transition(const L1Table& table, LineState state, ProtocolEvent event,
                           CoverageCounters* counters = nullptr);

struct DirectoryEntry {
  DirState state = DirState::Uncached;
  std::uint64_t sharers = 0;
  CoreId owner = 0;  // meaningful only in Modified

  friend bool operator==(const DirectoryEntry&, const DirectoryEntry&) = default;
};

RequesterRole role_of(const DirectoryEntry& entry, CoreId requester);

struct DirOutcome {
  DirectoryEntry next;
  std::vector<DirAction> actions;
  std::uint64_t snoop_targets = 0;  // cores to receive an AC snoop

  bool has(DirAction a) const;
};

/// Applies the directory table. Throws ProtocolViolation for an undefined row.
DirOutcome dir_transition(const DirTable& table, const DirectoryEntry& entry, DirRequest request,
                          CoreId requester, CoverageCounters* counters = nullptr);

struct RowHit {
  L1Key key;
  std::uint64_t hits;
};

struct CoverageSummary {
  std::vector<RowHit> rows;
  std::vector<L1Key> unhit;
  std::size_t defined = 0;
  std::size_t hit = 0;
  double fraction = 0.0;

  std::string to_text() const;
};

CoverageSummary coverage_report(const CoverageCounters& counters, const L1Table& table);

/// One `state,event,next_state,actions` line per row, actions joined by '|'.
std::string dump_csv(const L1Table& table);
std::string dump_csv(const DirTable& table);

/// Reachable-state walk from I over defined rows. Returns one message per gap:
/// a reachable stable state missing a CPU event, or a reachable transient
/// state with no row that leaves it.
std::vector<std::string> check_table_closure(const L1Table& table);

/// Seeded protocol bugs used to measure the random tester's detection power.
enum class Mutation : std::uint8_t {
  SharerKeepsLineOnReadUnique,
  OwnerKeepsLineOnReadUnique,
  OwnerSkipsDataOnReadClean,
  StoreDataDropped,
  DirKeepsSharerOnEvict,
  DirSkipsSharerInvalidation,
  DirSkipsMemoryUpdateOnDowngrade,
  DirSkipsWriteBackData,
};

std::vector<Mutation> all_mutations();
std::string_view to_string(Mutation m);
ProtocolTables mutate(ProtocolTables tables, Mutation m);

}  // namespace cforge

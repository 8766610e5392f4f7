#include "cforge/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <set>
#include <sstream>

#include "cforge/errors.hpp"

namespace cforge {

std::string_view to_string(LineState s) {
  switch (s) {
    case LineState::I: return "I";
    case LineState::S: return "S";
    case LineState::M: return "M";
    case LineState::IS_D: return "IS_D";
    case LineState::IM_D: return "IM_D";
    case LineState::SM_D: return "SM_D";
    case LineState::MI_A: return "MI_A";
    case LineState::SI_A: return "SI_A";
  }
  return "?";
}

std::string_view to_string(ProtocolEvent e) {
  switch (e) {
    case ProtocolEvent::Load: return "Load";
    case ProtocolEvent::Store: return "Store";
    case ProtocolEvent::Evict: return "Evict";
    case ProtocolEvent::DataResp: return "DataResp";
    case ProtocolEvent::WriteBackAck: return "WriteBackAck";
    case ProtocolEvent::InvAck: return "InvAck";
    case ProtocolEvent::SnoopReadClean: return "SnoopReadClean";
    case ProtocolEvent::SnoopReadUnique: return "SnoopReadUnique";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::IssueReadClean: return "IssueReadClean";
    case Action::IssueReadUnique: return "IssueReadUnique";
    case Action::IssueWriteBack: return "IssueWriteBack";
    case Action::IssueEvict: return "IssueEvict";
    case Action::SupplyData: return "SupplyData";
    case Action::InvalidateSelf: return "InvalidateSelf";
    case Action::ReplyCpu: return "ReplyCpu";
    case Action::WriteData: return "WriteData";
    case Action::Stall: return "Stall";
  }
  return "?";
}

std::string_view to_string(ProtocolId p) { return p == ProtocolId::MSI ? "msi" : "mi"; }

std::string_view to_string(DirState s) {
  switch (s) {
    case DirState::Uncached: return "Uncached";
    case DirState::Shared: return "Shared";
    case DirState::Modified: return "Modified";
  }
  return "?";
}

std::string_view to_string(DirRequest r) {
  switch (r) {
    case DirRequest::ReadClean: return "ReadClean";
    case DirRequest::ReadUnique: return "ReadUnique";
    case DirRequest::WriteBack: return "WriteBack";
    case DirRequest::Evict: return "Evict";
  }
  return "?";
}

std::string_view to_string(RequesterRole r) {
  switch (r) {
    case RequesterRole::None: return "None";
    case RequesterRole::Sharer: return "Sharer";
    case RequesterRole::Owner: return "Owner";
  }
  return "?";
}

std::string_view to_string(DirAction a) {
  switch (a) {
    case DirAction::SnoopOwner: return "SnoopOwner";
    case DirAction::SnoopAllSharers: return "SnoopAllSharers";
    case DirAction::ReadMemory: return "ReadMemory";
    case DirAction::WriteMemory: return "WriteMemory";
    case DirAction::ReplyData: return "ReplyData";
    case DirAction::ClearEntry: return "ClearEntry";
  }
  return "?";
}

static std::string_view to_string(DirUpdate u) {
  switch (u) {
    case DirUpdate::Unchanged: return "Unchanged";
    case DirUpdate::AddRequester: return "AddRequester";
    case DirUpdate::OwnerAndRequester: return "OwnerAndRequester";
    case DirUpdate::MakeOwner: return "MakeOwner";
    case DirUpdate::RemoveRequester: return "RemoveRequester";
    case DirUpdate::Clear: return "Clear";
  }
  return "?";
}

ProtocolId parse_protocol(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "msi") return ProtocolId::MSI;
  if (lower == "mi") return ProtocolId::MI;
  throw UnknownProtocol("unsupported protocol '" + std::string(name) + "' (expected msi or mi)");
}

// ---------------------------------------------------------------------------

void L1Table::define(LineState state, ProtocolEvent event, LineState next,
                     std::vector<Action> actions) {
  rows_[index(state, event)] = L1Row{next, std::move(actions)};
}

void L1Table::erase(LineState state, ProtocolEvent event) { rows_[index(state, event)].reset(); }

const L1Row* L1Table::find(LineState state, ProtocolEvent event) const {
  const auto& row = rows_[index(state, event)];
  return row ? &*row : nullptr;
}

const L1Row& L1Table::at(LineState state, ProtocolEvent event) const {
  if (const L1Row* row = find(state, event)) return *row;
  throw ProtocolViolation("L1 protocol violation: no transition for (" +
                          std::string(to_string(state)) + ", " + std::string(to_string(event)) +
                          ")");
}

std::vector<L1Key> L1Table::keys() const {
  std::vector<L1Key> out;
  for (std::size_t s = 0; s < kNumLineStates; ++s) {
    for (std::size_t e = 0; e < kNumEvents; ++e) {
      auto state = static_cast<LineState>(s);
      auto event = static_cast<ProtocolEvent>(e);
      if (find(state, event)) out.push_back({state, event});
    }
  }
  return out;
}

std::size_t L1Table::size() const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.has_value(); }));
}

void DirTable::define(DirState state, DirRequest request, RequesterRole role, DirUpdate update,
                      std::vector<DirAction> actions) {
  rows_[index(state, request, role)] = DirRow{update, std::move(actions)};
}

void DirTable::erase(DirState state, DirRequest request, RequesterRole role) {
  rows_[index(state, request, role)].reset();
}

const DirRow* DirTable::find(DirState state, DirRequest request, RequesterRole role) const {
  const auto& row = rows_[index(state, request, role)];
  return row ? &*row : nullptr;
}

const DirRow& DirTable::at(DirState state, DirRequest request, RequesterRole role) const {
  if (const DirRow* row = find(state, request, role)) return *row;
  throw ProtocolViolation("directory protocol violation: no transition for (" +
                          std::string(to_string(state)) + ", " + std::string(to_string(request)) +
                          " from " + std::string(to_string(role)) + ")");
}

std::vector<DirKey> DirTable::keys() const {
  std::vector<DirKey> out;
  for (std::size_t s = 0; s < kNumDirStates; ++s) {
    for (std::size_t r = 0; r < kNumDirRequests; ++r) {
      for (std::size_t role = 0; role < kNumRoles; ++role) {
        DirKey key{static_cast<DirState>(s), static_cast<DirRequest>(r),
                   static_cast<RequesterRole>(role)};
        if (find(key.state, key.request, key.role)) out.push_back(key);
      }
    }
  }
  return out;
}

std::size_t DirTable::size() const {
  return static_cast<std::size_t>(
      std::count_if(rows_.begin(), rows_.end(), [](const auto& r) { return r.has_value(); }));
}

// ---------------------------------------------------------------------------

namespace {

using enum LineState;
using enum ProtocolEvent;
using A = Action;
using D = DirAction;
using U = DirUpdate;
using R = DirRequest;
using Role = RequesterRole;

// Write-back/evict requests from a core the directory no longer tracks are
// stale (the line was taken by a snoop while the request was queued): drop
// them without touching memory.
void define_stale_writebacks(DirTable& dir, bool with_evict) {
  for (DirState s : {DirState::Uncached, DirState::Shared, DirState::Modified}) {
    dir.define(s, R::WriteBack, Role::None, U::Unchanged, {});
    if (with_evict) dir.define(s, R::Evict, Role::None, U::Unchanged, {});
  }
}

ProtocolTables msi_tables() {
  ProtocolTables t;
  t.id = ProtocolId::MSI;
  L1Table& l1 = t.l1;

  l1.define(I, Load, IS_D, {A::IssueReadClean});
  l1.define(I, Store, IM_D, {A::IssueReadUnique});

  l1.define(S, Load, S, {A::ReplyCpu});
  l1.define(S, Store, SM_D, {A::IssueReadUnique});
  l1.define(S, Evict, SI_A, {A::IssueEvict});
  l1.define(S, SnoopReadUnique, I, {A::InvalidateSelf});

  l1.define(M, Load, M, {A::ReplyCpu});
  l1.define(M, Store, M, {A::WriteData, A::ReplyCpu});
  l1.define(M, Evict, MI_A, {A::IssueWriteBack});
  l1.define(M, SnoopReadClean, S, {A::SupplyData});
  l1.define(M, SnoopReadUnique, I, {A::SupplyData, A::InvalidateSelf});

  l1.define(IS_D, DataResp, S, {A::ReplyCpu});
  l1.define(IM_D, DataResp, M, {A::WriteData, A::ReplyCpu});

  l1.define(SM_D, InvAck, M, {A::WriteData, A::ReplyCpu});
  // Lost the upgrade race: our copy is gone, the queued ReadUnique now fetches data.
  l1.define(SM_D, SnoopReadUnique, IM_D, {A::InvalidateSelf});

  l1.define(MI_A, WriteBackAck, I, {});
  // The write-back is still queued; hand the data over and wait for its ack as a non-owner.
  l1.define(MI_A, SnoopReadClean, SI_A, {A::SupplyData});
  l1.define(MI_A, SnoopReadUnique, SI_A, {A::SupplyData, A::InvalidateSelf});

  l1.define(SI_A, WriteBackAck, I, {});
  l1.define(SI_A, SnoopReadUnique, SI_A, {A::InvalidateSelf});

  DirTable& dir = t.dir;
  dir.define(DirState::Uncached, R::ReadClean, Role::None, U::AddRequester,
             {D::ReadMemory, D::ReplyData});
  dir.define(DirState::Uncached, R::ReadUnique, Role::None, U::MakeOwner,
             {D::ReadMemory, D::ReplyData});
  dir.define(DirState::Shared, R::ReadClean, Role::None, U::AddRequester,
             {D::ReadMemory, D::ReplyData});
  dir.define(DirState::Shared, R::ReadUnique, Role::None, U::MakeOwner,
             {D::SnoopAllSharers, D::ReadMemory, D::ReplyData});
  dir.define(DirState::Shared, R::ReadUnique, Role::Sharer, U::MakeOwner,
             {D::SnoopAllSharers, D::ReplyData});
  dir.define(DirState::Modified, R::ReadClean, Role::None, U::OwnerAndRequester,
             {D::SnoopOwner, D::ReplyData, D::WriteMemory});
  dir.define(DirState::Modified, R::ReadUnique, Role::None, U::MakeOwner,
             {D::SnoopOwner, D::ReplyData});
  dir.define(DirState::Modified, R::WriteBack, Role::Owner, U::Clear,
             {D::WriteMemory, D::ClearEntry});
  // A sharer's write-back after a ReadClean snoop took its dirty data: memory is already current.
  dir.define(DirState::Shared, R::WriteBack, Role::Sharer, U::RemoveRequester, {});
  dir.define(DirState::Shared, R::Evict, Role::Sharer, U::RemoveRequester, {});
  define_stale_writebacks(dir, true);
  return t;
}

ProtocolTables mi_tables() {
  ProtocolTables t;
  t.id = ProtocolId::MI;
  L1Table& l1 = t.l1;

  l1.define(I, Load, IM_D, {A::IssueReadUnique});
  l1.define(I, Store, IM_D, {A::IssueReadUnique});

  l1.define(M, Load, M, {A::ReplyCpu});
  l1.define(M, Store, M, {A::WriteData, A::ReplyCpu});
  l1.define(M, Evict, MI_A, {A::IssueWriteBack});
  l1.define(M, SnoopReadUnique, I, {A::SupplyData, A::InvalidateSelf});

  l1.define(IM_D, DataResp, M, {A::WriteData, A::ReplyCpu});

  l1.define(MI_A, WriteBackAck, I, {});
  // SI_A here means "write-back pending, ownership already lost"; MI never has sharers.
  l1.define(MI_A, SnoopReadUnique, SI_A, {A::SupplyData, A::InvalidateSelf});
  l1.define(SI_A, WriteBackAck, I, {});

  DirTable& dir = t.dir;
  dir.define(DirState::Uncached, R::ReadUnique, Role::None, U::MakeOwner,
             {D::ReadMemory, D::ReplyData});
  dir.define(DirState::Modified, R::ReadUnique, Role::None, U::MakeOwner,
             {D::SnoopOwner, D::ReplyData});
  dir.define(DirState::Modified, R::WriteBack, Role::Owner, U::Clear,
             {D::WriteMemory, D::ClearEntry});
  define_stale_writebacks(dir, false);
  return t;
}

}  // namespace

ProtocolTables protocol_table(ProtocolId id) {
  switch (id) {
    case ProtocolId::MSI: return msi_tables();
    case ProtocolId::MI: return mi_tables();
  }
  throw UnknownProtocol("unknown protocol id");
}

ProtocolTables protocol_table(std::string_view name) { return protocol_table(parse_protocol(name)); }

void CoverageCounters::merge(const CoverageCounters& other) {
  for (std::size_t i = 0; i < l1_rows.size(); ++i) l1_rows[i] += other.l1_rows[i];
  for (std::size_t i = 0; i < l1_actions.size(); ++i) l1_actions[i] += other.l1_actions[i];
  for (std::size_t i = 0; i < dir_rows.size(); ++i) dir_rows[i] += other.dir_rows[i];
  for (std::size_t i = 0; i < dir_actions.size(); ++i) dir_actions[i] += other.dir_actions[i];
}

const L1Row& l1_transition(const L1Table& table, LineState state, ProtocolEvent event,
                           CoverageCounters* counters) {
  const L1Row& row = table.at(state, event);
  if (counters) {
    ++counters->l1_rows[L1Table::index(state, event)];
    for (Action a : row.actions) ++counters->l1_actions[static_cast<std::size_t>(a)];
  }
  return row;
}

RequesterRole role_of(const DirectoryEntry& entry, CoreId requester) {
  const std::uint64_t bit = std::uint64_t{1} << requester;
  if (entry.state == DirState::Modified && entry.owner == requester) return RequesterRole::Owner;
  if (entry.state == DirState::Shared && (entry.sharers & bit)) return RequesterRole::Sharer;
  return RequesterRole::None;
}

bool DirOutcome::has(DirAction a) const {
  return std::find(actions.begin(), actions.end(), a) != actions.end();
}

DirOutcome dir_transition(const DirTable& table, const DirectoryEntry& entry, DirRequest request,
                          CoreId requester, CoverageCounters* counters) {
  if (requester >= 64) throw ProtocolViolation("requester id out of range");
  const RequesterRole role = role_of(entry, requester);
  const DirRow& row = table.at(entry.state, request, role);
  if (counters) {
    ++counters->dir_rows[DirTable::index(entry.state, request, role)];
    for (DirAction a : row.actions) ++counters->dir_actions[static_cast<std::size_t>(a)];
  }

  const std::uint64_t bit = std::uint64_t{1} << requester;
  DirOutcome out;
  out.actions = row.actions;
  for (DirAction a : row.actions) {
    if (a == DirAction::SnoopOwner && entry.state == DirState::Modified) {
      out.snoop_targets |= std::uint64_t{1} << entry.owner;
    } else if (a == DirAction::SnoopAllSharers) {
      out.snoop_targets |= entry.sharers & ~bit;
    }
  }

  DirectoryEntry next = entry;
  switch (row.update) {
    case DirUpdate::Unchanged:
      break;
    case DirUpdate::AddRequester:
      next.state = DirState::Shared;
      next.sharers = entry.sharers | bit;
      next.owner = 0;
      break;
    case DirUpdate::OwnerAndRequester:
      next.state = DirState::Shared;
      next.sharers = (std::uint64_t{1} << entry.owner) | bit;
      next.owner = 0;
      break;
    case DirUpdate::MakeOwner:
      next.state = DirState::Modified;
      next.sharers = bit;
      next.owner = requester;
      break;
    case DirUpdate::RemoveRequester:
      next.sharers = entry.sharers & ~bit;
      if (next.sharers == 0) next.state = DirState::Uncached;
      break;
    case DirUpdate::Clear:
      next = DirectoryEntry{};
      break;
  }
  if (next.state == DirState::Uncached) next = DirectoryEntry{};
  if (entry.state != DirState::Uncached && next.state == DirState::Uncached &&
      !out.has(DirAction::ClearEntry)) {
    out.actions.push_back(DirAction::ClearEntry);
  }
  out.next = next;
  return out;
}

// ---------------------------------------------------------------------------

std::string CoverageSummary::to_text() const {
  std::ostringstream os;
  os << "coverage: " << hit << "/" << defined << " rows (" << fraction * 100.0 << "%)\n";
  for (const RowHit& r : rows) {
    os << "  " << to_string(r.key.state) << " x " << to_string(r.key.event) << ": " << r.hits
       << "\n";
  }
  if (!unhit.empty()) {
    os << "unhit:";
    for (const L1Key& k : unhit) os << " (" << to_string(k.state) << "," << to_string(k.event) << ")";
    os << "\n";
  }
  return os.str();
}

CoverageSummary coverage_report(const CoverageCounters& counters, const L1Table& table) {
  CoverageSummary out;
  for (const L1Key& key : table.keys()) {
    const std::uint64_t hits = counters.l1_rows[L1Table::index(key.state, key.event)];
    out.rows.push_back({key, hits});
    ++out.defined;
    if (hits > 0) {
      ++out.hit;
    } else {
      out.unhit.push_back(key);
    }
  }
  out.fraction = out.defined == 0 ? 0.0
                                  : static_cast<double>(out.hit) / static_cast<double>(out.defined);
  return out;
}

std::string dump_csv(const L1Table& table) {
  std::ostringstream os;
  os << "state,event,next_state,actions\n";
  for (const L1Key& key : table.keys()) {
    const L1Row& row = *table.find(key.state, key.event);
    os << to_string(key.state) << ',' << to_string(key.event) << ',' << to_string(row.next) << ',';
    for (std::size_t i = 0; i < row.actions.size(); ++i) {
      if (i) os << '|';
      os << to_string(row.actions[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::string dump_csv(const DirTable& table) {
  std::ostringstream os;
  os << "state,event,next_state,actions\n";
  for (const DirKey& key : table.keys()) {
    const DirRow& row = *table.find(key.state, key.request, key.role);
    os << to_string(key.state) << ',' << to_string(key.request) << '/' << to_string(key.role)
       << ',' << to_string(row.update) << ',';
    for (std::size_t i = 0; i < row.actions.size(); ++i) {
      if (i) os << '|';
      os << to_string(row.actions[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> check_table_closure(const L1Table& table) {
  std::vector<std::string> gaps;
  std::set<LineState> seen{LineState::I};
  std::vector<LineState> work{LineState::I};
  while (!work.empty()) {
    LineState s = work.back();
    work.pop_back();
    for (std::size_t e = 0; e < kNumEvents; ++e) {
      if (const L1Row* row = table.find(s, static_cast<ProtocolEvent>(e))) {
        if (seen.insert(row->next).second) work.push_back(row->next);
      }
    }
  }
  for (LineState s : seen) {
    if (is_stable(s)) {
      for (ProtocolEvent e : {ProtocolEvent::Load, ProtocolEvent::Store}) {
        if (!table.find(s, e)) {
          gaps.push_back("reachable state " + std::string(to_string(s)) + " has no row for " +
                         std::string(to_string(e)));
        }
      }
      if (s != LineState::I && !table.find(s, ProtocolEvent::Evict)) {
        gaps.push_back("reachable state " + std::string(to_string(s)) + " cannot be evicted");
      }
    } else {
      bool leaves = false;
      for (std::size_t e = 0; e < kNumEvents && !leaves; ++e) {
        const L1Row* row = table.find(s, static_cast<ProtocolEvent>(e));
        leaves = row && row->next != s;
      }
      if (!leaves) {
        gaps.push_back("transient state " + std::string(to_string(s)) + " has no exit");
      }
    }
  }
  return gaps;
}

std::vector<Mutation> all_mutations() {
  return {Mutation::SharerKeepsLineOnReadUnique,    Mutation::OwnerKeepsLineOnReadUnique,
          Mutation::OwnerSkipsDataOnReadClean,      Mutation::StoreDataDropped,
          Mutation::DirKeepsSharerOnEvict,          Mutation::DirSkipsSharerInvalidation,
          Mutation::DirSkipsMemoryUpdateOnDowngrade, Mutation::DirSkipsWriteBackData};
}

std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::SharerKeepsLineOnReadUnique: return "sharer-keeps-line-on-read-unique";
    case Mutation::OwnerKeepsLineOnReadUnique: return "owner-keeps-line-on-read-unique";
    case Mutation::OwnerSkipsDataOnReadClean: return "owner-skips-data-on-read-clean";
    case Mutation::StoreDataDropped: return "store-data-dropped";
    case Mutation::DirKeepsSharerOnEvict: return "dir-keeps-sharer-on-evict";
    case Mutation::DirSkipsSharerInvalidation: return "dir-skips-sharer-invalidation";
    case Mutation::DirSkipsMemoryUpdateOnDowngrade: return "dir-skips-memory-update-on-downgrade";
    case Mutation::DirSkipsWriteBackData: return "dir-skips-write-back-data";
  }
  return "?";
}

ProtocolTables mutate(ProtocolTables t, Mutation m) {
  auto drop = [](std::vector<DirAction> actions, DirAction a) {
    actions.erase(std::remove(actions.begin(), actions.end(), a), actions.end());
    return actions;
  };
  switch (m) {
    case Mutation::SharerKeepsLineOnReadUnique:
      t.l1.define(S, SnoopReadUnique, S, {});
      break;
    case Mutation::OwnerKeepsLineOnReadUnique:
      t.l1.define(M, SnoopReadUnique, M, {A::SupplyData});
      break;
    case Mutation::OwnerSkipsDataOnReadClean:
      t.l1.define(M, SnoopReadClean, S, {});
      break;
    case Mutation::StoreDataDropped:
      t.l1.define(IM_D, DataResp, M, {A::ReplyCpu});
      break;
    case Mutation::DirKeepsSharerOnEvict:
      t.dir.define(DirState::Shared, R::Evict, Role::Sharer, U::Unchanged, {});
      break;
    case Mutation::DirSkipsSharerInvalidation: {
      const DirRow row = t.dir.at(DirState::Shared, R::ReadUnique, Role::None);
      t.dir.define(DirState::Shared, R::ReadUnique, Role::None, row.update,
                   drop(row.actions, D::SnoopAllSharers));
      break;
    }
    case Mutation::DirSkipsMemoryUpdateOnDowngrade: {
      const DirRow row = t.dir.at(DirState::Modified, R::ReadClean, Role::None);
      t.dir.define(DirState::Modified, R::ReadClean, Role::None, row.update,
                   drop(row.actions, D::WriteMemory));
      break;
    }
    case Mutation::DirSkipsWriteBackData: {
      const DirRow row = t.dir.at(DirState::Modified, R::WriteBack, Role::Owner);
      t.dir.define(DirState::Modified, R::WriteBack, Role::Owner, row.update,
                   drop(row.actions, D::WriteMemory));
      break;
    }
  }
  return t;
}

}  // namespace cforge

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cforge/protocol.hpp"

namespace cforge {

/// Full-map directory. An entry exists only while some cache holds the line.
class Directory {
 public:
  DirectoryEntry lookup(Addr line_addr) const;
  /// Stores the entry; an Uncached entry removes the line.
  void update(Addr line_addr, const DirectoryEntry& entry);

  std::size_t size() const { return entries_.size(); }
  std::size_t high_water() const { return high_water_; }
  const std::map<Addr, DirectoryEntry>& entries() const { return entries_; }

  /// Structural checks on every entry (Modified has exactly the owner bit,
  /// Shared has at least one sharer). Returns human-readable problems.
  std::vector<std::string> check_entries() const;

 private:
  std::map<Addr, DirectoryEntry> entries_;
  std::size_t high_water_ = 0;
};

std::string describe(const DirectoryEntry& e);

}  // namespace cforge

#include "cforge/directory.hpp"

#include <bit>
#include <sstream>

namespace cforge {

DirectoryEntry Directory::lookup(Addr line_addr) const {
  auto it = entries_.find(line_addr);
  return it == entries_.end() ? DirectoryEntry{} : it->second;
}

void Directory::update(Addr line_addr, const DirectoryEntry& entry) {
  if (entry.state == DirState::Uncached) {
    entries_.erase(line_addr);
    return;
  }
  entries_[line_addr] = entry;
  if (entries_.size() > high_water_) high_water_ = entries_.size();
}

std::vector<std::string> Directory::check_entries() const {
  std::vector<std::string> out;
  for (const auto& [addr, e] : entries_) {
    std::ostringstream os;
    os << "line 0x" << std::hex << addr << std::dec << ": " << describe(e);
    if (e.state == DirState::Modified &&
        (std::popcount(e.sharers) != 1 || e.sharers != (std::uint64_t{1} << e.owner))) {
      out.push_back(os.str() + " Modified without exactly the owner bit");
    } else if (e.state == DirState::Shared && e.sharers == 0) {
      out.push_back(os.str() + " Shared with no sharers");
    } else if (e.state == DirState::Uncached) {
      out.push_back(os.str() + " stored Uncached entry");
    }
  }
  return out;
}

std::string describe(const DirectoryEntry& e) {
  std::ostringstream os;
  os << to_string(e.state) << '{';
  bool first = true;
  for (unsigned i = 0; i < 64; ++i) {
    if (e.sharers & (std::uint64_t{1} << i)) {
      if (!first) os << ',';
      os << i;
      first = false;
    }
  }
  os << '}';
  if (e.state == DirState::Modified) os << " owner=" << e.owner;
  return os.str();
}

}  // namespace cforge

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ghsim/core/event.hpp"

namespace ghsim {

using UserIndex = std::uint32_t;
using RepoIndex = std::uint32_t;
inline constexpr std::uint32_t kNoIndex = std::numeric_limits<std::uint32_t>::max();

struct HistoryEntry {
  EventType type = EventType::Push;
  RepoIndex repo = kNoIndex;
  std::uint32_t count = 0;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(type, repo, count);
  }
};

/// Per-user training summary. Repos are indices into the owning slice's repo table.
struct UserHistory {
  std::string user_id;
  std::vector<HistoryEntry> counts;  // sorted by (type, repo), all counts >= 1
  double rate = 0.0;                 // events per day over `window`
  TimeWindow window;
  std::optional<Timestamp> created_at;

  std::uint64_t total() const {
    std::uint64_t n = 0;
    for (const auto& e : counts) n += e.count;
    return n;
  }

  std::uint32_t count(EventType type, RepoIndex repo) const {
    auto it = std::lower_bound(counts.begin(), counts.end(), std::pair{type, repo},
                               [](const HistoryEntry& e, const std::pair<EventType, RepoIndex>& k) {
                                 return std::pair{e.type, e.repo} < k;
                               });
    return it != counts.end() && it->type == type && it->repo == repo ? it->count : 0;
  }
};

struct RepoState {
  std::string repo_id;
  std::string owner_id;
  std::optional<Timestamp> created_at;
  std::optional<std::string> language;
  std::uint64_t watch_count = 0;  // distinct watchers
  std::uint64_t fork_count = 0;   // distinct forkers
  std::set<std::string> contributors;

  std::uint64_t popularity() const { return watch_count + fork_count; }
};

/// Items kept in descending count order under unit increments. Items sharing a
/// count form a contiguous block; an increment swaps the item to the front of
/// its block, so each unit step is O(1). Order within a block is deterministic
/// but otherwise unspecified.
class PopularityOrder {
 public:
  std::size_t size() const { return order_.size(); }
  std::span<const std::uint32_t> order() const { return order_; }
  std::uint64_t count(std::uint32_t item) const { return count_[item]; }
  std::uint32_t rank_of(std::uint32_t item) const { return pos_[item]; }

  /// Items must be added with consecutive indices 0, 1, 2, ...
  void add(std::uint32_t item, std::uint64_t count = 0) {
    if (item != count_.size()) fail(ErrorCode::InvalidArgument, "PopularityOrder items must be dense");
    count_.push_back(0);
    pos_.push_back(static_cast<std::uint32_t>(order_.size()));
    order_.push_back(item);
    block(0);
    if (block_size_[0]++ == 0) block_start_[0] = pos_[item];
    increment(item, count);
  }

  void increment(std::uint32_t item, std::uint64_t by = 1) {
    for (; by > 0; --by) step(item);
  }

 private:
  void block(std::uint64_t c) {
    if (block_start_.size() <= c) {
      block_start_.resize(c + 1, 0);
      block_size_.resize(c + 1, 0);
    }
  }

  void step(std::uint32_t item) {
    const std::uint64_t c = count_[item];
    block(c + 1);
    const std::uint32_t head = block_start_[c];
    const std::uint32_t other = order_[head];
    std::swap(order_[head], order_[pos_[item]]);
    pos_[other] = pos_[item];
    pos_[item] = head;
    ++block_start_[c];
    --block_size_[c];
    if (block_size_[c + 1]++ == 0) block_start_[c + 1] = head;
    ++count_[item];
  }

  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint64_t> count_;
  std::vector<std::uint32_t> block_start_, block_size_;
};

}  // namespace ghsim

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ghsim/core/error.hpp"
#include "ghsim/core/time.hpp"

namespace ghsim {

enum class EventType : std::uint8_t {
  Create,
  Delete,
  PullRequest,
  PullRequestReviewComment,
  Issues,
  IssueComment,
  Push,
  CommitComment,
  Watch,
  Fork,
};

inline constexpr std::size_t kEventTypeCount = 10;

inline constexpr std::array<EventType, kEventTypeCount> kAllEventTypes = {
    EventType::Create,        EventType::Delete, EventType::PullRequest,
    EventType::PullRequestReviewComment, EventType::Issues, EventType::IssueComment,
    EventType::Push,          EventType::CommitComment, EventType::Watch,
    EventType::Fork,
};

constexpr std::size_t index_of(EventType e) { return static_cast<std::size_t>(e); }

constexpr std::string_view to_string(EventType e) {
  constexpr std::array<std::string_view, kEventTypeCount> names = {
      "Create", "Delete", "PullRequest", "PullRequestReviewComment", "Issues",
      "IssueComment", "Push", "CommitComment", "Watch", "Fork"};
  return names[index_of(e)];
}

/// Case-sensitive. A trailing "Event" (GitHub API naming) is stripped first.
inline EventType parse_event_type(std::string_view s) {
  std::string_view core = s;
  constexpr std::string_view suffix = "Event";
  if (core.size() > suffix.size() && core.substr(core.size() - suffix.size()) == suffix)
    core.remove_suffix(suffix.size());
  for (EventType e : kAllEventTypes)
    if (to_string(e) == core) return e;
  fail(ErrorCode::UnknownEventType, "'" + std::string(s) + "'");
}

/// Create, Watch and Fork happen at most once per (user, repo).
constexpr bool is_one_time(EventType e) {
  return e == EventType::Create || e == EventType::Watch || e == EventType::Fork;
}

/// Contribution events for the contributor metrics.
constexpr bool is_contribution(EventType e) {
  return e == EventType::Push || e == EventType::PullRequest;
}

struct Event {
  Timestamp time = 0;
  EventType type = EventType::Push;
  std::string user;
  std::string repo;

  friend bool operator==(const Event&, const Event&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(time, type, user, repo);
  }
};

/// Canonical order: time, then user, repo, event type.
inline bool event_less(const Event& a, const Event& b) {
  return std::tie(a.time, a.user, a.repo, a.type) < std::tie(b.time, b.user, b.repo, b.type);
}

/// A sorted, immutable sequence of events.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::vector<Event> events) : events_(std::move(events)) {
    std::sort(events_.begin(), events_.end(), event_less);
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }

  /// Events with time inside `w`, still sorted.
  EventLog restrict(const TimeWindow& w) const {
    auto lo = std::lower_bound(events_.begin(), events_.end(), w.start,
                               [](const Event& e, Timestamp t) { return e.time < t; });
    auto hi = std::lower_bound(lo, events_.end(), w.end,
                               [](const Event& e, Timestamp t) { return e.time < t; });
    EventLog out;
    out.events_.assign(lo, hi);
    return out;
  }

  /// [earliest time, latest time + 1); empty window for an empty log.
  TimeWindow span() const {
    if (events_.empty()) return {};
    return {events_.front().time, events_.back().time + 1};
  }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<Event> events_;
};

}  // namespace ghsim

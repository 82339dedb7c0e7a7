#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "ghsim/core/error.hpp"

namespace ghsim {

/// UTC seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;

/// Half-open interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  constexpr bool contains(Timestamp t) const { return t >= start && t < end; }
  constexpr bool empty() const { return end <= start; }
  constexpr Timestamp length() const { return end > start ? end - start : 0; }
  constexpr double days() const { return static_cast<double>(length()) / kSecondsPerDay; }

  friend constexpr bool operator==(const TimeWindow&, const TimeWindow&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(start, end);
  }
};

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* b = s.data() + pos;
  auto [p, ec] = std::from_chars(b, b + len, out);
  return ec == std::errc{} && p == b + len;
}

}  // namespace detail

/// Accepts integer epoch seconds, "YYYY-MM-DD", or "YYYY-MM-DDTHH:MM:SS" with an
/// optional fractional part and an optional "Z" / "+hh:mm" / "-hh:mm" suffix.
inline Timestamp parse_timestamp(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) fail(ErrorCode::InvalidArgument, "empty timestamp");

  const bool numeric = s.find_first_not_of("-0123456789") == std::string_view::npos &&
                       (s.size() < 5 || s[4] != '-');
  if (numeric) {
    Timestamp value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || p != s.data() + s.size())
      fail(ErrorCode::InvalidArgument, "bad epoch timestamp '" + std::string(s) + "'");
    return value;
  }

  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-' || !detail::parse_fixed_int(s, 0, 4, y) ||
      !detail::parse_fixed_int(s, 5, 2, mo) || !detail::parse_fixed_int(s, 8, 2, d))
    fail(ErrorCode::InvalidArgument, "bad ISO-8601 date '" + std::string(s) + "'");

  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (s.size() < pos + 9 || s[pos + 3] != ':' || s[pos + 6] != ':' ||
        !detail::parse_fixed_int(s, pos + 1, 2, h) || !detail::parse_fixed_int(s, pos + 4, 2, mi) ||
        !detail::parse_fixed_int(s, pos + 7, 2, sec))
      fail(ErrorCode::InvalidArgument, "bad ISO-8601 time '" + std::string(s) + "'");
    pos += 9;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
  }

  int offset_seconds = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      ++pos;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!detail::parse_fixed_int(s, pos + 1, 2, oh) || !detail::parse_fixed_int(s, pos + 4, 2, om))
        fail(ErrorCode::InvalidArgument, "bad UTC offset in '" + std::string(s) + "'");
      offset_seconds = (s[pos] == '+' ? 1 : -1) * (oh * 3600 + om * 60);
      pos = s.size();
    }
  }
  if (pos != s.size()) fail(ErrorCode::InvalidArgument, "trailing characters in '" + std::string(s) + "'");

  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
    fail(ErrorCode::InvalidArgument, "out-of-range date '" + std::string(s) + "'");
  const Timestamp days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return days_since_epoch * kSecondsPerDay + h * 3600 + mi * 60 + sec - offset_seconds;
}

/// Always "YYYY-MM-DDTHH:MM:SSZ".
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  Timestamp day_index = t / kSecondsPerDay;
  Timestamp rem = t % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --day_index;
  }
  const year_month_day ymd{sys_days{days{day_index}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return buf;
}

/// "START/END" with either side in any format parse_timestamp accepts.
inline TimeWindow parse_window(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos)
    fail(ErrorCode::InvalidArgument, "window must be START/END, got '" + std::string(s) + "'");
  TimeWindow w{parse_timestamp(s.substr(0, slash)), parse_timestamp(s.substr(slash + 1))};
  if (w.end < w.start) fail(ErrorCode::InvalidArgument, "window end precedes start");
  return w;
}

inline std::string format_window(const TimeWindow& w) {
  return format_timestamp(w.start) + "/" + format_timestamp(w.end);
}

}  // namespace ghsim

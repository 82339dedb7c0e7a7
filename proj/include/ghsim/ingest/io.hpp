#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ghsim/core/event.hpp"

namespace ghsim {

enum class LogFormat { Jsonl, Csv };

inline LogFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "csv") return LogFormat::Csv;
  }
  return LogFormat::Jsonl;
}

struct LoadOptions {
  bool strict = false;
};

struct LoadResult {
  EventLog log;
  std::size_t malformed = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(unquote(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::optional<Event> make_event(std::string_view time, std::string_view type, std::string_view user,
                                       std::string_view repo) {
  if (user.empty() || repo.empty()) return std::nullopt;
  try {
    Event e{parse_timestamp(time), parse_event_type(type), std::string(user), std::string(repo)};
    if (e.time < 0) return std::nullopt;
    return e;
  } catch (const Error&) {
    return std::nullopt;
  }
}

inline std::optional<Event> parse_jsonl_record(std::string_view line) {
  const auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    return std::nullopt;
  };
  auto t = str("time"), ty = str("eventType"), u = str("userID"), r = str("repoID");
  if (!t || !ty || !u || !r) return std::nullopt;
  return make_event(*t, *ty, *u, *r);
}

inline std::optional<Event> parse_csv_record(std::string_view line) {
  const auto f = split_csv(line);
  if (f.size() != 4) return std::nullopt;
  return make_event(f[0], f[1], f[2], f[3]);
}

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

}  // namespace detail

/// Reads a JSON-Lines or CSV event log. Blank lines are skipped; a CSV header
/// row starting with "time" is skipped. Malformed records are counted, or
/// raise MalformedRecord when `opts.strict` is set.
inline LoadResult read_events(std::istream& in, LogFormat format, LoadOptions opts = {}) {
  LoadResult result;
  std::vector<Event> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    if (format == LogFormat::Csv && line_no == 1 && detail::unquote(view.substr(0, view.find(','))) == "time")
      continue;
    auto e = format == LogFormat::Jsonl ? detail::parse_jsonl_record(view) : detail::parse_csv_record(view);
    if (!e) {
      if (opts.strict) fail(ErrorCode::MalformedRecord, "line " + std::to_string(line_no));
      ++result.malformed;
      result.malformed_lines.push_back(line_no);
      continue;
    }
    events.push_back(std::move(*e));
  }
  result.log = EventLog(std::move(events));
  return result;
}

inline LoadResult load_events(const std::string& path, LogFormat format, LoadOptions opts = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return read_events(in, format, opts);
}

inline LoadResult load_events(const std::string& path, LoadOptions opts = {}) {
  return load_events(path, format_for_path(path), opts);
}

inline std::string to_jsonl(const Event& e) {
  std::string out = "{\"time\":\"" + format_timestamp(e.time) + "\",\"eventType\":\"";
  out += to_string(e.type);
  out += "\",\"userID\":" + detail::json_string(e.user) + ",\"repoID\":" + detail::json_string(e.repo) + "}";
  return out;
}

inline void write_events(std::ostream& out, const EventLog& log, LogFormat format) {
  if (format == LogFormat::Csv) out << "time,eventType,userID,repoID\n";
  for (const auto& e : log) {
    if (format == LogFormat::Jsonl) {
      out << to_jsonl(e) << '\n';
    } else {
      out << format_timestamp(e.time) << ',' << to_string(e.type) << ',' << e.user << ',' << e.repo << '\n';
    }
  }
}

inline void save_events(const std::string& path, const EventLog& log, LogFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  write_events(out, log, format);
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

inline void save_events(const std::string& path, const EventLog& log) {
  save_events(path, log, format_for_path(path));
}

inline std::string serialize_events(const EventLog& log, LogFormat format = LogFormat::Jsonl) {
  std::ostringstream out;
  write_events(out, log, format);
  return out.str();
}

// ---------------------------------------------------------------------------
// Metadata tables

struct RepoMeta {
  std::string repo_id;
  std::string owner_id;
  std::optional<Timestamp> created_at;
  std::optional<std::string> language;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(repo_id, owner_id, created_at, language);
  }
};

struct Metadata {
  std::unordered_map<std::string, RepoMeta> repos;
  std::unordered_map<std::string, Timestamp> user_created;

  bool empty() const { return repos.empty() && user_created.empty(); }

  const RepoMeta* repo(const std::string& id) const {
    auto it = repos.find(id);
    return it == repos.end() ? nullptr : &it->second;
  }
  std::optional<Timestamp> user_created_at(const std::string& id) const {
    auto it = user_created.find(id);
    return it == user_created.end() ? std::nullopt : std::optional<Timestamp>(it->second);
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(repos, user_created);
  }
};

/// CSV columns: repo_id, owner_id, created_at, language (last two may be empty).
inline void read_repo_meta(std::istream& in, Metadata& meta) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (line_no == 1 && !f.empty() && f[0] == "repo_id") continue;
    if (f.size() < 2 || f[0].empty())
      fail(ErrorCode::MalformedRecord, "repo metadata line " + std::to_string(line_no));
    RepoMeta m{std::string(f[0]), std::string(f[1]), std::nullopt, std::nullopt};
    if (f.size() > 2 && !f[2].empty()) m.created_at = parse_timestamp(f[2]);
    if (f.size() > 3 && !f[3].empty()) m.language = std::string(f[3]);
    meta.repos[m.repo_id] = std::move(m);
  }
}

/// CSV columns: user_id, created_at.
inline void read_user_meta(std::istream& in, Metadata& meta) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty()) continue;
    const auto f = detail::split_csv(view);
    if (line_no == 1 && !f.empty() && f[0] == "user_id") continue;
    if (f.size() < 2 || f[0].empty() || f[1].empty())
      fail(ErrorCode::MalformedRecord, "user metadata line " + std::to_string(line_no));
    meta.user_created[std::string(f[0])] = parse_timestamp(f[1]);
  }
}

inline Metadata load_metadata(const std::string& repo_path, const std::string& user_path) {
  Metadata meta;
  if (!repo_path.empty()) {
    std::ifstream in(repo_path);
    if (!in) fail(ErrorCode::Io, "cannot open " + repo_path);
    read_repo_meta(in, meta);
  }
  if (!user_path.empty()) {
    std::ifstream in(user_path);
    if (!in) fail(ErrorCode::Io, "cannot open " + user_path);
    read_user_meta(in, meta);
  }
  return meta;
}

inline void write_repo_meta(std::ostream& out, const Metadata& meta) {
  std::vector<const RepoMeta*> rows;
  for (const auto& [id, m] : meta.repos) rows.push_back(&m);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->repo_id < b->repo_id; });
  out << "repo_id,owner_id,created_at,language\n";
  for (const auto* m : rows) {
    out << m->repo_id << ',' << m->owner_id << ',' << (m->created_at ? format_timestamp(*m->created_at) : "")
        << ',' << m->language.value_or("") << '\n';
  }
}

inline void write_user_meta(std::ostream& out, const Metadata& meta) {
  std::vector<std::pair<std::string, Timestamp>> rows(meta.user_created.begin(), meta.user_created.end());
  std::sort(rows.begin(), rows.end());
  out << "user_id,created_at\n";
  for (const auto& [id, t] : rows) out << id << ',' << format_timestamp(t) << '\n';
}

}  // namespace ghsim

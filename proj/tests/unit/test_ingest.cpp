#include <gtest/gtest.h>

#include <sstream>

#include "ghsim/ingest/bipartite.hpp"
#include "ghsim/ingest/io.hpp"
#include "ghsim/ingest/slice.hpp"
#include "support/fixtures.hpp"

using namespace ghsim;
using fixtures::ev;
using fixtures::kDay;
using fixtures::kT0;

TEST(Ingest, StarIsNotAnEventType) { EXPECT_THROW(parse_event_type("Star"), Error); }

TEST(Ingest, ReadsThreeJsonLines) {
  std::istringstream in(
      R"({"time":"2017-08-01T00:00:00Z","eventType":"PushEvent","userID":"u1","repoID":"r1"})"
      "\n"
      R"({"time":1501545700,"eventType":"Watch","userID":"u2","repoID":"r1"})"
      "\n\n"
      R"({"time":"2017-08-01T00:00:01Z","eventType":"Fork","userID":"u1","repoID":"r2"})"
      "\n");
  auto res = read_events(in, LogFormat::Jsonl);
  EXPECT_EQ(res.log.size(), 3u);
  EXPECT_EQ(res.malformed, 0u);
  EXPECT_EQ(res.log[0].type, EventType::Push);
  EXPECT_EQ(res.log[1].type, EventType::Fork);
}

TEST(Ingest, EmptyFileGivesEmptyLog) {
  std::istringstream in("");
  EXPECT_TRUE(read_events(in, LogFormat::Jsonl).log.empty());
}

TEST(Ingest, MissingRepoIsMalformed) {
  const std::string text =
      R"({"time":"2017-08-01T00:00:00Z","eventType":"PushEvent","userID":"u1","repoID":"r1"})"
      "\n"
      R"({"time":"2017-08-01T00:00:00Z","eventType":"PushEvent","userID":"u1"})"
      "\n";
  std::istringstream lenient(text);
  auto res = read_events(lenient, LogFormat::Jsonl);
  EXPECT_EQ(res.log.size(), 1u);
  EXPECT_EQ(res.malformed, 1u);
  ASSERT_EQ(res.malformed_lines.size(), 1u);
  EXPECT_EQ(res.malformed_lines[0], 2u);

  std::istringstream strict(text);
  try {
    read_events(strict, LogFormat::Jsonl, {.strict = true});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
  }
}

TEST(Ingest, MissingFileIsIoError) {
  try {
    load_events("/nonexistent/file.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Ingest, CsvRoundTrip) {
  EventLog log({ev(kT0, EventType::Push, "u1", "r1"), ev(kT0 + 5, EventType::IssueComment, "u2", "r2")});
  const auto text = serialize_events(log, LogFormat::Csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), "time,eventType,userID,repoID");
  std::istringstream in(text);
  EXPECT_EQ(read_events(in, LogFormat::Csv).log, log);
}

TEST(Ingest, JsonlKeyOrderIsFixed) {
  EXPECT_EQ(to_jsonl(ev(kT0, EventType::Watch, "u\"1", "r1")),
            R"({"time":"2017-08-01T00:00:00Z","eventType":"Watch","userID":"u\"1","repoID":"r1"})");
}

TEST(Ingest, SerializationIsStable) {
  auto log = fixtures::random_log(3, 10, 5, 200, kT0, 10);
  const auto once = serialize_events(log);
  std::istringstream in(once);
  EXPECT_EQ(serialize_events(read_events(in, LogFormat::Jsonl).log), once);
}

TEST(Slice, RateIsEventsPerDay) {
  std::vector<Event> events;
  for (int i = 0; i < 30; ++i) events.push_back(ev(kT0 + i * kDay, EventType::Push, "u", "r"));
  auto slice = build_slice(EventLog(events), {kT0, kT0 + 30 * kDay});
  EXPECT_DOUBLE_EQ(slice.history("u").rate, 1.0);
}

TEST(Slice, OwnerFromFirstCreate) {
  EventLog log({ev(kT0, EventType::Push, "u1", "r"), ev(kT0 + 1, EventType::Create, "u7", "r"),
                ev(kT0 + 2, EventType::Create, "u8", "r")});
  auto slice = build_slice(log, {kT0, kT0 + kDay});
  EXPECT_EQ(slice.repo_states[*slice.find_repo("r")].owner_id, "u7");
}

TEST(Slice, OwnerFallsBackToEarliestEvent) {
  EventLog log({ev(kT0 + 3, EventType::Push, "u2", "r"), ev(kT0 + 1, EventType::Watch, "u1", "r")});
  auto slice = build_slice(log, {kT0, kT0 + kDay});
  EXPECT_EQ(slice.repo_states[0].owner_id, "u1");
}

TEST(Slice, OwnerFromMetadataWins) {
  EventLog log({ev(kT0, EventType::Create, "u1", "r")});
  Metadata meta;
  meta.repos["r"] = RepoMeta{"r", "boss", kT0 - 100, "C++"};
  auto slice = build_slice(log, {kT0, kT0 + kDay}, meta);
  EXPECT_EQ(slice.repo_states[0].owner_id, "boss");
  EXPECT_EQ(slice.repo_states[0].language, "C++");
  EXPECT_EQ(slice.repo_owner[0], kNoIndex);  // owner has no events in the window
}

TEST(Slice, CountsPerTypeAndRepo) {
  EventLog log({ev(kT0, EventType::Push, "u", "r1"), ev(kT0 + 1, EventType::Push, "u", "r1"),
                ev(kT0 + 2, EventType::Push, "u", "r1"), ev(kT0 + 3, EventType::Watch, "u", "r2")});
  auto slice = build_slice(log, {kT0, kT0 + kDay});
  const auto& h = slice.history("u");
  ASSERT_EQ(h.counts.size(), 2u);
  EXPECT_EQ(h.count(EventType::Push, *slice.find_repo("r1")), 3u);
  EXPECT_EQ(h.count(EventType::Watch, *slice.find_repo("r2")), 1u);
}

TEST(Slice, EmptyWindowErrors) {
  EventLog log({ev(kT0, EventType::Push, "u", "r")});
  try {
    build_slice(log, {kT0 + kDay, kT0 + 2 * kDay});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyWindow);
  }
  EXPECT_THROW(build_slice(log, {kT0, kT0}), Error);
}

TEST(Slice, UnknownUserErrors) {
  auto slice = build_slice(EventLog({ev(kT0, EventType::Push, "u", "r")}), {kT0, kT0 + kDay});
  try {
    slice.history("ghost");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownUser);
  }
}

TEST(Slice, EveryEventAttributedOnce) {
  auto log = fixtures::random_log(5, 30, 20, 2000, kT0, 30);
  auto slice = build_slice(log, {kT0, kT0 + 30 * kDay});
  std::uint64_t total = 0;
  for (const auto& h : slice.histories) total += h.total();
  EXPECT_EQ(total, slice.events.size());
}

TEST(Slice, IsPure) {
  auto log = fixtures::random_log(6, 20, 10, 500, kT0, 10);
  auto a = build_slice(log, {kT0, kT0 + 10 * kDay});
  auto b = build_slice(log, {kT0, kT0 + 10 * kDay});
  EXPECT_EQ(a.user_ids, b.user_ids);
  ASSERT_EQ(a.histories.size(), b.histories.size());
  for (std::size_t u = 0; u < a.histories.size(); ++u) {
    EXPECT_EQ(a.histories[u].rate, b.histories[u].rate);
    EXPECT_EQ(a.histories[u].counts.size(), b.histories[u].counts.size());
  }
}

TEST(Bipartite, CountsEdges) {
  EventLog log({ev(kT0, EventType::Push, "u1", "r1"), ev(kT0 + 1, EventType::Push, "u1", "r1"),
                ev(kT0 + 2, EventType::Watch, "u2", "r1")});
  auto slice = build_slice(log, {kT0, kT0 + kDay});
  auto g = build_bipartite(slice, EventType::Push);
  EXPECT_DOUBLE_EQ(g.weight("u1", "r1"), 2.0);
  EXPECT_FALSE(g.user_position("u2").has_value());  // absent row, not a zero row
  EXPECT_EQ(g.user_count(), 1u);
}

TEST(Bipartite, CreateAndDeleteUnsupported) {
  auto slice = build_slice(EventLog({ev(kT0, EventType::Create, "u", "r")}), {kT0, kT0 + kDay});
  for (auto t : {EventType::Create, EventType::Delete}) {
    try {
      build_bipartite(slice, t);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnsupportedEventType);
    }
  }
}

TEST(Bipartite, WeightSumEqualsEventCount) {
  auto log = fixtures::random_log(8, 40, 25, 3000, kT0, 20);
  auto slice = build_slice(log, {kT0, kT0 + 20 * kDay});
  for (auto t : kAllEventTypes) {
    if (t == EventType::Create || t == EventType::Delete) continue;
    auto g = build_bipartite(slice, t);
    std::size_t n = 0;
    for (const auto& e : slice.events) n += e.type == t;
    EXPECT_DOUBLE_EQ(g.total_weight(), double(n)) << to_string(t);
    g.for_each_edge([](std::size_t, std::size_t, double w) { EXPECT_GE(w, 1.0); });
  }
}

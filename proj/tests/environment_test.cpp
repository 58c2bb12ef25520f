#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "helpers.hpp"
#include "toolbench/environment.hpp"
#include "toolbench/stream.hpp"

using namespace toolbench;
using namespace toolbench::testing;

namespace {

ToolCall mk(const char* tool, std::map<std::string, Json> args = {}) {
  return ToolCall{tool, std::move(args)};
}

TaskRecord retrieval_task() {
  TaskRecord t;
  t.task_id = "t-ret-1";
  t.domain = Domain::kRetrieval;
  t.instruction = "search and answer";
  t.tool_schemas = {tool("search", {param("query")}),
                    tool("fetch_document", {param("id")}),
                    tool("submit_answer", {param("text")})};
  t.initial_state =
      Json{{"documents",
            Json{{"doc-a", Json{{"title", "alpha notes"}, {"text", "glacier melt study"}}},
                 {"doc-b", Json{{"title", "beta notes"}, {"text", "harbor traffic log"}}},
                 {"doc-c", Json{{"title", "gamma"}, {"text", "glacier harbor overview"}}}}},
           {"answers", Json::array()}};
  t.success_criteria = {StateContains{"answers", "done"}};
  t.budgets = Budget{12, 10, 2, 1000};
  t.version = "1.0.0";
  return t;
}

}  // namespace

TEST_CASE("validate_call reports unknown tool and bad arguments") {
  Environment env(crud_task());

  auto unknown = env.validate_call(mk("frobnicate"));
  REQUIRE(unknown.has_value());
  CHECK(unknown->code == ErrorCode::kUnknownTool);

  auto bad = env.validate_call(mk("create_record", {{"id", "r1"}, {"extra", 1}}));
  REQUIRE(bad.has_value());
  CHECK(bad->code == ErrorCode::kInvalidArguments);
  CHECK(bad->missing_params == std::vector<std::string>{"fields"});
  CHECK(bad->unknown_params == std::vector<std::string>{"extra"});

  auto wrong_kind =
      env.validate_call(mk("create_record", {{"id", "r1"}, {"fields", "oops"}}));
  REQUIRE(wrong_kind.has_value());
  CHECK(wrong_kind->code == ErrorCode::kInvalidArguments);

  CHECK(!env.validate_call(
      mk("create_record", {{"id", "r1"}, {"fields", Json{{"s", "v"}}}})));
}

TEST_CASE("crud create, update, read, delete semantics") {
  Environment env(crud_task());

  auto created = env.execute(
      mk("create_record", {{"id", "r1"}, {"fields", Json{{"status", "open"}}}}));
  CHECK(created.ok);

  auto dup = env.execute(
      mk("create_record", {{"id", "r1"}, {"fields", Json::object()}}));
  CHECK(!dup.ok);
  CHECK(dup.error.code == ErrorCode::kConflict);

  auto updated = env.execute(
      mk("update_record", {{"id", "r1"}, {"fields", Json{{"owner", "kit"}}}}));
  CHECK(updated.ok);
  CHECK(env.live_state().at("records").at("r1") ==
        Json{{"status", "open"}, {"owner", "kit"}});

  auto missing = env.execute(mk("read_record", {{"id", "nope"}}));
  CHECK(!missing.ok);
  CHECK(missing.error.code == ErrorCode::kNotFound);
}

TEST_CASE("failed executions leave the state digest unchanged") {
  Environment env(crud_task());
  const std::string before = env.state_digest();
  CHECK(!env.execute(mk("read_record", {{"id", "ghost"}})).ok);
  CHECK(env.state_digest() == before);
  CHECK(env.execute(
               mk("create_record", {{"id", "r1"}, {"fields", Json::object()}}))
            .ok);
  CHECK(env.state_digest() != before);
}

TEST_CASE("retrieval ranking scores token overlap, ties by ascending id") {
  const TaskRecord t = retrieval_task();
  // "glacier harbor" matches doc-c twice, doc-a and doc-b once each.
  auto ids = rank_documents(t.initial_state.at("documents"), "glacier harbor");
  CHECK(ids == std::vector<std::string>{"doc-c", "doc-a", "doc-b"});
  // Case and punctuation do not matter; no-overlap documents are dropped.
  ids = rank_documents(t.initial_state.at("documents"), "GLACIER!");
  CHECK(ids == std::vector<std::string>{"doc-a", "doc-c"});
  CHECK(rank_documents(t.initial_state.at("documents"), "unrelated").empty());
}

TEST_CASE("retrieval ranking agrees with a brute-force oracle") {
  SeededStream s(31, "rank-prop");
  const std::vector<std::string> words = {"ice",  "sea",  "rock", "wind",
                                          "moss", "sand", "reef", "peak"};
  for (int round = 0; round < 200; ++round) {
    Json docs = Json::object();
    const uint64_t n = 1 + s.next_below(5);
    for (uint64_t d = 0; d < n; ++d) {
      std::string text;
      const uint64_t len = s.next_below(6);
      for (uint64_t w = 0; w < len; ++w)
        text += words[s.next_below(words.size())] + " ";
      docs["d" + std::to_string(d)] = Json{{"text", text}};
    }
    std::string query;
    const uint64_t qlen = 1 + s.next_below(3);
    for (uint64_t w = 0; w < qlen; ++w)
      query += words[s.next_below(words.size())] + " ";

    // Oracle: distinct-token overlap, computed with plain string scanning.
    auto tokens = [](const std::string& text) {
      std::set<std::string> out;
      std::string cur;
      for (char ch : text + " ") {
        if (ch == ' ') {
          if (!cur.empty()) out.insert(cur);
          cur.clear();
        } else {
          cur.push_back(ch);
        }
      }
      return out;
    };
    const auto qtok = tokens(query);
    std::vector<std::pair<int, std::string>> expect;
    for (const auto& [id, doc] : docs.items()) {
      int score = 0;
      const auto dtok = tokens(doc.at("text").get<std::string>());
      for (const auto& qt : qtok) score += dtok.count(qt) ? 1 : 0;
      if (score > 0) expect.emplace_back(-score, id);
    }
    std::sort(expect.begin(), expect.end());
    std::vector<std::string> want;
    for (const auto& [neg, id] : expect) want.push_back(id);

    CHECK(rank_documents(docs, query) == want);
  }
}

TEST_CASE("retrieval submit_answer appends to answers") {
  Environment env(retrieval_task());
  CHECK(env.execute(mk("submit_answer", {{"text", "done"}})).ok);
  CHECK(env.execute(mk("submit_answer", {{"text", "again"}})).ok);
  CHECK(env.live_state().at("answers") == Json::array({"done", "again"}));
}

namespace {

TaskRecord files_task() {
  TaskRecord t;
  t.task_id = "t-files-1";
  t.domain = Domain::kFiles;
  t.instruction = "file ops";
  t.tool_schemas = {tool("create_file", {param("path"), param("content")}),
                    tool("read_file", {param("path")}),
                    tool("append_file", {param("path"), param("content")}),
                    tool("delete_file", {param("path")}),
                    tool("list_dir", {param("path")}),
                    tool("move_file", {param("src"), param("dst")})};
  t.initial_state = Json{{"files", Json{{"old/a.txt", "aa"}}}};
  t.success_criteria = {StateExists{"files"}};
  t.budgets = Budget{12, 10, 2, 1000};
  t.version = "1.0.0";
  return t;
}

}  // namespace

TEST_CASE("files create, append, move, list semantics") {
  Environment env(files_task());
  CHECK(env.execute(mk("create_file", {{"path", "new/b.txt"}, {"content", "x"}})).ok);
  CHECK(env.execute(mk("append_file", {{"path", "new/b.txt"}, {"content", "y"}})).ok);
  CHECK(env.live_state().at("files").at("new/b.txt") == "xy");

  auto clash = env.execute(mk("move_file", {{"src", "old/a.txt"}, {"dst", "new/b.txt"}}));
  CHECK(!clash.ok);
  CHECK(clash.error.code == ErrorCode::kConflict);

  CHECK(env.execute(mk("move_file", {{"src", "old/a.txt"}, {"dst", "new/a.txt"}})).ok);
  CHECK(!env.live_state().at("files").contains("old/a.txt"));

  auto listed = env.execute(mk("list_dir", {{"path", "new/"}}));
  REQUIRE(listed.ok);
  CHECK(listed.value.at("paths") == Json::array({"new/a.txt", "new/b.txt"}));

  CHECK(!env.execute(mk("append_file", {{"path", "ghost"}, {"content", "z"}})).ok);
}

namespace {

TaskRecord sched_task() {
  TaskRecord t;
  t.task_id = "t-sched-1";
  t.domain = Domain::kScheduling;
  t.instruction = "calendar ops";
  t.tool_schemas = {
      tool("create_event", {param("id"), param("start"), param("end"), param("title")}),
      tool("update_event", {param("id"), param("start", ValueKind::kString, false),
                            param("end", ValueKind::kString, false),
                            param("title", ValueKind::kString, false)}),
      tool("cancel_event", {param("id")}),
      tool("list_events", {}),
      tool("check_conflicts", {})};
  t.initial_state = Json{{"events", Json::object()}};
  t.success_criteria = {StateExists{"events"}};
  t.budgets = Budget{20, 18, 2, 1000};
  t.version = "1.0.0";
  return t;
}

std::string hhmm(int minutes) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

}  // namespace

TEST_CASE("scheduling conflicts agree with an integer-interval oracle") {
  SeededStream s(41, "overlap-prop");
  for (int round = 0; round < 100; ++round) {
    Environment env(sched_task());
    std::vector<std::pair<int, int>> intervals;
    const uint64_t n = 2 + s.next_below(4);
    for (uint64_t i = 0; i < n; ++i) {
      const int start = 8 * 60 + static_cast<int>(s.next_below(8 * 60));
      const int end = start + 15 + static_cast<int>(s.next_below(180));
      intervals.emplace_back(start, end);
      REQUIRE(env.execute(mk("create_event", {{"id", "e" + std::to_string(i)},
                                              {"start", hhmm(start)},
                                              {"end", hhmm(end)},
                                              {"title", "t"}}))
                  .ok);
    }
    auto result = env.execute(mk("check_conflicts"));
    REQUIRE(result.ok);

    Json want = Json::array();
    for (size_t i = 0; i < intervals.size(); ++i)
      for (size_t j = i + 1; j < intervals.size(); ++j)
        if (intervals[i].first < intervals[j].second &&
            intervals[j].first < intervals[i].second)
          want.push_back(Json::array(
              {"e" + std::to_string(i), "e" + std::to_string(j)}));
    CHECK(result.value.at("conflicts") == want);
    CHECK(env.live_state().at("conflict_pairs") == want);
  }
}

TEST_CASE("scheduling touching events do not conflict") {
  Environment env(sched_task());
  CHECK(env.execute(mk("create_event", {{"id", "a"}, {"start", "09:00"},
                                        {"end", "10:00"}, {"title", "t"}}))
            .ok);
  CHECK(env.execute(mk("create_event", {{"id", "b"}, {"start", "10:00"},
                                        {"end", "11:00"}, {"title", "t"}}))
            .ok);
  auto result = env.execute(mk("check_conflicts"));
  REQUIRE(result.ok);
  CHECK(result.value.at("conflicts") == Json::array());
}

TEST_CASE("scheduling update and cancel") {
  Environment env(sched_task());
  REQUIRE(env.execute(mk("create_event", {{"id", "a"}, {"start", "09:00"},
                                          {"end", "10:00"}, {"title", "old"}}))
              .ok);
  CHECK(env.execute(mk("update_event", {{"id", "a"}, {"title", "new"}})).ok);
  CHECK(env.live_state().at("events").at("a").at("title") == "new");
  CHECK(env.live_state().at("events").at("a").at("start") == "09:00");
  CHECK(env.execute(mk("cancel_event", {{"id", "a"}})).ok);
  CHECK(!env.execute(mk("cancel_event", {{"id", "a"}})).ok);
}

#include "toolbench/environment.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

namespace toolbench {

const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::kUnknownTool: return "unknown_tool";
    case ErrorCode::kInvalidArguments: return "invalid_arguments";
    case ErrorCode::kSchemaDrift: return "schema_drift";
    case ErrorCode::kRateLimited: return "rate_limited";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kUnauthorized: return "unauthorized";
    case ErrorCode::kPolicyViolation: return "policy_violation";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "?";
}

ErrorCode error_code_from_string(const std::string& s) {
  if (s == "unknown_tool") return ErrorCode::kUnknownTool;
  if (s == "invalid_arguments") return ErrorCode::kInvalidArguments;
  if (s == "schema_drift") return ErrorCode::kSchemaDrift;
  if (s == "rate_limited") return ErrorCode::kRateLimited;
  if (s == "timeout") return ErrorCode::kTimeout;
  if (s == "unauthorized") return ErrorCode::kUnauthorized;
  if (s == "policy_violation") return ErrorCode::kPolicyViolation;
  if (s == "not_found") return ErrorCode::kNotFound;
  if (s == "conflict") return ErrorCode::kConflict;
  throw std::invalid_argument("unknown error code '" + s + "'");
}

ToolResult ToolResult::success(Json value) {
  ToolResult r;
  r.ok = true;
  r.value = std::move(value);
  return r;
}

ToolResult ToolResult::failure(ErrorPayload error) {
  ToolResult r;
  r.ok = false;
  r.error = std::move(error);
  return r;
}

Json to_json(const FaultContext& c) {
  return Json{{"fault_type", to_string(c.fault_type)},
              {"fault_index", c.fault_index},
              {"trigger", c.trigger}};
}

FaultContext fault_context_from_json(const Json& j) {
  FaultContext c;
  c.fault_type = fault_type_from_string(j.at("fault_type").get<std::string>());
  c.fault_index = j.at("fault_index").get<int>();
  c.trigger = j.at("trigger").get<std::string>();
  return c;
}

Json to_json(const ErrorPayload& e) {
  Json j{{"code", to_string(e.code)}, {"message", e.message}};
  if (!e.unknown_params.empty()) j["unknown_params"] = e.unknown_params;
  if (!e.missing_params.empty()) j["missing_params"] = e.missing_params;
  if (e.retry_after_steps) j["retry_after_steps"] = *e.retry_after_steps;
  if (e.fault_context) j["fault_context"] = to_json(*e.fault_context);
  return j;
}

ErrorPayload error_payload_from_json(const Json& j) {
  ErrorPayload e;
  e.code = error_code_from_string(j.at("code").get<std::string>());
  e.message = j.at("message").get<std::string>();
  if (j.contains("unknown_params"))
    e.unknown_params = j.at("unknown_params").get<std::vector<std::string>>();
  if (j.contains("missing_params"))
    e.missing_params = j.at("missing_params").get<std::vector<std::string>>();
  if (j.contains("retry_after_steps"))
    e.retry_after_steps = j.at("retry_after_steps").get<int>();
  if (j.contains("fault_context"))
    e.fault_context = fault_context_from_json(j.at("fault_context"));
  return e;
}

Json to_json(const ToolResult& r) {
  if (r.ok) return Json{{"ok", true}, {"value", r.value}};
  return Json{{"ok", false}, {"error", to_json(r.error)}};
}

ToolResult tool_result_from_json(const Json& j) {
  ToolResult r;
  r.ok = j.at("ok").get<bool>();
  if (r.ok)
    r.value = j.at("value");
  else
    r.error = error_payload_from_json(j.at("error"));
  return r;
}

Json to_json(const ToolCall& c) {
  Json args = Json::object();
  for (const auto& [k, v] : c.arguments) args[k] = v;
  return Json{{"tool", c.tool_name}, {"arguments", args}};
}

ToolCall tool_call_from_json(const Json& j) {
  ToolCall c;
  c.tool_name = j.at("tool").get<std::string>();
  for (const auto& [k, v] : j.at("arguments").items()) c.arguments[k] = v;
  return c;
}

namespace {

bool kind_ok(ValueKind kind, const Json& v) {
  switch (kind) {
    case ValueKind::kString: return v.is_string();
    case ValueKind::kInteger: return v.is_number_integer();
    case ValueKind::kNumber: return v.is_number();
    case ValueKind::kBoolean: return v.is_boolean();
    case ValueKind::kList: return v.is_array();
    case ValueKind::kMap: return v.is_object();
  }
  return false;
}

ErrorPayload make_error(ErrorCode code, std::string message) {
  ErrorPayload e;
  e.code = code;
  e.message = std::move(message);
  return e;
}

std::string arg_string(const Json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::set<std::string> tokenize(const std::string& text) {
  std::set<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      tokens.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.insert(cur);
  return tokens;
}

}  // namespace

std::vector<std::string> rank_documents(const Json& documents,
                                        const std::string& query) {
  const auto query_tokens = tokenize(query);
  std::vector<std::pair<int, std::string>> scored;
  for (const auto& [id, doc] : documents.items()) {
    std::string text;
    if (doc.contains("title")) text += doc.at("title").get<std::string>() + " ";
    if (doc.contains("text")) text += doc.at("text").get<std::string>();
    const auto doc_tokens = tokenize(text);
    int score = 0;
    for (const auto& t : query_tokens)
      if (doc_tokens.count(t)) ++score;
    if (score > 0) scored.emplace_back(score, id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> ids;
  ids.reserve(scored.size());
  for (const auto& [score, id] : scored) ids.push_back(id);
  return ids;
}

Environment::Environment(const TaskRecord& task)
    : domain_(task.domain),
      state_(task.initial_state),
      schemas_(task.tool_schemas) {}

std::optional<ErrorPayload> Environment::validate_call(
    const ToolCall& call) const {
  const ToolSchema* tool = nullptr;
  for (const auto& t : schemas_)
    if (t.name == call.tool_name) tool = &t;
  if (!tool)
    return make_error(ErrorCode::kUnknownTool,
                      "unknown tool '" + call.tool_name + "'");

  ErrorPayload e = make_error(ErrorCode::kInvalidArguments, "");
  for (const auto& p : tool->params) {
    auto it = call.arguments.find(p.name);
    if (it == call.arguments.end()) {
      if (p.required) e.missing_params.push_back(p.name);
      continue;
    }
    if (!kind_ok(p.value_kind, it->second)) {
      e.message = "param '" + p.name + "' has wrong kind";
      return e;
    }
    if (!p.allowed_values.empty() &&
        std::find(p.allowed_values.begin(), p.allowed_values.end(),
                  it->second) == p.allowed_values.end()) {
      e.message = "param '" + p.name + "' not in allowed values";
      return e;
    }
  }
  for (const auto& [name, value] : call.arguments)
    if (!tool->find_param(name)) e.unknown_params.push_back(name);

  if (!e.missing_params.empty() || !e.unknown_params.empty()) {
    e.message = "invalid arguments for '" + call.tool_name + "'";
    return e;
  }
  return std::nullopt;
}

ToolResult Environment::execute(const ToolCall& call) {
  ToolResult result;
  switch (domain_) {
    case Domain::kCrud: result = execute_crud(call); break;
    case Domain::kRetrieval: result = execute_retrieval(call); break;
    case Domain::kFiles: result = execute_files(call); break;
    case Domain::kScheduling: result = execute_scheduling(call); break;
  }
  log_.emplace_back(call, result);
  return result;
}

ToolResult Environment::execute_crud(const ToolCall& call) {
  Json& records = state_["records"];
  const auto& name = call.tool_name;
  if (name == "create_record") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (records.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kConflict, "record '" + id + "' already exists"));
    records[id] = call.arguments.at("fields");
    return ToolResult::success(Json{{"id", id}});
  }
  if (name == "read_record") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!records.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "record '" + id + "' not found"));
    return ToolResult::success(records.at(id));
  }
  if (name == "update_record") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!records.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "record '" + id + "' not found"));
    for (const auto& [k, v] : call.arguments.at("fields").items())
      records[id][k] = v;
    return ToolResult::success(records.at(id));
  }
  if (name == "delete_record") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!records.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "record '" + id + "' not found"));
    records.erase(id);
    return ToolResult::success(Json{{"deleted", id}});
  }
  if (name == "list_records") {
    std::vector<std::string> ids;
    for (const auto& [id, rec] : records.items()) ids.push_back(id);
    return ToolResult::success(Json{{"ids", ids}});
  }
  return ToolResult::failure(
      make_error(ErrorCode::kUnknownTool, "no semantics for '" + name + "'"));
}

ToolResult Environment::execute_retrieval(const ToolCall& call) {
  const auto& name = call.tool_name;
  if (name == "search") {
    const auto query = call.arguments.at("query").get<std::string>();
    return ToolResult::success(
        Json{{"results", rank_documents(state_.at("documents"), query)}});
  }
  if (name == "fetch_document") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!state_.at("documents").contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "document '" + id + "' not found"));
    return ToolResult::success(state_.at("documents").at(id));
  }
  if (name == "submit_answer") {
    const auto text = call.arguments.at("text").get<std::string>();
    state_["answers"].push_back(text);
    return ToolResult::success(Json{{"accepted", true}});
  }
  return ToolResult::failure(
      make_error(ErrorCode::kUnknownTool, "no semantics for '" + name + "'"));
}

ToolResult Environment::execute_files(const ToolCall& call) {
  Json& files = state_["files"];
  const auto& name = call.tool_name;
  if (name == "create_file") {
    const auto path = call.arguments.at("path").get<std::string>();
    if (files.contains(path))
      return ToolResult::failure(
          make_error(ErrorCode::kConflict, "file '" + path + "' already exists"));
    files[path] = call.arguments.at("content");
    return ToolResult::success(Json{{"path", path}});
  }
  if (name == "read_file") {
    const auto path = call.arguments.at("path").get<std::string>();
    if (!files.contains(path))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "file '" + path + "' not found"));
    return ToolResult::success(Json{{"content", files.at(path)}});
  }
  if (name == "append_file") {
    const auto path = call.arguments.at("path").get<std::string>();
    if (!files.contains(path))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "file '" + path + "' not found"));
    files[path] = files.at(path).get<std::string>() +
                  call.arguments.at("content").get<std::string>();
    return ToolResult::success(Json{{"path", path}});
  }
  if (name == "delete_file") {
    const auto path = call.arguments.at("path").get<std::string>();
    if (!files.contains(path))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "file '" + path + "' not found"));
    files.erase(path);
    return ToolResult::success(Json{{"deleted", path}});
  }
  if (name == "list_dir") {
    const auto prefix = call.arguments.at("path").get<std::string>();
    std::vector<std::string> paths;
    for (const auto& [path, content] : files.items())
      if (path.rfind(prefix, 0) == 0) paths.push_back(path);
    return ToolResult::success(Json{{"paths", paths}});
  }
  if (name == "move_file") {
    const auto src = call.arguments.at("src").get<std::string>();
    const auto dst = call.arguments.at("dst").get<std::string>();
    if (!files.contains(src))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "file '" + src + "' not found"));
    if (files.contains(dst))
      return ToolResult::failure(
          make_error(ErrorCode::kConflict, "file '" + dst + "' already exists"));
    files[dst] = files.at(src);
    files.erase(src);
    return ToolResult::success(Json{{"path", dst}});
  }
  return ToolResult::failure(
      make_error(ErrorCode::kUnknownTool, "no semantics for '" + name + "'"));
}

namespace {

bool events_overlap(const Json& a, const Json& b) {
  // Half-open [start, end): touching events do not conflict. Times are
  // zero-padded "HH:MM" strings, so lexicographic order is time order.
  const auto as = a.at("start").get<std::string>();
  const auto ae = a.at("end").get<std::string>();
  const auto bs = b.at("start").get<std::string>();
  const auto be = b.at("end").get<std::string>();
  return as < be && bs < ae;
}

Json conflict_pairs(const Json& events) {
  std::vector<std::string> ids;
  for (const auto& [id, ev] : events.items()) ids.push_back(id);
  Json pairs = Json::array();
  for (size_t i = 0; i < ids.size(); ++i)
    for (size_t j = i + 1; j < ids.size(); ++j)
      if (events_overlap(events.at(ids[i]), events.at(ids[j])))
        pairs.push_back(Json::array({ids[i], ids[j]}));
  return pairs;
}

}  // namespace

ToolResult Environment::execute_scheduling(const ToolCall& call) {
  Json& events = state_["events"];
  const auto& name = call.tool_name;
  if (name == "create_event") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (events.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kConflict, "event '" + id + "' already exists"));
    Json ev{{"start", call.arguments.at("start")},
            {"end", call.arguments.at("end")},
            {"title", call.arguments.at("title")}};
    if (state_.value("forbid_overlap", false)) {
      for (const auto& [other_id, other] : events.items())
        if (events_overlap(ev, other))
          return ToolResult::failure(make_error(
              ErrorCode::kConflict, "event overlaps '" + other_id + "'"));
    }
    events[id] = ev;
    return ToolResult::success(Json{{"id", id}});
  }
  if (name == "update_event") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!events.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "event '" + id + "' not found"));
    for (const char* field : {"start", "end", "title"}) {
      auto it = call.arguments.find(field);
      if (it != call.arguments.end()) events[id][field] = it->second;
    }
    return ToolResult::success(events.at(id));
  }
  if (name == "cancel_event") {
    const auto id = call.arguments.at("id").get<std::string>();
    if (!events.contains(id))
      return ToolResult::failure(
          make_error(ErrorCode::kNotFound, "event '" + id + "' not found"));
    events.erase(id);
    return ToolResult::success(Json{{"cancelled", id}});
  }
  if (name == "list_events") {
    std::vector<std::string> ids;
    for (const auto& [id, ev] : events.items()) ids.push_back(id);
    return ToolResult::success(Json{{"ids", ids}});
  }
  if (name == "check_conflicts") {
    Json pairs = conflict_pairs(events);
    state_["conflict_pairs"] = pairs;
    return ToolResult::success(Json{{"conflicts", pairs}});
  }
  return ToolResult::failure(
      make_error(ErrorCode::kUnknownTool, "no semantics for '" + name + "'"));
}

std::string Environment::state_digest() const {
  return sha256_hex(canonical_bytes(state_));
}

}  // namespace toolbench

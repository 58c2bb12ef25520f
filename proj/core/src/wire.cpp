#include "toolbench/wire.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace toolbench {

Json reset_message(const ResetInfo& info) {
  Json tools = Json::array();
  for (const auto& t : info.tool_schemas) tools.push_back(to_json(t));
  return Json{{"type", "reset"},
              {"task_id", info.task_id},
              {"instruction", info.instruction},
              {"tool_schemas", tools},
              {"budgets", to_json(info.budgets)},
              {"goal_annotation", info.goal_annotation}};
}

Json observe_message(const Observation& obs) {
  Json remaining{{"steps", obs.remaining.steps},
                 {"tool_calls", obs.remaining.tool_calls},
                 {"retries", obs.remaining.retries}};
  Json last = obs.last_result ? to_json(*obs.last_result) : Json(nullptr);
  return Json{{"type", "observe"},
              {"step", obs.step_index},
              {"remaining", remaining},
              {"last_result", last}};
}

AgentAction parse_act_message(const Json& message) {
  try {
    if (message.at("type").get<std::string>() != "act")
      throw AgentProtocolError("expected act message");
    const Json& action = message.at("action");
    if (action.is_string()) {
      if (action.get<std::string>() == "finish") return AgentAction::make_finish();
      throw AgentProtocolError("unknown action string");
    }
    return AgentAction::make_call(tool_call_from_json(action.at("call")));
  } catch (const AgentProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw AgentProtocolError(std::string("malformed act message: ") + e.what());
  }
}

Json act_message(const AgentAction& action) {
  if (action.finish) return Json{{"type", "act"}, {"action", "finish"}};
  return Json{{"type", "act"}, {"action", Json{{"call", to_json(action.call)}}}};
}

void serve_agent(Agent& agent, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json msg = parse_json(line);
    const auto type = msg.at("type").get<std::string>();
    if (type == "reset") {
      ResetInfo info;
      info.task_id = msg.at("task_id").get<std::string>();
      info.instruction = msg.at("instruction").get<std::string>();
      for (const auto& t : msg.at("tool_schemas"))
        info.tool_schemas.push_back(tool_schema_from_json(t));
      info.budgets = budget_from_json(msg.at("budgets"));
      info.goal_annotation = msg.at("goal_annotation");
      agent.reset(info);
      out << canonical_bytes(Json{{"type", "ready"}}) << "\n" << std::flush;
    } else if (type == "observe") {
      Observation obs;
      obs.step_index = msg.at("step").get<int>();
      const Json& rem = msg.at("remaining");
      obs.remaining = {rem.at("steps").get<int>(), rem.at("tool_calls").get<int>(),
                       rem.at("retries").get<int>()};
      if (!msg.at("last_result").is_null())
        obs.last_result = tool_result_from_json(msg.at("last_result"));
      out << canonical_bytes(act_message(agent.act(obs))) << "\n" << std::flush;
    }
  }
}

namespace {

class SubprocessAgent : public Agent {
 public:
  SubprocessAgent(const std::vector<std::string>& command, int deadline_ms)
      : deadline_ms_(deadline_ms) {
    if (command.empty()) throw std::runtime_error("empty agent command");

    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw std::runtime_error("pipe failed");

    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error("fork failed");
    if (pid_ == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      std::vector<char*> argv;
      for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
      argv.push_back(nullptr);
      execvp(argv[0], argv.data());
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];

    // Verify the child survived exec; a quick exit (e.g. missing binary)
    // is a configuration error, not an episode failure.
    usleep(20000);
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == pid_) {
      pid_ = -1;
      throw std::runtime_error("agent command failed to start: " + command[0]);
    }
  }

  ~SubprocessAgent() override {
    if (stdin_fd_ >= 0) close(stdin_fd_);
    if (stdout_fd_ >= 0) close(stdout_fd_);
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid_, &status, WNOHANG) == pid_) return;
        usleep(10000);
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
    }
  }

  void reset(const ResetInfo& info) override {
    const Json reply = round_trip(reset_message(info));
    if (!reply.is_object() || reply.value("type", "") != "ready")
      throw AgentProtocolError("agent did not acknowledge reset");
  }

  AgentAction act(const Observation& obs) override {
    return parse_act_message(round_trip(observe_message(obs)));
  }

 private:
  Json round_trip(const Json& message) {
    send_line(canonical_bytes(message));
    const std::string line = read_line();
    try {
      return parse_json(line);
    } catch (const std::exception& e) {
      throw AgentProtocolError(std::string("invalid reply: ") + e.what());
    }
  }

  void send_line(const std::string& line) {
    std::string payload = line + "\n";
    size_t off = 0;
    while (off < payload.size()) {
      const ssize_t n =
          write(stdin_fd_, payload.data() + off, payload.size() - off);
      if (n <= 0) throw AgentProtocolError("agent stdin closed");
      off += static_cast<size_t>(n);
    }
  }

  std::string read_line() {
    while (true) {
      const size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      struct pollfd pfd{stdout_fd_, POLLIN, 0};
      const int ready = poll(&pfd, 1, deadline_ms_);
      if (ready <= 0) throw AgentProtocolError("agent reply deadline exceeded");
      char chunk[4096];
      const ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
      if (n <= 0) throw AgentProtocolError("agent stdout closed");
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int deadline_ms_;
  std::string buffer_;
};

}  // namespace

std::unique_ptr<Agent> spawn_external_agent(
    const std::vector<std::string>& command, int reply_deadline_ms) {
  return std::make_unique<SubprocessAgent>(command, reply_deadline_ms);
}

}  // namespace toolbench

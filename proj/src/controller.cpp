#include "seqbench/controller.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seqbench/replay.hpp"
#include "seqbench/serialize.hpp"

namespace seqbench {

namespace {

using Json = nlohmann::json;

constexpr const char* kSnapshotHeader = "seqbench-snapshot v1";

std::string base64_encode(const std::string& bytes) {
  static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += alphabet[v & 63];
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += alphabet[(v >> 18) & 63];
    out += alphabet[(v >> 12) & 63];
    out += alphabet[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::string base64_decode(const std::string& text) {
  std::string out;
  int buffer = 0, bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = base64_value(c);
    if (v < 0) throw std::runtime_error("invalid base64 payload in snapshot");
    buffer = (buffer << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buffer >> bits) & 0xff);
    }
  }
  return out;
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void try_set_scripted_context(Agent& agent, const std::string& task_id, int round) {
  if (auto* scripted = dynamic_cast<ScriptedModel*>(&agent.model())) {
    scripted->set_context(task_id, round);
  }
}

void rewrite_log_prefix(const std::string& path, std::size_t keep_lines) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line) && lines.size() < keep_lines) lines.push_back(line);
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << "\n";
}

}  // namespace

void save_snapshot(const ExperimentState& state, const std::string& path) {
  Json states = Json::object();
  for (const auto& [name, bytes] : state.callback_states) {
    states[name] = base64_encode(bytes);
  }
  Json j = {{"config_digest", state.config_digest},
            {"next_task_index", state.next_task_index},
            {"session_log_path", state.session_log_path},
            {"callback_states", std::move(states)}};
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write snapshot: " + path);
    out << kSnapshotHeader << "\n" << j.dump() << "\n";
  }
  std::filesystem::rename(tmp, path);
}

ExperimentState restore_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  std::string header;
  std::getline(in, header);
  if (header != kSnapshotHeader) {
    throw std::runtime_error("snapshot at " + path + " has unsupported header '" + header + "'");
  }
  std::stringstream rest;
  rest << in.rdbuf();
  ExperimentState state;
  try {
    Json j = Json::parse(rest.str());
    state.config_digest = j.at("config_digest").get<std::string>();
    state.next_task_index = j.at("next_task_index").get<std::size_t>();
    state.session_log_path = j.at("session_log_path").get<std::string>();
    for (const auto& [name, value] : j.at("callback_states").items()) {
      state.callback_states[name] = base64_decode(value.get<std::string>());
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("corrupt snapshot at " + path + ": " + e.what());
  }
  return state;
}

Session execute_task(const TaskInstance& task, Agent& agent, Environment& environment,
                     const CallbackList& callbacks, std::vector<Session>& history,
                     int round_limit, const TaskHooks* hooks) {
  Session session;
  session.task_id = task.task_id;
  ControlFlags flags;
  ChatHistory injection;

  CallbackContext ctx;
  ctx.agent = &agent;
  ctx.environment = &environment;
  ctx.session = &session;
  ctx.history = &history;
  ctx.flags = &flags;
  ctx.prompt_injection = &injection;

  bool callback_failed = false;
  auto dispatch = [&](CallbackEvent event) {
    if (callback_failed) return;
    try {
      dispatch_event(event, ctx, callbacks);
    } catch (const std::exception&) {
      session.status = SampleStatus::agent_unknown_error;
      callback_failed = true;
    }
  };

  dispatch(CallbackEvent::on_session_create);

  bool did_reset = false;
  if (!callback_failed && flags.should_environment_reset) {
    try {
      session.history = environment.reset(task);
      did_reset = true;
      dispatch(CallbackEvent::on_environment_reset);
    } catch (const EnvironmentBackendError&) {
      session.status = SampleStatus::task_environment_error;
    } catch (const std::logic_error&) {
      throw;  // harness bug, not a task outcome
    } catch (const std::exception&) {
      session.status = SampleStatus::task_unknown_error;
    }
  }

  const int max_iterations = round_limit * 16 + 64;
  int iterations = 0;
  bool first_iteration = true;
  while (session.status == SampleStatus::running && !callback_failed) {
    if (++iterations > max_iterations) {
      session.status = SampleStatus::task_unknown_error;
      break;
    }
    // Flags reset at the top of every iteration; the first iteration keeps
    // whatever the pre-loop events decided.
    if (!first_iteration) flags.reset();
    first_iteration = false;

    if (flags.should_agent_inference) {
      try_set_scripted_context(agent, task.task_id, session.rounds_used);
      ChatHistory prompt = merge_prompt(session.history, injection);
      InferenceResult result = agent.inference(prompt);
      session.input_tokens_total += result.prompt_tokens;
      if (result.prompt_tokens > session.max_prompt_tokens) {
        session.max_prompt_tokens = result.prompt_tokens;
      }
      if (!result.ok()) {
        session.status = result.failure;
        break;
      }
      session.history.add_agent(result.text);
      ++session.rounds_used;
      dispatch(CallbackEvent::on_agent_inference);
      if (callback_failed || session.status != SampleStatus::running) break;
    }

    if (flags.should_environment_interact) {
      if (session.history.empty() || session.history.messages.back().role != Role::agent) {
        session.status = SampleStatus::agent_validation_failed;
        break;
      }
      ParsedAction action =
          parse_action(environment.kind(), session.history.messages.back().content);
      if (action.kind == ActionKind::invalid) {
        session.status = SampleStatus::agent_validation_failed;
        break;
      }
      InteractResult result;
      try {
        result = environment.interact(action);
      } catch (const EnvironmentBackendError&) {
        session.status = SampleStatus::task_environment_error;
        break;
      } catch (const std::logic_error&) {
        throw;
      } catch (const std::exception&) {
        session.status = SampleStatus::task_unknown_error;
        break;
      }
      if (result.observation) session.history.add_user(*result.observation);
      dispatch(CallbackEvent::on_environment_interact);
      if (callback_failed || session.status != SampleStatus::running) break;
      if (result.terminal) {
        session.status = SampleStatus::completed;
        break;
      }
    }

    if (session.rounds_used >= round_limit) {
      session.status = SampleStatus::task_limit_reached;
      break;
    }
  }

  // Evaluation and per-task cleanup. The reward is execution-based; format
  // violations in DB and KG are judged failed outright per the instruction
  // text, while OS rewards depend only on the evaluation script's exit code.
  int reward = 0;
  if (did_reset && flags.should_environment_complete) {
    try {
      reward = environment.complete();
    } catch (const EnvironmentBackendError&) {
      if (session.status != SampleStatus::agent_unknown_error) {
        session.status = SampleStatus::task_environment_error;
      }
      reward = 0;
    } catch (const std::logic_error&) {
      throw;
    } catch (const std::exception&) {
      session.status = SampleStatus::task_unknown_error;
      reward = 0;
    }
  }
  if (callback_failed || session.status == SampleStatus::agent_unknown_error) reward = 0;
  if (session.status == SampleStatus::agent_validation_failed && environment.kind() != EnvKind::os) {
    reward = 0;
  }
  session.reward = reward;
  session.outcome = reward == 1 ? EvaluationOutcome::correct : EvaluationOutcome::incorrect;
  if (session.status == SampleStatus::running) session.status = SampleStatus::completed;
  session.ts = now_ms();

  dispatch(CallbackEvent::on_environment_complete);

  if (hooks && hooks->persist_session) hooks->persist_session(session);

  std::map<std::string, std::string> states;
  ctx.callback_states = &states;
  dispatch(CallbackEvent::on_state_save);
  ctx.callback_states = nullptr;
  if (hooks && hooks->save_state) hooks->save_state(states);

  return session;
}

MetricsReport run_experiment(const RunOptions& options, const std::vector<TaskInstance>& tasks,
                             Agent& agent, Environment& environment,
                             const CallbackList& callbacks) {
  if (tasks.empty()) throw std::invalid_argument("task list is empty");
  for (const auto& task : tasks) {
    if (task.env_kind != environment.kind()) {
      throw std::invalid_argument("task " + task.task_id + " targets " +
                                  to_string(task.env_kind) + " but the environment is " +
                                  to_string(environment.kind()));
    }
    auto errors = validate_task_instance(task);
    if (!errors.empty()) {
      throw std::invalid_argument("invalid task " + task.task_id + ": " + errors.front());
    }
  }

  std::vector<Session> history;
  std::size_t next_index = 0;
  bool snapshots_enabled = !options.snapshot_path.empty();

  if (snapshots_enabled && std::filesystem::exists(options.snapshot_path)) {
    ExperimentState state = restore_snapshot(options.snapshot_path);
    if (state.config_digest != options.config_digest) {
      throw std::runtime_error(
          "snapshot was produced by a different configuration; refusing to resume");
    }
    history = load_session_log(options.session_log_path);
    if (history.size() < state.next_task_index) {
      throw std::runtime_error("session log is shorter than the snapshot expects; refusing to resume");
    }
    if (history.size() > state.next_task_index) {
      // Interrupted between log append and snapshot write: drop the tail and
      // re-run that task deterministically.
      history.resize(state.next_task_index);
      rewrite_log_prefix(options.session_log_path, state.next_task_index);
    }
    next_index = state.next_task_index;

    CallbackContext ctx;
    ctx.agent = &agent;
    ctx.environment = &environment;
    ctx.history = &history;
    ctx.callback_states = &state.callback_states;
    dispatch_event(CallbackEvent::restore_state, ctx, callbacks);
  } else {
    if (snapshots_enabled && std::filesystem::exists(options.session_log_path) &&
        std::filesystem::file_size(options.session_log_path) > 0) {
      throw std::runtime_error(
          "session log exists without a snapshot; refusing to overwrite " +
          options.session_log_path);
    }
    std::ofstream truncate(options.session_log_path, std::ios::trunc);
    if (!truncate) {
      throw std::runtime_error("cannot write session log: " + options.session_log_path);
    }
  }

  const char* crash_env = std::getenv("SEQBENCH_CRASH_AFTER_TASK");
  int crash_after = crash_env ? std::atoi(crash_env) : -1;

  for (std::size_t i = next_index; i < tasks.size(); ++i) {
    TaskHooks hooks;
    hooks.persist_session = [&](const Session& session) {
      append_session(options.session_log_path, session);
    };
    hooks.save_state = [&](const std::map<std::string, std::string>& states) {
      if (!snapshots_enabled) return;
      ExperimentState state;
      state.config_digest = options.config_digest;
      state.next_task_index = i + 1;
      state.session_log_path = options.session_log_path;
      state.callback_states = states;
      save_snapshot(state, options.snapshot_path);
    };
    Session session = execute_task(tasks[i], agent, environment, callbacks, history,
                                   options.round_limits.for_kind(environment.kind()), &hooks);
    history.push_back(std::move(session));
    if (crash_after >= 0 && static_cast<int>(i) == crash_after) {
      _exit(137);  // fault-injection hook for crash-recovery tests
    }
  }

  return environment.calculate_metric(history, tasks);
}

}  // namespace seqbench

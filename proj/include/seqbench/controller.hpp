#pragma once

#include <functional>
#include <optional>
#include <string>

#include "seqbench/callback.hpp"
#include "seqbench/metrics.hpp"

namespace seqbench {

struct RoundLimits {
  int db = 3;
  int os = 5;
  int kg = 15;

  int for_kind(EnvKind kind) const {
    switch (kind) {
      case EnvKind::db: return db;
      case EnvKind::os: return os;
      case EnvKind::kg: return kg;
    }
    return db;
  }
};

// Everything needed to continue an interrupted experiment: which task comes
// next, where the log lives, and the callbacks' serialized state. Restoring
// against a different configuration is refused via the digest.
struct ExperimentState {
  std::string config_digest;
  std::size_t next_task_index = 0;
  std::string session_log_path;
  std::map<std::string, std::string> callback_states;  // raw bytes per callback
};

void save_snapshot(const ExperimentState& state, const std::string& path);
ExperimentState restore_snapshot(const std::string& path);

// Persistence callouts invoked at the end of each task, in order:
// persist_session (log append), then on_state_save fires, then save_state
// (snapshot write).
struct TaskHooks {
  std::function<void(const Session&)> persist_session;
  std::function<void(const std::map<std::string, std::string>&)> save_state;
};

// Drives one task through the agent-environment loop under callback control
// flags. The returned session is terminal.
Session execute_task(const TaskInstance& task, Agent& agent, Environment& environment,
                     const CallbackList& callbacks, std::vector<Session>& history,
                     int round_limit, const TaskHooks* hooks = nullptr);

struct RunOptions {
  std::string session_log_path;
  std::string snapshot_path;  // empty disables snapshots
  std::string config_digest;
  RoundLimits round_limits;
};

// Strictly sequential execution of `tasks` in the given order. Each terminal
// session is appended to the log and snapshotted before the next task starts,
// so an interruption loses at most the in-flight task. If a snapshot exists
// at startup the run resumes behind it (restore_state fires exactly once).
MetricsReport run_experiment(const RunOptions& options, const std::vector<TaskInstance>& tasks,
                             Agent& agent, Environment& environment,
                             const CallbackList& callbacks);

}  // namespace seqbench

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "seqbench/action.hpp"
#include "seqbench/types.hpp"

namespace seqbench {

// Task-side infrastructure trouble (unreachable backend, broken container).
// The controller records it as task_environment_error on the current task.
struct EnvironmentBackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InteractResult {
  std::optional<std::string> observation;  // absent for terminal commits
  bool terminal = false;
};

// The five-method contract every environment implements. Call order is
// reset -> interact* -> complete per task; release frees long-lived resources
// and is idempotent. Violations throw std::logic_error.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;

  // Prepares the task state and returns the initial interaction history.
  virtual ChatHistory reset(const TaskInstance& task) = 0;

  // Executes one parsed agent action and returns the observation. Answer and
  // finish actions mark the session terminal.
  virtual InteractResult interact(const ParsedAction& action) = 0;

  // Evaluates the finished task against its ground truth, cleans up per-task
  // state and returns the binary reward.
  virtual int complete() = 0;

  virtual MetricsReport calculate_metric(std::span<const Session> sessions,
                                         std::span<const TaskInstance> tasks) = 0;

  virtual void release() = 0;
};

// Shared reset/interact/complete ordering checks for concrete environments.
class LifecycleGuard {
 public:
  void on_reset() {
    if (released_) throw std::logic_error("environment already released");
    if (in_task_) throw std::logic_error("reset called while a task is active");
    in_task_ = true;
  }
  void on_interact() const {
    if (!in_task_) throw std::logic_error("interact called outside reset/complete window");
  }
  void on_complete() {
    if (!in_task_) throw std::logic_error("complete called without an active task");
    in_task_ = false;
  }
  void on_release() { released_ = true; in_task_ = false; }
  // Rolls back a reset whose setup work failed partway.
  void abort_task() { in_task_ = false; }
  bool in_task() const { return in_task_; }

 private:
  bool in_task_ = false;
  bool released_ = false;
};

}  // namespace seqbench
